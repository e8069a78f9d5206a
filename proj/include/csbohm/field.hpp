#ifndef CSBOHM_FIELD_HPP
#define CSBOHM_FIELD_HPP

#include <array>
#include <optional>

#include "csbohm/grid.hpp"

namespace csbohm {

/// Default cutoff below which |<psi_f|psi_i>| counts as degenerate.
inline constexpr double kEpsilonDegenerate = 1e-8;

/// Complex amplitudes on a Grid1D at a tagged time. Immutable by convention:
/// every operation returns a new field.
struct WavefunctionField {
    Grid1D grid;
    CVec values;
    double time = 0.0;
    bool normalized = false;

    WavefunctionField() = default;
    WavefunctionField(Grid1D g, CVec v, double t, bool norm_flag = false);

    std::size_t size() const { return grid.n; }
};

/// Complex amplitudes on the product grid (x1, x2), row-major in x1.
struct TwoParticleField {
    Grid1D grid1;
    Grid1D grid2;
    CVec values; // values[i1 * grid2.n + i2]
    double time = 0.0;
    bool normalized = false;

    TwoParticleField() = default;
    TwoParticleField(Grid1D g1, Grid1D g2, CVec v, double t, bool norm_flag = false);

    Complex& at(std::size_t i1, std::size_t i2) { return values[i1 * grid2.n + i2]; }
    const Complex& at(std::size_t i1, std::size_t i2) const { return values[i1 * grid2.n + i2]; }
};

/// Two complex components per grid point (Dirac sector).
struct SpinorField {
    Grid1D grid;
    CVec upper;
    CVec lower;
    double time = 0.0;
    bool normalized = false;

    SpinorField() = default;
    SpinorField(Grid1D g, CVec up, CVec lo, double t, bool norm_flag = false);
};

/// The conserved overlap a = <psi_f|psi_i>. Computed once per run; the
/// per-slice recomputation exists only as an invariant check.
struct Amplitude {
    Complex value{0.0, 0.0};
};

// --- inner products and norms (uniform-grid Riemann quadrature) ---

Complex inner_product(const WavefunctionField& bra, const WavefunctionField& ket);
Complex inner_product(const TwoParticleField& bra, const TwoParticleField& ket);
/// Spinor product: integral of psi_f^dagger psi_i (equals psibar_f gamma^0 psi_i).
Complex inner_product(const SpinorField& bra, const SpinorField& ket);

double norm(const WavefunctionField& f);
double norm(const TwoParticleField& f);
double norm(const SpinorField& f);

WavefunctionField normalized(WavefunctionField f);
TwoParticleField normalized(TwoParticleField f);
SpinorField normalized(SpinorField f);

/// a = <psi_f|psi_i> at a common time; throws DegenerateOverlap when
/// |a| <= eps (the run cannot be seeded).
Amplitude amplitude(const WavefunctionField& psi_f, const WavefunctionField& psi_i,
                    double eps = kEpsilonDegenerate);
Amplitude amplitude(const TwoParticleField& psi_f, const TwoParticleField& psi_i,
                    double eps = kEpsilonDegenerate);
Amplitude amplitude(const SpinorField& psi_f, const SpinorField& psi_i,
                    double eps = kEpsilonDegenerate);

// --- constructors for scenario states ---

/// Normalized Gaussian exp(-(x-center)^2/(4 width^2) + i momentum x).
/// Requires width > 2*spacing and a 3-sigma margin inside the grid.
WavefunctionField gaussian_packet(const Grid1D& grid, double center, double momentum,
                                  double width, double time = 0.0);

/// Harmonic-oscillator eigenstate (omega = 1) via the Hermite recurrence.
WavefunctionField harmonic_eigenstate(const Grid1D& grid, unsigned n, double time = 0.0);

/// Product state psi1(x1) * psi2(x2).
TwoParticleField product_state(const WavefunctionField& psi1, const WavefunctionField& psi2);

/// Correlated Gaussian, a product of Gaussians in the rotated coordinates
/// u=(x1+x2)/sqrt2, v=(x1-x2)/sqrt2. sigma_plus != sigma_minus entangles the pair.
TwoParticleField entangled_gaussian(const Grid1D& g1, const Grid1D& g2,
                                    double center1, double center2,
                                    double sigma_plus, double sigma_minus,
                                    double p1 = 0.0, double p2 = 0.0, double time = 0.0);

/// Relabels the particles: Psi'(x2, x1) = Psi(x1, x2).
TwoParticleField swap_particles(const TwoParticleField& Psi);

/// Free-Dirac packet of the requested energy branch: Gaussian momentum
/// envelope times the exact spinor eigenvector of H(k).
SpinorField dirac_packet(const Grid1D& grid, double center, double momentum,
                         double width, double mass, int energy_sign = +1,
                         double time = 0.0);

// --- diagnostics ---

double position_mean(const WavefunctionField& f);
double position_variance(const WavefunctionField& f);
double position_mean(const SpinorField& f);

/// Max |psi| over the outermost `margin_cells` cells on each side.
double boundary_magnitude(const WavefunctionField& f, std::size_t margin_cells = 4);
double boundary_magnitude(const TwoParticleField& f, std::size_t margin_cells = 4);
double boundary_magnitude(const SpinorField& f, std::size_t margin_cells = 4);

} // namespace csbohm

#endif
