#include "csbohm/field.hpp"

#include <cmath>

#include "csbohm/errors.hpp"
#include "csbohm/fft.hpp"

namespace csbohm {

namespace {

void require_finite(const CVec& v, const char* where) {
    for (const Complex& z : v) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw StructuralError(std::string(where) + ": non-finite amplitude");
    }
}

void require_norm_one(double n, bool flag, const char* where) {
    if (flag && std::abs(n - 1.0) > 1e-9)
        throw StructuralError(std::string(where) + ": normalized flag set but norm = " +
                              std::to_string(n));
}

} // namespace

WavefunctionField::WavefunctionField(Grid1D g, CVec v, double t, bool norm_flag)
    : grid(g), values(std::move(v)), time(t), normalized(norm_flag) {
    if (values.size() != grid.n)
        throw StructuralError("WavefunctionField: value count does not match grid");
    require_finite(values, "WavefunctionField");
    require_norm_one(norm(*this), normalized, "WavefunctionField");
}

TwoParticleField::TwoParticleField(Grid1D g1, Grid1D g2, CVec v, double t, bool norm_flag)
    : grid1(g1), grid2(g2), values(std::move(v)), time(t), normalized(norm_flag) {
    if (values.size() != grid1.n * grid2.n)
        throw StructuralError("TwoParticleField: value count does not match product grid");
    require_finite(values, "TwoParticleField");
    require_norm_one(norm(*this), normalized, "TwoParticleField");
}

SpinorField::SpinorField(Grid1D g, CVec up, CVec lo, double t, bool norm_flag)
    : grid(g), upper(std::move(up)), lower(std::move(lo)), time(t), normalized(norm_flag) {
    if (upper.size() != grid.n || lower.size() != grid.n)
        throw StructuralError("SpinorField: component count does not match grid");
    require_finite(upper, "SpinorField");
    require_finite(lower, "SpinorField");
    require_norm_one(norm(*this), normalized, "SpinorField");
}

Complex inner_product(const WavefunctionField& bra, const WavefunctionField& ket) {
    require_same_grid(bra.grid, ket.grid, "inner_product");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < bra.grid.n; ++i)
        acc += std::conj(bra.values[i]) * ket.values[i];
    return acc * bra.grid.spacing;
}

Complex inner_product(const TwoParticleField& bra, const TwoParticleField& ket) {
    require_same_grid(bra.grid1, ket.grid1, "inner_product grid1");
    require_same_grid(bra.grid2, ket.grid2, "inner_product grid2");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < bra.values.size(); ++i)
        acc += std::conj(bra.values[i]) * ket.values[i];
    return acc * (bra.grid1.spacing * bra.grid2.spacing);
}

Complex inner_product(const SpinorField& bra, const SpinorField& ket) {
    require_same_grid(bra.grid, ket.grid, "inner_product");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < bra.grid.n; ++i)
        acc += std::conj(bra.upper[i]) * ket.upper[i] + std::conj(bra.lower[i]) * ket.lower[i];
    return acc * bra.grid.spacing;
}

double norm(const WavefunctionField& f) {
    double acc = 0.0;
    for (const Complex& z : f.values) acc += std::norm(z);
    return std::sqrt(acc * f.grid.spacing);
}

double norm(const TwoParticleField& f) {
    double acc = 0.0;
    for (const Complex& z : f.values) acc += std::norm(z);
    return std::sqrt(acc * f.grid1.spacing * f.grid2.spacing);
}

double norm(const SpinorField& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.grid.n; ++i)
        acc += std::norm(f.upper[i]) + std::norm(f.lower[i]);
    return std::sqrt(acc * f.grid.spacing);
}

WavefunctionField normalized(WavefunctionField f) {
    double n = norm(f);
    if (n <= 0.0) throw StructuralError("normalized: zero field");
    for (Complex& z : f.values) z /= n;
    f.normalized = true;
    return f;
}

TwoParticleField normalized(TwoParticleField f) {
    double n = norm(f);
    if (n <= 0.0) throw StructuralError("normalized: zero field");
    for (Complex& z : f.values) z /= n;
    f.normalized = true;
    return f;
}

SpinorField normalized(SpinorField f) {
    double n = norm(f);
    if (n <= 0.0) throw StructuralError("normalized: zero field");
    for (std::size_t i = 0; i < f.grid.n; ++i) {
        f.upper[i] /= n;
        f.lower[i] /= n;
    }
    f.normalized = true;
    return f;
}

namespace {
template <class Field>
Amplitude amplitude_impl(const Field& psi_f, const Field& psi_i, double eps) {
    Complex a = inner_product(psi_f, psi_i);
    if (std::abs(a) <= eps)
        throw DegenerateOverlap("amplitude: |<psi_f|psi_i>| = " + std::to_string(std::abs(a)) +
                                " <= " + std::to_string(eps));
    return Amplitude{a};
}
} // namespace

Amplitude amplitude(const WavefunctionField& psi_f, const WavefunctionField& psi_i, double eps) {
    return amplitude_impl(psi_f, psi_i, eps);
}
Amplitude amplitude(const TwoParticleField& psi_f, const TwoParticleField& psi_i, double eps) {
    return amplitude_impl(psi_f, psi_i, eps);
}
Amplitude amplitude(const SpinorField& psi_f, const SpinorField& psi_i, double eps) {
    return amplitude_impl(psi_f, psi_i, eps);
}

namespace {
void check_packet_geometry(const Grid1D& grid, double center, double width, const char* who) {
    if (width <= 2.0 * grid.spacing)
        throw PacketTooNarrow(std::string(who) + ": width " + std::to_string(width) +
                              " <= 2 * spacing " + std::to_string(grid.spacing));
    if (center - 3.0 * width < grid.origin || center + 3.0 * width > grid.xmax())
        throw PacketTooWide(std::string(who) + ": 3-sigma support leaves the grid");
}
} // namespace

WavefunctionField gaussian_packet(const Grid1D& grid, double center, double momentum,
                                  double width, double time) {
    check_packet_geometry(grid, center, width, "gaussian_packet");
    CVec v(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        double x = grid.x(i);
        double arg = (x - center) / (2.0 * width);
        v[i] = std::exp(Complex(-arg * arg, momentum * x));
    }
    return normalized(WavefunctionField(grid, std::move(v), time));
}

WavefunctionField harmonic_eigenstate(const Grid1D& grid, unsigned n, double time) {
    // Recurrence on the normalized functions phi_n keeps magnitudes O(1):
    //   phi_{n+1} = sqrt(2/(n+1)) x phi_n - sqrt(n/(n+1)) phi_{n-1}
    CVec v(grid.n);
    const double pi_quarter = std::pow(M_PI, -0.25);
    for (std::size_t i = 0; i < grid.n; ++i) {
        double x = grid.x(i);
        double prev = 0.0;
        double cur = pi_quarter * std::exp(-0.5 * x * x);
        for (unsigned m = 0; m < n; ++m) {
            double next = std::sqrt(2.0 / (m + 1.0)) * x * cur -
                          std::sqrt(m / (m + 1.0)) * prev;
            prev = cur;
            cur = next;
        }
        v[i] = cur;
    }
    WavefunctionField f(grid, std::move(v), time);
    double defect = std::abs(norm(f) - 1.0);
    if (defect > 1e-6)
        throw PacketTooWide("harmonic_eigenstate: grid too small for n = " + std::to_string(n) +
                            " (norm defect " + std::to_string(defect) + ")");
    return normalized(std::move(f));
}

TwoParticleField product_state(const WavefunctionField& psi1, const WavefunctionField& psi2) {
    CVec v(psi1.grid.n * psi2.grid.n);
    for (std::size_t i1 = 0; i1 < psi1.grid.n; ++i1)
        for (std::size_t i2 = 0; i2 < psi2.grid.n; ++i2)
            v[i1 * psi2.grid.n + i2] = psi1.values[i1] * psi2.values[i2];
    bool both = psi1.normalized && psi2.normalized;
    return TwoParticleField(psi1.grid, psi2.grid, std::move(v), psi1.time, both);
}

TwoParticleField entangled_gaussian(const Grid1D& g1, const Grid1D& g2,
                                    double center1, double center2,
                                    double sigma_plus, double sigma_minus,
                                    double p1, double p2, double time) {
    double sigma_wide = std::max(sigma_plus, sigma_minus);
    check_packet_geometry(g1, center1, sigma_wide, "entangled_gaussian x1");
    check_packet_geometry(g2, center2, sigma_wide, "entangled_gaussian x2");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CVec v(g1.n * g2.n);
    for (std::size_t i1 = 0; i1 < g1.n; ++i1) {
        double d1 = g1.x(i1) - center1;
        for (std::size_t i2 = 0; i2 < g2.n; ++i2) {
            double d2 = g2.x(i2) - center2;
            double u = (d1 + d2) * inv_sqrt2;
            double w = (d1 - d2) * inv_sqrt2;
            double gauss = -u * u / (4.0 * sigma_plus * sigma_plus) -
                           w * w / (4.0 * sigma_minus * sigma_minus);
            double phase = p1 * g1.x(i1) + p2 * g2.x(i2);
            v[i1 * g2.n + i2] = std::exp(Complex(gauss, phase));
        }
    }
    return normalized(TwoParticleField(g1, g2, std::move(v), time));
}

TwoParticleField swap_particles(const TwoParticleField& Psi) {
    CVec v(Psi.values.size());
    for (std::size_t i1 = 0; i1 < Psi.grid1.n; ++i1)
        for (std::size_t i2 = 0; i2 < Psi.grid2.n; ++i2)
            v[i2 * Psi.grid1.n + i1] = Psi.values[i1 * Psi.grid2.n + i2];
    return TwoParticleField(Psi.grid2, Psi.grid1, std::move(v), Psi.time, Psi.normalized);
}

SpinorField dirac_packet(const Grid1D& grid, double center, double momentum,
                         double width, double mass, int energy_sign, double time) {
    check_packet_geometry(grid, center, width, "dirac_packet");
    if (energy_sign != 1 && energy_sign != -1)
        throw ConfigError("dirac_packet: energy_sign must be +1 or -1");
    // Build the Gaussian envelope in k-space and attach the exact eigenspinor
    // of H(k) = [[m, ik], [-ik, -m]] for the requested branch.
    CVec envelope(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        double x = grid.x(i);
        double arg = (x - center) / (2.0 * width);
        envelope[i] = std::exp(Complex(-arg * arg, momentum * x));
    }
    fft_forward(envelope);
    RVec ks = wavenumbers(grid.n, grid.spacing);
    CVec up(grid.n), lo(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        double k = ks[i];
        double E = std::sqrt(k * k + mass * mass);
        // Positive branch: u(k) = (E+m, -ik)^T / sqrt(2E(E+m)).
        // Negative branch: v(k) = (ik, E+m)^T / sqrt(2E(E+m)).
        double denom = std::sqrt(2.0 * E * (E + mass));
        Complex c_up, c_lo;
        if (energy_sign > 0) {
            c_up = Complex(E + mass, 0.0) / denom;
            c_lo = Complex(0.0, -k) / denom;
        } else {
            c_up = Complex(0.0, k) / denom;
            c_lo = Complex(E + mass, 0.0) / denom;
        }
        up[i] = envelope[i] * c_up;
        lo[i] = envelope[i] * c_lo;
    }
    fft_inverse(up);
    fft_inverse(lo);
    return normalized(SpinorField(grid, std::move(up), std::move(lo), time));
}

double position_mean(const WavefunctionField& f) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.grid.n; ++i) {
        double w = std::norm(f.values[i]);
        num += w * f.grid.x(i);
        den += w;
    }
    if (den <= 0.0) throw StructuralError("position_mean: zero field");
    return num / den;
}

double position_variance(const WavefunctionField& f) {
    double mean = position_mean(f);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.grid.n; ++i) {
        double w = std::norm(f.values[i]);
        double d = f.grid.x(i) - mean;
        num += w * d * d;
        den += w;
    }
    return num / den;
}

double position_mean(const SpinorField& f) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.grid.n; ++i) {
        double w = std::norm(f.upper[i]) + std::norm(f.lower[i]);
        num += w * f.grid.x(i);
        den += w;
    }
    if (den <= 0.0) throw StructuralError("position_mean: zero spinor");
    return num / den;
}

namespace {
double edge_max(const CVec& v, std::size_t n, std::size_t margin) {
    double m = 0.0;
    for (std::size_t i = 0; i < margin && i < n; ++i) {
        m = std::max(m, std::abs(v[i]));
        m = std::max(m, std::abs(v[n - 1 - i]));
    }
    return m;
}
} // namespace

double boundary_magnitude(const WavefunctionField& f, std::size_t margin_cells) {
    return edge_max(f.values, f.grid.n, margin_cells);
}

double boundary_magnitude(const TwoParticleField& f, std::size_t margin_cells) {
    double m = 0.0;
    // rows near the x1 edges
    for (std::size_t i1 = 0; i1 < margin_cells && i1 < f.grid1.n; ++i1)
        for (std::size_t i2 = 0; i2 < f.grid2.n; ++i2) {
            m = std::max(m, std::abs(f.at(i1, i2)));
            m = std::max(m, std::abs(f.at(f.grid1.n - 1 - i1, i2)));
        }
    // columns near the x2 edges
    for (std::size_t i2 = 0; i2 < margin_cells && i2 < f.grid2.n; ++i2)
        for (std::size_t i1 = 0; i1 < f.grid1.n; ++i1) {
            m = std::max(m, std::abs(f.at(i1, i2)));
            m = std::max(m, std::abs(f.at(i1, f.grid2.n - 1 - i2)));
        }
    return m;
}

double boundary_magnitude(const SpinorField& f, std::size_t margin_cells) {
    return std::max(edge_max(f.upper, f.grid.n, margin_cells),
                    edge_max(f.lower, f.grid.n, margin_cells));
}

} // namespace csbohm
