#ifndef CSBOHM_GUIDANCE_HPP
#define CSBOHM_GUIDANCE_HPP

#include <vector>

#include "csbohm/field.hpp"
#include "csbohm/propagator.hpp"

namespace csbohm {

enum class GuidanceModel { standard, symmetric };

/// How the amplitude enters the symmetric fields: divide by the complex a
/// (the default) or by Re(a) only.
enum class Normalization { complex_amplitude, real_part };

/// Velocity-undefined threshold as a fraction of max|rho| on the slice.
inline constexpr double kEpsilonTurnRel = 1e-12;

/// Density / current / velocity on one time slice. The symmetric density is
/// signed; velocity is meaningless where |density| falls below eps_turn and
/// the `defined` mask says so.
struct GuidanceField {
    Grid1D grid;
    RVec density;
    RVec current;
    RVec velocity;
    std::vector<bool> defined;
    double time = 0.0;
    GuidanceModel model = GuidanceModel::standard;
    double eps_turn = 0.0;
    /// Negative mass fraction of the slice: integral of max(0,-rho) over
    /// integral of |rho|. Zero for the standard model.
    double negativity_fraction = 0.0;
};

enum class CausalCharacter { timelike, spacelike, lightlike };

/// Dirac 4-current slice: j0, j1 signed; rho0 = |j_nu j^nu|^{1/2}; 4-velocity
/// u = j / rho0 where rho0 clears eps_turn.
struct DiracGuidance {
    Grid1D grid;
    RVec j0;
    RVec j1;
    RVec rho0;
    RVec u0;
    RVec u1;
    std::vector<bool> defined;
    std::vector<CausalCharacter> character;
    double time = 0.0;
    double eps_turn = 0.0;
};

/// Standard Bohm fields: rho = |psi|^2, v = Im(psi* dpsi/dx)/|psi|^2.
GuidanceField bohm_velocity(const WavefunctionField& psi);

/// Causally symmetric fields built from the pair:
///   rho = Re[(1/a) psi_f* psi_i]
///   j   = Re[(1/2ia)(psi_f* dpsi_i - (dpsi_f)* psi_i)]
///   v   = j / rho where |rho| >= eps_turn.
GuidanceField symmetric_fields(const WavefunctionField& psi_i, const WavefunctionField& psi_f,
                               const Amplitude& a,
                               Normalization norm = Normalization::complex_amplitude);

/// Index of the snapshot in `rec` whose time tag matches t within 1e-9.
template <class Field>
std::size_t snapshot_at_time(const EvolutionRecordT<Field>& rec, double t) {
    for (std::size_t i = 0; i < rec.snapshots.size(); ++i)
        if (std::abs(rec.snapshots[i].time - t) <= 1e-9) return i;
    throw StructuralError("snapshot_at_time: no snapshot at requested time");
}

/// RMS of the discrete continuity residual d(rho)/dt + d(j)/dx at every
/// interior snapshot time, time derivative centered across neighbors.
/// Records must cover the same times (forward and backward order both fine).
std::vector<double> continuity_residual(const EvolutionRecord& rec_i,
                                        const EvolutionRecord& rec_f, const Amplitude& a,
                                        Normalization norm = Normalization::complex_amplitude);

/// Same residual on the complex product psi_f* psi_i before taking Re[1/a .];
/// vanishes at second order for ANY two independent solutions.
std::vector<double> continuity_residual_complex(const EvolutionRecord& rec_i,
                                                const EvolutionRecord& rec_f);

/// Contraction of a two-particle state with particle 1's final wavefunction:
/// psi(x2) = (1/N) integral psi_f1*(x1) Psi_i(x1,x2) dx1, N the L2 norm of
/// the integral. Throws DegenerateReduction when N is negligible.
WavefunctionField reduce_final(const TwoParticleField& Psi_i, const WavefunctionField& psi_f1);

/// Single-particle symmetric fields for particle `which` (1 or 2) of a pair,
/// with the other coordinate integrated out of numerator and denominator.
GuidanceField many_body_velocity(const TwoParticleField& Psi_i, const TwoParticleField& Psi_f,
                                 const Amplitude& a, int which);

/// The signed marginal density alone (denominator field of the velocity).
RVec many_body_density(const TwoParticleField& Psi_i, const TwoParticleField& Psi_f,
                       const Amplitude& a, int which);

/// Dirac sector: j^nu = Re[(1/a) psibar_f gamma^nu psi_i], rest density and
/// 4-velocity, causal character per point.
DiracGuidance dirac_guidance(const SpinorField& psi_i, const SpinorField& psi_f,
                             const Amplitude& a);

/// RMS of the discrete 4-current conservation residual d(j0)/dt + d(j1)/dx
/// per interior snapshot time.
std::vector<double> dirac_continuity_residual(const SpinorRecord& rec_i,
                                              const SpinorRecord& rec_f, const Amplitude& a);

} // namespace csbohm

#endif
