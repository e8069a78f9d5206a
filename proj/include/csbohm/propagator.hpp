#ifndef CSBOHM_PROPAGATOR_HPP
#define CSBOHM_PROPAGATOR_HPP

#include <functional>
#include <vector>

#include "csbohm/field.hpp"
#include "csbohm/potential.hpp"

namespace csbohm {

/// Boundary amplitudes above this trigger a leak warning on the record.
inline constexpr double kLeakThreshold = 1e-12;

enum class Direction { forward, backward };

/// Snapshot sequence in generation order: time tags increase for forward
/// runs and decrease for backward ones.
template <class Field>
struct EvolutionRecordT {
    std::vector<Field> snapshots;
    double dt = 0.0; // signed step
    Direction direction = Direction::forward;
    double leak_max = 0.0;
    bool leak_warning = false;

    double t_start() const { return snapshots.front().time; }
    double t_end() const { return snapshots.back().time; }
};

using EvolutionRecord = EvolutionRecordT<WavefunctionField>;
using TwoParticleRecord = EvolutionRecordT<TwoParticleField>;
using SpinorRecord = EvolutionRecordT<SpinorField>;

/// Ascending-time pairing (index into a, index into b) of two records that
/// must cover the same snapshot times, in whichever order each stores them.
template <class Field>
std::vector<std::pair<std::size_t, std::size_t>>
aligned_snapshots(const EvolutionRecordT<Field>& a, const EvolutionRecordT<Field>& b);

/// Two-particle potential V(x1, x2, t), real-valued.
using Potential2 = std::function<double(double x1, double x2, double t)>;

inline Potential2 free_potential2() {
    return [](double, double, double) { return 0.0; };
}

/// One Strang split step: half-kick, spectral drift, half-kick. dt < 0
/// evolves toward the past. V is sampled at the step midpoint.
WavefunctionField schrodinger_step(const WavefunctionField& psi, const Potential& V, double dt);

TwoParticleField two_particle_step(const TwoParticleField& Psi, const Potential2& V, double dt);

/// Free Dirac step: exact per-wavenumber exponential of H(k), either sign of dt.
SpinorField dirac_step(const SpinorField& psi, double mass, double dt);

/// March from psi0.time (= t_start) to t_end in steps of |dt|, keeping every
/// `stride`-th snapshot plus both endpoints. t_end == t_start gives a single
/// snapshot. (t_end - t_start) / dt must be a whole number of steps and
/// stride must divide it.
EvolutionRecord evolve_window(const WavefunctionField& psi0, const Potential& V,
                              double t_end, double dt, std::size_t stride = 1);

TwoParticleRecord two_particle_window(const TwoParticleField& Psi0, const Potential2& V,
                                      double t_end, double dt, std::size_t stride = 1);

SpinorRecord dirac_window(const SpinorField& psi0, double mass,
                          double t_end, double dt, std::size_t stride = 1);

} // namespace csbohm

#endif
