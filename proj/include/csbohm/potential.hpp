#ifndef CSBOHM_POTENTIAL_HPP
#define CSBOHM_POTENTIAL_HPP

#include <functional>
#include <string>

#include "csbohm/grid.hpp"

namespace csbohm {

/// Real scalar potential V(x, t). The split-step propagator samples it at the
/// midpoint of each step, so time dependence is allowed but must be bounded.
using Potential = std::function<double(double x, double t)>;

Potential free_potential();
Potential harmonic_potential(double omega = 1.0);
/// Rectangular barrier of the given height and full width, centered at `center`.
Potential barrier_potential(double height, double width, double center = 0.0);
/// -strength * |x - center| while t_on <= t < t_off, zero otherwise. The
/// outward force splits a centered packet into two branches.
Potential separating_kick(double strength, double t_on, double t_off, double center = 0.0);

/// Builds one of the named potentials from flat key/value parameters.
/// Recognized kinds: "free", "harmonic", "barrier", "separating_kick".
Potential make_potential(const std::string& kind,
                         const std::function<double(const std::string&, double)>& param);

} // namespace csbohm

#endif
