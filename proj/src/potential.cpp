#include "csbohm/potential.hpp"

#include <cmath>

#include "csbohm/errors.hpp"

namespace csbohm {

Potential free_potential() {
    return [](double, double) { return 0.0; };
}

Potential harmonic_potential(double omega) {
    return [omega](double x, double) { return 0.5 * omega * omega * x * x; };
}

Potential barrier_potential(double height, double width, double center) {
    double half = 0.5 * width;
    return [height, half, center](double x, double) {
        return std::abs(x - center) <= half ? height : 0.0;
    };
}

Potential separating_kick(double strength, double t_on, double t_off, double center) {
    if (t_off <= t_on) throw ConfigError("separating_kick: t_off must exceed t_on");
    return [strength, t_on, t_off, center](double x, double t) {
        if (t < t_on || t >= t_off) return 0.0;
        return -strength * std::abs(x - center);
    };
}

Potential make_potential(const std::string& kind,
                         const std::function<double(const std::string&, double)>& param) {
    if (kind == "free") return free_potential();
    if (kind == "harmonic") return harmonic_potential(param("omega", 1.0));
    if (kind == "barrier")
        return barrier_potential(param("height", 1.0), param("width", 1.0), param("center", 0.0));
    if (kind == "separating_kick")
        return separating_kick(param("strength", 1.0), param("t_on", 0.0),
                               param("t_off", 1.0), param("center", 0.0));
    throw ConfigError("make_potential: unknown kind '" + kind + "'");
}

} // namespace csbohm
