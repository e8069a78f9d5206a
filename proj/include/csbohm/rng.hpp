#ifndef CSBOHM_RNG_HPP
#define CSBOHM_RNG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace csbohm {

/// Deterministic RNG wrapper. Distribution code is hand-rolled so identical
/// seeds give identical streams on any standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (no cached spare, fully deterministic).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Index in [0, n) from the discrete CDF table (cdf.back() is the total).
    std::size_t pick(const std::vector<double>& cdf) {
        const double u = uniform() * cdf.back();
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        auto idx = static_cast<std::size_t>(it - cdf.begin());
        return idx < cdf.size() ? idx : cdf.size() - 1;
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace csbohm

#endif
