#ifndef CSBOHM_GRID_HPP
#define CSBOHM_GRID_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "csbohm/errors.hpp"

namespace csbohm {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;
using RVec = std::vector<double>;

inline constexpr Complex I{0.0, 1.0};

/// Uniform periodic 1D grid. n must be a power of two so every field on it
/// can be moved to wavenumber space and back without padding.
struct Grid1D {
    std::size_t n = 0;
    double spacing = 0.0;
    double origin = 0.0;

    Grid1D() = default;
    Grid1D(std::size_t n_points, double dx, double x0)
        : n(n_points), spacing(dx), origin(x0) {
        if (n == 0 || (n & (n - 1)) != 0)
            throw StructuralError("Grid1D: n_points must be a power of two");
        if (!(spacing > 0.0))
            throw StructuralError("Grid1D: spacing must be positive");
    }

    double x(std::size_t i) const { return origin + static_cast<double>(i) * spacing; }
    double xmax() const { return origin + static_cast<double>(n - 1) * spacing; }
    double length() const { return static_cast<double>(n) * spacing; } // periodic extent

    bool operator==(const Grid1D& o) const {
        return n == o.n && spacing == o.spacing && origin == o.origin;
    }
    bool operator!=(const Grid1D& o) const { return !(*this == o); }
};

inline void require_same_grid(const Grid1D& a, const Grid1D& b, const char* where) {
    if (a != b) throw GridMismatch(std::string(where) + ": grid mismatch");
}

} // namespace csbohm

#endif
