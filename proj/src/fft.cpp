#include "csbohm/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace csbohm {

namespace {

// FFTW planning is not thread safe; new-array execution is. Plans carry
// FFTW_UNALIGNED so they accept whatever std::vector hands us.
std::mutex g_plan_mutex;

fftw_plan plan_1d(std::size_t n, int sign) {
    static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    CVec scratch(n);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, plan);
    return plan;
}

fftw_plan plan_2d(std::size_t n1, std::size_t n2, int sign) {
    static std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto key = std::make_tuple(n1, n2, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    CVec scratch(n1 * n2);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(n1), static_cast<int>(n2),
                                      p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, plan);
    return plan;
}

void execute(fftw_plan plan, CVec& data) {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

} // namespace

void fft_forward(CVec& data) {
    execute(plan_1d(data.size(), FFTW_FORWARD), data);
}

void fft_inverse(CVec& data) {
    execute(plan_1d(data.size(), FFTW_BACKWARD), data);
    const double inv = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= inv;
}

void fft2_forward(CVec& data, std::size_t n1, std::size_t n2) {
    execute(plan_2d(n1, n2, FFTW_FORWARD), data);
}

void fft2_inverse(CVec& data, std::size_t n1, std::size_t n2) {
    execute(plan_2d(n1, n2, FFTW_BACKWARD), data);
    const double inv = 1.0 / static_cast<double>(n1 * n2);
    for (auto& v : data) v *= inv;
}

RVec wavenumbers(std::size_t n, double spacing) {
    RVec k(n);
    const double dk = 2.0 * M_PI / (static_cast<double>(n) * spacing);
    for (std::size_t j = 0; j < n; ++j) {
        const auto sj = static_cast<std::ptrdiff_t>(j);
        const auto sn = static_cast<std::ptrdiff_t>(n);
        k[j] = dk * static_cast<double>(sj < sn / 2 ? sj : sj - sn);
    }
    return k;
}

CVec spectral_derivative(const CVec& values, const Grid1D& grid) {
    CVec out = values;
    fft_forward(out);
    const RVec k = wavenumbers(grid.n, grid.spacing);
    for (std::size_t j = 0; j < grid.n; ++j) out[j] *= I * k[j];
    // zero the unmatched Nyquist mode; i*k_nyq has no conjugate partner
    if (grid.n > 1) out[grid.n / 2] = 0.0;
    fft_inverse(out);
    return out;
}

RVec spectral_derivative(const RVec& values, const Grid1D& grid) {
    CVec tmp(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) tmp[j] = values[j];
    tmp = spectral_derivative(tmp, grid);
    RVec out(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) out[j] = tmp[j].real();
    return out;
}

CVec spectral_derivative_axis(const CVec& values, std::size_t n1, std::size_t n2,
                              int axis, double spacing) {
    CVec out(values.size());
    if (axis == 1) {
        Grid1D row{n2, spacing, 0.0};
        CVec scratch(n2);
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            std::copy(values.begin() + i1 * n2, values.begin() + (i1 + 1) * n2, scratch.begin());
            CVec d = spectral_derivative(scratch, row);
            std::copy(d.begin(), d.end(), out.begin() + i1 * n2);
        }
    } else if (axis == 0) {
        Grid1D col{n1, spacing, 0.0};
        CVec scratch(n1);
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
            for (std::size_t i1 = 0; i1 < n1; ++i1) scratch[i1] = values[i1 * n2 + i2];
            CVec d = spectral_derivative(scratch, col);
            for (std::size_t i1 = 0; i1 < n1; ++i1) out[i1 * n2 + i2] = d[i1];
        }
    } else {
        throw std::invalid_argument("spectral_derivative_axis: axis must be 0 or 1");
    }
    return out;
}

} // namespace csbohm
