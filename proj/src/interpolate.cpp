#include "csbohm/interpolate.hpp"

#include <algorithm>
#include <cmath>

#include "csbohm/fft.hpp"

namespace csbohm {

namespace {

// Periodic Catmull-Rom through the sampled values; u in grid units, already
// wrapped into [0, n).
double catmull_rom(const RVec& p, std::size_t n, double u) {
    const double fi = std::floor(u);
    const double s = u - fi;
    const std::size_t i1 = static_cast<std::size_t>(fi) % n;
    const std::size_t i0 = (i1 + n - 1) % n;
    const std::size_t i2 = (i1 + 1) % n;
    const std::size_t i3 = (i1 + 2) % n;
    const double p0 = p[i0], p1 = p[i1], p2 = p[i2], p3 = p[i3];
    return 0.5 * (2.0 * p1 +
                  s * (p2 - p0 +
                       s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                            s * (3.0 * (p1 - p2) + p3 - p0))));
}

// Band-limited evaluation from the DFT coefficients of a real field.
double trig_eval(const CVec& c, const Grid1D& g, double x) {
    const std::size_t n = g.n;
    const double xi = x - g.origin;
    const double dk = 2.0 * M_PI / g.length();
    const Complex rot(std::cos(dk * xi), std::sin(dk * xi));
    Complex acc = c[0];
    Complex phase = rot;
    for (std::size_t j = 1; j < n / 2; ++j) {
        acc += 2.0 * (c[j] * phase);
        phase *= rot;
    }
    acc += c[n / 2] * std::cos(0.5 * static_cast<double>(n) * dk * xi);
    return acc.real() / static_cast<double>(n);
}

double wrap_units(double x, const Grid1D& g) {
    double u = (x - g.origin) / g.spacing;
    const double n = static_cast<double>(g.n);
    u -= n * std::floor(u / n);
    if (u >= n) u = 0.0; // floor rounding at the seam
    return u;
}

CVec dft_of(const RVec& values) {
    CVec c(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) c[i] = values[i];
    fft_forward(c);
    return c;
}

// Index m with times[m] <= t <= times[m+1]; t must be clamped already.
std::size_t bracket(const std::vector<double>& times, double t) {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    if (hi == 0) return 0;
    if (hi >= times.size()) return times.size() - 2;
    return hi - 1;
}

double clamp_time(const std::vector<double>& times, double t, const char* where) {
    const double span = times.back() - times.front();
    const double tol = 1e-9 * (1.0 + std::abs(span));
    if (t < times.front() - tol || t > times.back() + tol)
        throw LeftTimeWindow(std::string(where) + ": query time outside the record window");
    return std::clamp(t, times.front(), times.back());
}

} // namespace

FieldInterpolator::FieldInterpolator(const EvolutionRecord& rec_i, const EvolutionRecord& rec_f,
                                     const Amplitude& a, SpaceInterp mode, Normalization norm)
    : mode_(mode), model_(GuidanceModel::symmetric) {
    const auto pairs = aligned_snapshots(rec_i, rec_f);
    slices_.reserve(pairs.size());
    for (const auto& [ii, fi] : pairs) {
        slices_.push_back(symmetric_fields(rec_i.snapshots[ii], rec_f.snapshots[fi], a, norm));
        times_.push_back(slices_.back().time);
    }
    finalize();
}

FieldInterpolator::FieldInterpolator(const EvolutionRecord& rec, SpaceInterp mode)
    : mode_(mode), model_(GuidanceModel::standard) {
    std::vector<std::size_t> order(rec.snapshots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
        return rec.snapshots[p].time < rec.snapshots[q].time;
    });
    slices_.reserve(order.size());
    for (std::size_t i : order) {
        slices_.push_back(bohm_velocity(rec.snapshots[i]));
        times_.push_back(slices_.back().time);
    }
    finalize();
}

void FieldInterpolator::finalize() {
    if (slices_.empty()) throw StructuralError("FieldInterpolator: empty record");
    grid_ = slices_.front().grid;
    for (std::size_t m = 0; m + 1 < times_.size(); ++m)
        gap_ = std::max(gap_, times_[m + 1] - times_[m]);
    for (const auto& s : slices_) eps_turn_ = std::max(eps_turn_, s.eps_turn);
    if (mode_ == SpaceInterp::spectral) {
        rho_hat_.reserve(slices_.size());
        j_hat_.reserve(slices_.size());
        for (const auto& s : slices_) {
            rho_hat_.push_back(dft_of(s.density));
            j_hat_.push_back(dft_of(s.current));
        }
    }
}

double FieldInterpolator::eval(const RVec& values, const CVec& coeffs, double x) const {
    if (mode_ == SpaceInterp::spectral) return trig_eval(coeffs, grid_, x);
    return catmull_rom(values, grid_.n, wrap_units(x, grid_));
}

FlowSample FieldInterpolator::sample(double t, double x) const {
    static const CVec kNoCoeffs;
    FlowSample out;
    if (slices_.size() == 1) {
        (void)clamp_time(times_, t, "FieldInterpolator::sample");
        const auto& s = slices_.front();
        out.rho = eval(s.density, mode_ == SpaceInterp::spectral ? rho_hat_[0] : kNoCoeffs, x);
        out.j = eval(s.current, mode_ == SpaceInterp::spectral ? j_hat_[0] : kNoCoeffs, x);
    } else {
        const double tc = clamp_time(times_, t, "FieldInterpolator::sample");
        const std::size_t m = bracket(times_, tc);
        const double th = (tc - times_[m]) / (times_[m + 1] - times_[m]);
        const auto& s0 = slices_[m];
        const auto& s1 = slices_[m + 1];
        const bool sp = mode_ == SpaceInterp::spectral;
        const double r0 = eval(s0.density, sp ? rho_hat_[m] : kNoCoeffs, x);
        const double r1 = eval(s1.density, sp ? rho_hat_[m + 1] : kNoCoeffs, x);
        const double c0 = eval(s0.current, sp ? j_hat_[m] : kNoCoeffs, x);
        const double c1 = eval(s1.current, sp ? j_hat_[m + 1] : kNoCoeffs, x);
        out.rho = (1.0 - th) * r0 + th * r1;
        out.j = (1.0 - th) * c0 + th * c1;
    }
    out.v_defined = std::abs(out.rho) >= eps_turn_;
    out.v = out.v_defined ? out.j / out.rho : 0.0;
    return out;
}

SpinorInterpolator::SpinorInterpolator(const SpinorRecord& rec_i, const SpinorRecord& rec_f,
                                       const Amplitude& a, SpaceInterp mode)
    : mode_(mode) {
    const auto pairs = aligned_snapshots(rec_i, rec_f);
    slices_.reserve(pairs.size());
    for (const auto& [ii, fi] : pairs) {
        slices_.push_back(dirac_guidance(rec_i.snapshots[ii], rec_f.snapshots[fi], a));
        times_.push_back(slices_.back().time);
    }
    if (slices_.empty()) throw StructuralError("SpinorInterpolator: empty record");
    grid_ = slices_.front().grid;
    for (const auto& s : slices_) eps_turn_ = std::max(eps_turn_, s.eps_turn);
    if (mode_ == SpaceInterp::spectral) {
        j0_hat_.reserve(slices_.size());
        j1_hat_.reserve(slices_.size());
        for (const auto& s : slices_) {
            j0_hat_.push_back(dft_of(s.j0));
            j1_hat_.push_back(dft_of(s.j1));
        }
    }
}

double SpinorInterpolator::eval(const RVec& values, const CVec& coeffs, double x) const {
    if (mode_ == SpaceInterp::spectral) return trig_eval(coeffs, grid_, x);
    return catmull_rom(values, grid_.n, wrap_units(x, grid_));
}

DiracSample SpinorInterpolator::sample(double t, double x) const {
    static const CVec kNoCoeffs;
    DiracSample out;
    const bool sp = mode_ == SpaceInterp::spectral;
    if (slices_.size() == 1) {
        (void)clamp_time(times_, t, "SpinorInterpolator::sample");
        const auto& s = slices_.front();
        out.j0 = eval(s.j0, sp ? j0_hat_[0] : kNoCoeffs, x);
        out.j1 = eval(s.j1, sp ? j1_hat_[0] : kNoCoeffs, x);
    } else {
        const double tc = clamp_time(times_, t, "SpinorInterpolator::sample");
        const std::size_t m = bracket(times_, tc);
        const double th = (tc - times_[m]) / (times_[m + 1] - times_[m]);
        out.j0 = (1.0 - th) * eval(slices_[m].j0, sp ? j0_hat_[m] : kNoCoeffs, x) +
                 th * eval(slices_[m + 1].j0, sp ? j0_hat_[m + 1] : kNoCoeffs, x);
        out.j1 = (1.0 - th) * eval(slices_[m].j1, sp ? j1_hat_[m] : kNoCoeffs, x) +
                 th * eval(slices_[m + 1].j1, sp ? j1_hat_[m + 1] : kNoCoeffs, x);
    }
    out.rho0 = std::sqrt(std::abs(out.j0 * out.j0 - out.j1 * out.j1));
    out.u_defined = out.rho0 >= eps_turn_;
    if (out.u_defined) {
        out.u0 = out.j0 / out.rho0;
        out.u1 = out.j1 / out.rho0;
    }
    return out;
}

} // namespace csbohm
