#include "csbohm/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csbohm/errors.hpp"
#include "csbohm/fft.hpp"

namespace csbohm {

template <class Field>
std::vector<std::pair<std::size_t, std::size_t>>
aligned_snapshots(const EvolutionRecordT<Field>& a, const EvolutionRecordT<Field>& b) {
    if (a.snapshots.size() != b.snapshots.size())
        throw StructuralError("aligned_snapshots: records hold different snapshot counts");
    auto order = [](const EvolutionRecordT<Field>& r) {
        std::vector<std::size_t> idx(r.snapshots.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t p, std::size_t q) {
            return r.snapshots[p].time < r.snapshots[q].time;
        });
        return idx;
    };
    auto oa = order(a), ob = order(b);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(oa.size());
    for (std::size_t m = 0; m < oa.size(); ++m) {
        if (std::abs(a.snapshots[oa[m]].time - b.snapshots[ob[m]].time) > 1e-9)
            throw StructuralError("aligned_snapshots: records cover different snapshot times");
        out.emplace_back(oa[m], ob[m]);
    }
    return out;
}

template std::vector<std::pair<std::size_t, std::size_t>>
aligned_snapshots(const EvolutionRecord&, const EvolutionRecord&);
template std::vector<std::pair<std::size_t, std::size_t>>
aligned_snapshots(const TwoParticleRecord&, const TwoParticleRecord&);
template std::vector<std::pair<std::size_t, std::size_t>>
aligned_snapshots(const SpinorRecord&, const SpinorRecord&);

namespace {

// Number of steps implied by the window; throws on inconsistent signs or a
// non-integral quotient.
std::size_t step_count(double t_start, double t_end, double dt, std::size_t stride) {
    double span = t_end - t_start;
    if (span == 0.0) return 0;
    if (dt == 0.0) throw ConfigError("evolve_window: dt is zero over a nonzero window");
    if (span * dt < 0.0)
        throw ConfigError("evolve_window: dt sign opposes the window direction");
    double q = span / dt;
    auto n = static_cast<std::size_t>(std::llround(q));
    if (n == 0 || std::abs(q - static_cast<double>(n)) > 1e-9 * std::max(1.0, std::abs(q)))
        throw ConfigError("evolve_window: window is not a whole number of steps");
    if (stride == 0 || n % stride != 0)
        throw ConfigError("evolve_window: stride must divide the step count");
    return n;
}

template <class Field, class Step>
EvolutionRecordT<Field> run_window(const Field& f0, double t_end, double dt,
                                   std::size_t stride, Step step) {
    EvolutionRecordT<Field> rec;
    rec.dt = dt;
    rec.direction = (t_end < f0.time) ? Direction::backward : Direction::forward;
    std::size_t n = step_count(f0.time, t_end, dt, stride);
    rec.snapshots.reserve(n / std::max<std::size_t>(stride, 1) + 1);
    rec.snapshots.push_back(f0);
    rec.leak_max = boundary_magnitude(f0);
    Field cur = f0;
    for (std::size_t s = 1; s <= n; ++s) {
        cur = step(cur);
        double leak = boundary_magnitude(cur);
        if (leak > rec.leak_max) rec.leak_max = leak;
        if (s % stride == 0) rec.snapshots.push_back(cur);
    }
    rec.leak_warning = rec.leak_max > kLeakThreshold;
    return rec;
}

} // namespace

WavefunctionField schrodinger_step(const WavefunctionField& psi, const Potential& V, double dt) {
    if (dt == 0.0) throw ConfigError("schrodinger_step: dt is zero");
    const Grid1D& g = psi.grid;
    double t_mid = psi.time + 0.5 * dt;
    CVec v = psi.values;
    for (std::size_t i = 0; i < g.n; ++i)
        v[i] *= std::exp(Complex(0.0, -0.5 * dt * V(g.x(i), t_mid)));
    fft_forward(v);
    RVec ks = wavenumbers(g.n, g.spacing);
    for (std::size_t i = 0; i < g.n; ++i)
        v[i] *= std::exp(Complex(0.0, -0.5 * dt * ks[i] * ks[i]));
    fft_inverse(v);
    for (std::size_t i = 0; i < g.n; ++i)
        v[i] *= std::exp(Complex(0.0, -0.5 * dt * V(g.x(i), t_mid)));
    return WavefunctionField(g, std::move(v), psi.time + dt, psi.normalized);
}

TwoParticleField two_particle_step(const TwoParticleField& Psi, const Potential2& V, double dt) {
    if (dt == 0.0) throw ConfigError("two_particle_step: dt is zero");
    const Grid1D& g1 = Psi.grid1;
    const Grid1D& g2 = Psi.grid2;
    double t_mid = Psi.time + 0.5 * dt;
    CVec v = Psi.values;
    for (std::size_t i1 = 0; i1 < g1.n; ++i1)
        for (std::size_t i2 = 0; i2 < g2.n; ++i2)
            v[i1 * g2.n + i2] *= std::exp(Complex(0.0, -0.5 * dt * V(g1.x(i1), g2.x(i2), t_mid)));
    fft2_forward(v, g1.n, g2.n);
    RVec k1 = wavenumbers(g1.n, g1.spacing);
    RVec k2 = wavenumbers(g2.n, g2.spacing);
    for (std::size_t i1 = 0; i1 < g1.n; ++i1)
        for (std::size_t i2 = 0; i2 < g2.n; ++i2)
            v[i1 * g2.n + i2] *=
                std::exp(Complex(0.0, -0.5 * dt * (k1[i1] * k1[i1] + k2[i2] * k2[i2])));
    fft2_inverse(v, g1.n, g2.n);
    for (std::size_t i1 = 0; i1 < g1.n; ++i1)
        for (std::size_t i2 = 0; i2 < g2.n; ++i2)
            v[i1 * g2.n + i2] *= std::exp(Complex(0.0, -0.5 * dt * V(g1.x(i1), g2.x(i2), t_mid)));
    return TwoParticleField(g1, g2, std::move(v), Psi.time + dt, Psi.normalized);
}

SpinorField dirac_step(const SpinorField& psi, double mass, double dt) {
    if (dt == 0.0) throw ConfigError("dirac_step: dt is zero");
    if (mass < 0.0) throw ConfigError("dirac_step: negative mass");
    const Grid1D& g = psi.grid;
    CVec up = psi.upper;
    CVec lo = psi.lower;
    fft_forward(up);
    fft_forward(lo);
    RVec ks = wavenumbers(g.n, g.spacing);
    for (std::size_t i = 0; i < g.n; ++i) {
        // H(k) = [[m, ik], [-ik, -m]]; exp(-iH dt) = cos(E dt) I - i sin(E dt) H/E.
        double k = ks[i];
        double E = std::sqrt(k * k + mass * mass);
        double c = std::cos(E * dt);
        double s = (E > 0.0) ? std::sin(E * dt) / E : dt;
        Complex a = up[i], b = lo[i];
        Complex m00 = Complex(c, -s * mass);
        Complex m01 = Complex(s * k, 0.0);  // -i * (ik) * s
        Complex m10 = Complex(-s * k, 0.0); // -i * (-ik) * s
        Complex m11 = Complex(c, s * mass);
        up[i] = m00 * a + m01 * b;
        lo[i] = m10 * a + m11 * b;
    }
    fft_inverse(up);
    fft_inverse(lo);
    return SpinorField(g, std::move(up), std::move(lo), psi.time + dt, psi.normalized);
}

EvolutionRecord evolve_window(const WavefunctionField& psi0, const Potential& V,
                              double t_end, double dt, std::size_t stride) {
    return run_window(psi0, t_end, dt, stride,
                      [&](const WavefunctionField& f) { return schrodinger_step(f, V, dt); });
}

TwoParticleRecord two_particle_window(const TwoParticleField& Psi0, const Potential2& V,
                                      double t_end, double dt, std::size_t stride) {
    return run_window(Psi0, t_end, dt, stride,
                      [&](const TwoParticleField& f) { return two_particle_step(f, V, dt); });
}

SpinorRecord dirac_window(const SpinorField& psi0, double mass,
                          double t_end, double dt, std::size_t stride) {
    return run_window(psi0, t_end, dt, stride,
                      [&](const SpinorField& f) { return dirac_step(f, mass, dt); });
}

} // namespace csbohm
