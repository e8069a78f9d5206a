#include "csbohm/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csbohm/errors.hpp"
#include "csbohm/fft.hpp"

namespace csbohm {

namespace {

double negativity(const RVec& rho) {
    double neg = 0.0, tot = 0.0;
    for (double r : rho) {
        if (r < 0.0) neg -= r;
        tot += std::abs(r);
    }
    return tot > 0.0 ? neg / tot : 0.0;
}

void finish_velocity(GuidanceField& g) {
    double rho_max = 0.0;
    for (double r : g.density) rho_max = std::max(rho_max, std::abs(r));
    g.eps_turn = kEpsilonTurnRel * rho_max;
    g.velocity.assign(g.density.size(), 0.0);
    g.defined.assign(g.density.size(), false);
    for (std::size_t i = 0; i < g.density.size(); ++i) {
        if (std::abs(g.density[i]) >= g.eps_turn && g.eps_turn > 0.0) {
            g.velocity[i] = g.current[i] / g.density[i];
            g.defined[i] = true;
        }
    }
    g.negativity_fraction = negativity(g.density);
}

// Normalizing factor applied to the complex bilinears: 1/a or 1/Re(a).
Complex normalizer(const Amplitude& a, Normalization norm) {
    if (norm == Normalization::real_part) {
        double re = a.value.real();
        if (std::abs(re) <= kEpsilonDegenerate)
            throw DegenerateOverlap("symmetric_fields: Re(a) negligible under real-part normalization");
        return Complex(1.0 / re, 0.0);
    }
    if (std::abs(a.value) <= kEpsilonDegenerate)
        throw DegenerateOverlap("symmetric_fields: |a| negligible");
    return 1.0 / a.value;
}

void require_paired(const WavefunctionField& psi_i, const WavefunctionField& psi_f,
                    const char* where) {
    require_same_grid(psi_i.grid, psi_f.grid, where);
    if (std::abs(psi_i.time - psi_f.time) > 1e-9)
        throw StructuralError(std::string(where) + ": time tags differ");
}

// The slice bilinears: q = psi_f* psi_i and the symmetrized flux
// w = (1/2i)(psi_f* dpsi_i - (dpsi_f)* psi_i), both before amplitude division.
void slice_bilinears(const WavefunctionField& psi_i, const WavefunctionField& psi_f,
                     CVec& q, CVec& w) {
    const Grid1D& g = psi_i.grid;
    CVec di = spectral_derivative(psi_i.values, g);
    CVec df = spectral_derivative(psi_f.values, g);
    q.resize(g.n);
    w.resize(g.n);
    const Complex half_over_i = Complex(0.0, -0.5); // 1/(2i)
    for (std::size_t x = 0; x < g.n; ++x) {
        Complex f = psi_f.values[x];
        q[x] = std::conj(f) * psi_i.values[x];
        w[x] = half_over_i *
               (std::conj(f) * di[x] - std::conj(df[x]) * psi_i.values[x]);
    }
}

template <class SliceQ, class SliceF, class Residual>
std::vector<double> residual_series(std::size_t count, const std::vector<double>& times,
                                    SliceQ density_at, SliceF flux_at, Residual combine) {
    if (count < 3)
        throw StructuralError("continuity_residual: need at least 3 snapshots");
    std::vector<double> out;
    out.reserve(count - 2);
    for (std::size_t m = 1; m + 1 < count; ++m) {
        double dt2 = times[m + 1] - times[m - 1];
        out.push_back(combine(density_at(m - 1), density_at(m + 1), flux_at(m), dt2));
    }
    return out;
}

} // namespace

GuidanceField bohm_velocity(const WavefunctionField& psi) {
    const Grid1D& g = psi.grid;
    GuidanceField out;
    out.grid = g;
    out.time = psi.time;
    out.model = GuidanceModel::standard;
    out.density.resize(g.n);
    out.current.resize(g.n);
    CVec d = spectral_derivative(psi.values, g);
    for (std::size_t i = 0; i < g.n; ++i) {
        out.density[i] = std::norm(psi.values[i]);
        out.current[i] = (std::conj(psi.values[i]) * d[i]).imag();
    }
    finish_velocity(out);
    out.negativity_fraction = 0.0;
    return out;
}

GuidanceField symmetric_fields(const WavefunctionField& psi_i, const WavefunctionField& psi_f,
                               const Amplitude& a, Normalization norm) {
    require_paired(psi_i, psi_f, "symmetric_fields");
    Complex inv_a = normalizer(a, norm);
    CVec q, w;
    slice_bilinears(psi_i, psi_f, q, w);
    GuidanceField out;
    out.grid = psi_i.grid;
    out.time = psi_i.time;
    out.model = GuidanceModel::symmetric;
    out.density.resize(q.size());
    out.current.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        out.density[i] = (inv_a * q[i]).real();
        out.current[i] = (inv_a * w[i]).real();
    }
    finish_velocity(out);
    return out;
}

std::vector<double> continuity_residual(const EvolutionRecord& rec_i,
                                        const EvolutionRecord& rec_f, const Amplitude& a,
                                        Normalization norm) {
    Complex inv_a = normalizer(a, norm);
    const auto pairs = aligned_snapshots(rec_i, rec_f);
    const Grid1D g = rec_i.snapshots.front().grid;
    std::vector<double> times;
    for (const auto& [ii, fi] : pairs) times.push_back(rec_i.snapshots[ii].time);

    auto fields_at = [&](std::size_t m, CVec& q, CVec& w) {
        const auto& [ii, fi] = pairs[m];
        require_paired(rec_i.snapshots[ii], rec_f.snapshots[fi], "continuity_residual");
        slice_bilinears(rec_i.snapshots[ii], rec_f.snapshots[fi], q, w);
    };
    auto rho_at = [&](std::size_t m) {
        CVec q, w;
        fields_at(m, q, w);
        RVec rho(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) rho[i] = (inv_a * q[i]).real();
        return rho;
    };
    auto dj_at = [&](std::size_t m) {
        CVec q, w;
        fields_at(m, q, w);
        RVec j(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) j[i] = (inv_a * w[i]).real();
        return spectral_derivative(j, g);
    };
    return residual_series(
        pairs.size(), times, rho_at, dj_at,
        [](const RVec& prev, const RVec& next, const RVec& dj, double dt2) {
            double acc = 0.0;
            for (std::size_t i = 0; i < dj.size(); ++i) {
                double r = (next[i] - prev[i]) / dt2 + dj[i];
                acc += r * r;
            }
            return std::sqrt(acc / static_cast<double>(dj.size()));
        });
}

std::vector<double> continuity_residual_complex(const EvolutionRecord& rec_i,
                                                const EvolutionRecord& rec_f) {
    const auto pairs = aligned_snapshots(rec_i, rec_f);
    const Grid1D g = rec_i.snapshots.front().grid;
    std::vector<double> times;
    for (const auto& [ii, fi] : pairs) times.push_back(rec_i.snapshots[ii].time);

    auto q_at = [&](std::size_t m) {
        CVec q, w;
        slice_bilinears(rec_i.snapshots[pairs[m].first], rec_f.snapshots[pairs[m].second], q, w);
        return q;
    };
    auto dw_at = [&](std::size_t m) {
        CVec q, w;
        slice_bilinears(rec_i.snapshots[pairs[m].first], rec_f.snapshots[pairs[m].second], q, w);
        return spectral_derivative(w, g);
    };
    return residual_series(
        pairs.size(), times, q_at, dw_at,
        [](const CVec& prev, const CVec& next, const CVec& dw, double dt2) {
            double acc = 0.0;
            for (std::size_t i = 0; i < dw.size(); ++i)
                acc += std::norm((next[i] - prev[i]) / dt2 + dw[i]);
            return std::sqrt(acc / static_cast<double>(dw.size()));
        });
}

WavefunctionField reduce_final(const TwoParticleField& Psi_i, const WavefunctionField& psi_f1) {
    require_same_grid(Psi_i.grid1, psi_f1.grid, "reduce_final");
    const Grid1D& g2 = Psi_i.grid2;
    CVec raw(g2.n, Complex{0.0, 0.0});
    for (std::size_t i1 = 0; i1 < Psi_i.grid1.n; ++i1) {
        Complex cf = std::conj(psi_f1.values[i1]);
        for (std::size_t i2 = 0; i2 < g2.n; ++i2)
            raw[i2] += cf * Psi_i.at(i1, i2);
    }
    for (Complex& z : raw) z *= Psi_i.grid1.spacing;
    double N = 0.0;
    for (const Complex& z : raw) N += std::norm(z);
    N = std::sqrt(N * g2.spacing);
    if (N <= kEpsilonDegenerate)
        throw DegenerateReduction("reduce_final: contraction norm " + std::to_string(N) +
                                  " is negligible (outcome incompatible with the pair state)");
    for (Complex& z : raw) z /= N;
    return WavefunctionField(g2, std::move(raw), Psi_i.time, true);
}

namespace {

// Marginal bilinears over the kept axis: den(x_j) and the symmetrized flux
// num(x_j), both complex and pre-amplitude.
void marginal_bilinears(const TwoParticleField& Psi_i, const TwoParticleField& Psi_f,
                        int which, CVec& den, CVec& num) {
    require_same_grid(Psi_i.grid1, Psi_f.grid1, "many_body grid1");
    require_same_grid(Psi_i.grid2, Psi_f.grid2, "many_body grid2");
    if (std::abs(Psi_i.time - Psi_f.time) > 1e-9)
        throw StructuralError("many_body: time tags differ");
    if (which != 1 && which != 2) throw ConfigError("many_body: which must be 1 or 2");

    const std::size_t n1 = Psi_i.grid1.n, n2 = Psi_i.grid2.n;
    const int axis = which - 1;
    const double spacing_kept = (which == 1) ? Psi_i.grid1.spacing : Psi_i.grid2.spacing;
    const double dx_other = (which == 1) ? Psi_i.grid2.spacing : Psi_i.grid1.spacing;
    CVec dI = spectral_derivative_axis(Psi_i.values, n1, n2, axis, spacing_kept);
    CVec dF = spectral_derivative_axis(Psi_f.values, n1, n2, axis, spacing_kept);

    const std::size_t n_kept = (which == 1) ? n1 : n2;
    den.assign(n_kept, Complex{0.0, 0.0});
    num.assign(n_kept, Complex{0.0, 0.0});
    const Complex half_over_i = Complex(0.0, -0.5);
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
            std::size_t lin = i1 * n2 + i2;
            std::size_t kept = (which == 1) ? i1 : i2;
            Complex cF = std::conj(Psi_f.values[lin]);
            den[kept] += cF * Psi_i.values[lin];
            num[kept] += half_over_i * (cF * dI[lin] - std::conj(dF[lin]) * Psi_i.values[lin]);
        }
    }
    for (std::size_t i = 0; i < n_kept; ++i) {
        den[i] *= dx_other;
        num[i] *= dx_other;
    }
}

} // namespace

GuidanceField many_body_velocity(const TwoParticleField& Psi_i, const TwoParticleField& Psi_f,
                                 const Amplitude& a, int which) {
    Complex inv_a = normalizer(a, Normalization::complex_amplitude);
    CVec den, num;
    marginal_bilinears(Psi_i, Psi_f, which, den, num);
    GuidanceField out;
    out.grid = (which == 1) ? Psi_i.grid1 : Psi_i.grid2;
    out.time = Psi_i.time;
    out.model = GuidanceModel::symmetric;
    out.density.resize(den.size());
    out.current.resize(den.size());
    for (std::size_t i = 0; i < den.size(); ++i) {
        out.density[i] = (inv_a * den[i]).real();
        out.current[i] = (inv_a * num[i]).real();
    }
    finish_velocity(out);
    return out;
}

RVec many_body_density(const TwoParticleField& Psi_i, const TwoParticleField& Psi_f,
                       const Amplitude& a, int which) {
    Complex inv_a = normalizer(a, Normalization::complex_amplitude);
    CVec den, num;
    marginal_bilinears(Psi_i, Psi_f, which, den, num);
    RVec out(den.size());
    for (std::size_t i = 0; i < den.size(); ++i) out[i] = (inv_a * den[i]).real();
    return out;
}

namespace {

// Spinor bilinears q0 = psi_f^dag psi_i and q1 = i(conj(f0) i1 - conj(f1) i0),
// i.e. psibar_f gamma^nu psi_i in the gamma0 = diag(1,-1), gamma1 = i sigma1
// representation, pre-amplitude.
void dirac_bilinears(const SpinorField& psi_i, const SpinorField& psi_f, CVec& q0, CVec& q1) {
    require_same_grid(psi_i.grid, psi_f.grid, "dirac_guidance");
    if (std::abs(psi_i.time - psi_f.time) > 1e-9)
        throw StructuralError("dirac_guidance: time tags differ");
    const std::size_t n = psi_i.grid.n;
    q0.resize(n);
    q1.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
        Complex f0 = std::conj(psi_f.upper[x]);
        Complex f1 = std::conj(psi_f.lower[x]);
        q0[x] = f0 * psi_i.upper[x] + f1 * psi_i.lower[x];
        q1[x] = I * (f0 * psi_i.lower[x] - f1 * psi_i.upper[x]);
    }
}

} // namespace

DiracGuidance dirac_guidance(const SpinorField& psi_i, const SpinorField& psi_f,
                             const Amplitude& a) {
    Complex inv_a = normalizer(a, Normalization::complex_amplitude);
    CVec q0, q1;
    dirac_bilinears(psi_i, psi_f, q0, q1);
    const std::size_t n = psi_i.grid.n;
    DiracGuidance out;
    out.grid = psi_i.grid;
    out.time = psi_i.time;
    out.j0.resize(n);
    out.j1.resize(n);
    out.rho0.resize(n);
    out.u0.assign(n, 0.0);
    out.u1.assign(n, 0.0);
    out.defined.assign(n, false);
    out.character.assign(n, CausalCharacter::lightlike);
    double rho0_max = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        out.j0[x] = (inv_a * q0[x]).real();
        out.j1[x] = (inv_a * q1[x]).real();
        double s = out.j0[x] * out.j0[x] - out.j1[x] * out.j1[x];
        out.rho0[x] = std::sqrt(std::abs(s));
        rho0_max = std::max(rho0_max, out.rho0[x]);
    }
    out.eps_turn = kEpsilonTurnRel * rho0_max;
    for (std::size_t x = 0; x < n; ++x) {
        if (out.rho0[x] >= out.eps_turn && out.eps_turn > 0.0) {
            out.u0[x] = out.j0[x] / out.rho0[x];
            out.u1[x] = out.j1[x] / out.rho0[x];
            out.defined[x] = true;
            double s = out.j0[x] * out.j0[x] - out.j1[x] * out.j1[x];
            out.character[x] = (s > 0.0) ? CausalCharacter::timelike : CausalCharacter::spacelike;
        }
    }
    return out;
}

std::vector<double> dirac_continuity_residual(const SpinorRecord& rec_i,
                                              const SpinorRecord& rec_f, const Amplitude& a) {
    Complex inv_a = normalizer(a, Normalization::complex_amplitude);
    const auto pairs = aligned_snapshots(rec_i, rec_f);
    const Grid1D g = rec_i.snapshots.front().grid;
    std::vector<double> times;
    for (const auto& [ii, fi] : pairs) times.push_back(rec_i.snapshots[ii].time);

    auto j0_at = [&](std::size_t m) {
        CVec q0, q1;
        dirac_bilinears(rec_i.snapshots[pairs[m].first], rec_f.snapshots[pairs[m].second], q0, q1);
        RVec j0(q0.size());
        for (std::size_t i = 0; i < q0.size(); ++i) j0[i] = (inv_a * q0[i]).real();
        return j0;
    };
    auto dj1_at = [&](std::size_t m) {
        CVec q0, q1;
        dirac_bilinears(rec_i.snapshots[pairs[m].first], rec_f.snapshots[pairs[m].second], q0, q1);
        RVec j1(q1.size());
        for (std::size_t i = 0; i < q1.size(); ++i) j1[i] = (inv_a * q1[i]).real();
        return spectral_derivative(j1, g);
    };
    return residual_series(
        pairs.size(), times, j0_at, dj1_at,
        [](const RVec& prev, const RVec& next, const RVec& dj, double dt2) {
            double acc = 0.0;
            for (std::size_t i = 0; i < dj.size(); ++i) {
                double r = (next[i] - prev[i]) / dt2 + dj[i];
                acc += r * r;
            }
            return std::sqrt(acc / static_cast<double>(dj.size()));
        });
}

} // namespace csbohm
