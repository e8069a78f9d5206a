#include "csbohm/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <nlohmann/json.hpp>

#include "csbohm/errors.hpp"
#include "csbohm/guidance.hpp"

namespace csbohm {

namespace {

void require_normalized(const WavefunctionField& f, const char* where) {
    const double n = norm(f);
    if (std::abs(n - 1.0) > 1e-8)
        throw StructuralError(std::string(where) + ": state not normalized (norm " +
                              std::to_string(n) + ")");
}

} // namespace

FinalBasis make_final_basis(std::vector<WavefunctionField> members,
                            std::vector<std::string> labels) {
    if (members.empty()) throw StructuralError("make_final_basis: no members");
    const Grid1D& g = members.front().grid;
    for (const auto& m : members) require_same_grid(g, m.grid, "make_final_basis");

    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i; j < members.size(); ++j) {
            const Complex gram = inner_product(members[i], members[j]);
            const double target = (i == j) ? 1.0 : 0.0;
            if (std::abs(gram - target) > 1e-8)
                throw StructuralError("make_final_basis: members " + std::to_string(i) +
                                      ", " + std::to_string(j) +
                                      " break orthonormality by " +
                                      std::to_string(std::abs(gram - target)));
        }
    }

    if (labels.empty()) {
        labels.reserve(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) labels.push_back(std::to_string(i));
    }
    if (labels.size() != members.size())
        throw StructuralError("make_final_basis: label count does not match member count");
    return FinalBasis{std::move(members), std::move(labels)};
}

FinalBasis position_basis(const Grid1D& grid, double time) {
    FinalBasis basis;
    basis.members.reserve(grid.n);
    basis.labels.reserve(grid.n);
    const double spike = 1.0 / std::sqrt(grid.spacing);
    for (std::size_t k = 0; k < grid.n; ++k) {
        CVec v(grid.n, Complex{0.0, 0.0});
        v[k] = spike;
        basis.members.emplace_back(grid, std::move(v), time, true);
        basis.labels.push_back(std::to_string(grid.x(k)));
    }
    return basis;
}

double completeness_defect(const FinalBasis& basis, const WavefunctionField& psi) {
    if (basis.members.empty()) throw StructuralError("completeness_defect: empty basis");
    require_same_grid(basis.members.front().grid, psi.grid, "completeness_defect");
    CVec residual = psi.values;
    for (const auto& m : basis.members) {
        const Complex c = inner_product(m, psi);
        for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= c * m.values[i];
    }
    double s = 0.0;
    for (const Complex& r : residual) s += std::norm(r);
    return std::sqrt(s * psi.grid.spacing);
}

double final_state_weight(const WavefunctionField& psi_f, const WavefunctionField& psi_i) {
    require_same_grid(psi_f.grid, psi_i.grid, "final_state_weight");
    require_normalized(psi_f, "final_state_weight");
    require_normalized(psi_i, "final_state_weight");
    const double w = std::norm(inner_product(psi_f, psi_i));
    return std::clamp(w, 0.0, 1.0);
}

RVec joint_density(const WavefunctionField& psi_i, const WavefunctionField& psi_f) {
    require_same_grid(psi_f.grid, psi_i.grid, "joint_density");
    const Complex a_bar = std::conj(inner_product(psi_f, psi_i)); // <psi_i|psi_f>
    RVec out(psi_i.grid.n);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::real(a_bar * std::conj(psi_f.values[i]) * psi_i.values[i]);
    return out;
}

MarginalResult marginal_position(const WavefunctionField& psi_i, const FinalBasis& basis) {
    if (basis.members.empty()) throw StructuralError("marginal_position: empty basis");
    const Grid1D& g = psi_i.grid;
    require_same_grid(basis.members.front().grid, g, "marginal_position");

    MarginalResult res;
    res.density.assign(g.n, 0.0);
    CVec projection(g.n, Complex{0.0, 0.0});
    for (const auto& m : basis.members) {
        const Complex c = inner_product(m, psi_i);
        const Complex c_bar = std::conj(c); // <psi_i|phi>
        for (std::size_t i = 0; i < g.n; ++i) {
            res.density[i] += std::real(c_bar * std::conj(m.values[i]) * psi_i.values[i]);
            projection[i] += c * m.values[i];
        }
    }

    double defect2 = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        defect2 += std::norm(psi_i.values[i] - projection[i]);
        peak = std::max(peak, std::norm(psi_i.values[i]));
    }
    res.defect = std::sqrt(defect2 * g.spacing);

    // The sum is |P psi|^2 + Re[(psi - P psi)(P psi)*]: nonnegative except for
    // the cross term an incomplete basis leaves behind. Anything below that
    // slack is a bug, not physics.
    for (std::size_t i = 0; i < g.n; ++i) {
        const double slack =
            std::abs(psi_i.values[i] - projection[i]) * std::abs(projection[i]);
        if (res.density[i] < -(slack + 1e-12 * (1.0 + peak)))
            throw StructuralError("marginal_position: negative marginal beyond the "
                                  "incompleteness slack");
    }

    for (std::size_t i = 0; i < g.n; ++i) {
        const double dev = std::abs(res.density[i] - std::norm(psi_i.values[i]));
        res.max_deviation = std::max(res.max_deviation, dev);
        res.l1_error += dev * g.spacing;
    }
    res.incomplete_basis = res.defect > 1e-6;
    if (res.incomplete_basis)
        res.note = "basis misses a component of psi_i (defect " +
                   std::to_string(res.defect) + ")";
    return res;
}

PairDensity appendix_product_density(const TwoParticleField& Psi_i,
                                     const TwoParticleField& Psi_f, const Amplitude& a) {
    if (std::abs(a.value) <= kEpsilonDegenerate)
        throw DegenerateOverlap("appendix_product_density: |a| = " +
                                std::to_string(std::abs(a.value)));
    const RVec m1 = many_body_density(Psi_i, Psi_f, a, 1);
    const RVec m2 = many_body_density(Psi_i, Psi_f, a, 2);
    PairDensity out;
    out.grid1 = Psi_i.grid1;
    out.grid2 = Psi_i.grid2;
    out.time = Psi_i.time;
    out.values.resize(m1.size() * m2.size());
    for (std::size_t i1 = 0; i1 < m1.size(); ++i1)
        for (std::size_t i2 = 0; i2 < m2.size(); ++i2)
            out.values[i1 * m2.size() + i2] = m1[i1] * m2[i2];
    return out;
}

PairDensity appendix_marginal_recovery(const TwoParticleField& Psi_i) {
    const Grid1D& g1 = Psi_i.grid1;
    const Grid1D& g2 = Psi_i.grid2;
    PairDensity out;
    out.grid1 = g1;
    out.grid2 = g2;
    out.time = Psi_i.time;
    out.values.assign(g1.n * g2.n, 0.0);

    // Outcome sum over the product-position basis. Each spike pair overlaps
    // the grid at its own node only, so the outcome (k1, k2) deposits
    // Re[<Psi|X><X|x><x|Psi>] there and nothing anywhere else.
    const double cell = g1.spacing * g2.spacing;
    const double spike = 1.0 / std::sqrt(cell);
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        const Complex c = std::conj(Psi_i.values[k]) * cell * spike; // <X_k|Psi>*, times X_k
        out.values[k] += std::real(c * Psi_i.values[k]) * spike;
    }
    return out;
}

double correlation(const PairDensity& rho) {
    const Grid1D& g1 = rho.grid1;
    const Grid1D& g2 = rho.grid2;
    double mass = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i1 = 0; i1 < g1.n; ++i1)
        for (std::size_t i2 = 0; i2 < g2.n; ++i2) {
            const double w = rho.values[i1 * g2.n + i2];
            mass += w;
            m1 += w * g1.x(i1);
            m2 += w * g2.x(i2);
        }
    if (!(std::abs(mass) > 0.0)) throw StructuralError("correlation: zero total mass");
    m1 /= mass;
    m2 /= mass;
    double v1 = 0.0, v2 = 0.0, cov = 0.0;
    for (std::size_t i1 = 0; i1 < g1.n; ++i1)
        for (std::size_t i2 = 0; i2 < g2.n; ++i2) {
            const double w = rho.values[i1 * g2.n + i2];
            const double d1 = g1.x(i1) - m1, d2 = g2.x(i2) - m2;
            v1 += w * d1 * d1;
            v2 += w * d2 * d2;
            cov += w * d1 * d2;
        }
    if (!(v1 > 0.0) || !(v2 > 0.0))
        throw StructuralError("correlation: degenerate variance");
    return cov / std::sqrt(v1 * v2);
}

Estimate signed_estimator(const std::vector<SignedSample>& samples,
                          const std::function<double(double)>& statistic) {
    if (samples.empty()) throw UnreliableEstimate("signed_estimator: no samples");
    auto f = [&](double v) { return statistic ? statistic(v) : v; };

    double sw = 0.0, sa = 0.0, sw2 = 0.0, sneg = 0.0, swf = 0.0;
    for (const SignedSample& s : samples) {
        sw += s.weight;
        sa += std::abs(s.weight);
        sw2 += s.weight * s.weight;
        sneg += std::max(0.0, -s.weight);
        swf += s.weight * f(s.value);
    }
    if (!(sw2 > 0.0)) throw UnreliableEstimate("signed_estimator: all weights zero");

    Estimate e;
    e.count = samples.size();
    e.ess = sa * sa / sw2;
    e.negativity = sneg / sa;
    if (e.ess < 10.0)
        throw UnreliableEstimate("signed_estimator: effective sample size " +
                                 std::to_string(e.ess));
    if (std::abs(sw) < 3.0 * std::sqrt(sw2))
        throw UnreliableEstimate("signed_estimator: weights cancel to within noise "
                                 "(sum " + std::to_string(sw) + ")");

    e.value = swf / sw;
    double var = 0.0;
    for (const SignedSample& s : samples) {
        const double d = f(s.value) - e.value;
        var += s.weight * s.weight * d * d;
    }
    e.std_error = std::sqrt(var) / std::abs(sw);
    return e;
}

std::string to_json(const Estimate& e) {
    nlohmann::ordered_json j;
    j["estimate"] = e.value;
    j["stderr"] = e.std_error;
    j["effective_sample_size"] = e.ess;
    j["negativity_fraction"] = e.negativity;
    j["count"] = e.count;
    return j.dump();
}

} // namespace csbohm
