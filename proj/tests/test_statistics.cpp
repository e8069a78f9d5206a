#include "doctest.h"

#include <cmath>
#include <complex>

#include "csbohm/errors.hpp"
#include "csbohm/field.hpp"
#include "csbohm/guidance.hpp"
#include "csbohm/rng.hpp"
#include "csbohm/statistics.hpp"
#include "oracles.hpp"

using namespace csbohm;

namespace {

Grid1D box() { return Grid1D{512, 0.0625, -16.0}; }

WavefunctionField random_state(const Grid1D& g, std::uint64_t seed) {
    Rng rng(seed);
    CVec v(g.n);
    for (auto& z : v) z = Complex{rng.normal(), rng.normal()};
    return normalized(WavefunctionField(g, std::move(v), 0.0));
}

double l1_distance(const RVec& a, const RVec& b, double cell) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]) * cell;
    return s;
}

} // namespace

TEST_CASE("final-state weights are Born weights") {
    Grid1D g = box();
    auto p0 = harmonic_eigenstate(g, 0);
    auto p1 = harmonic_eigenstate(g, 1);
    auto p2 = harmonic_eigenstate(g, 2);
    CVec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        v[i] = (p0.values[i] + p1.values[i]) / std::sqrt(2.0);
    auto psi = normalized(WavefunctionField(g, std::move(v), 0.0));

    CHECK(final_state_weight(psi, psi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(final_state_weight(p2, psi) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(final_state_weight(p0, psi) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(final_state_weight(p1, psi) == doctest::Approx(0.5).epsilon(1e-10));

    auto stretched = p0;
    for (auto& z : stretched.values) z *= 2.0;
    CHECK_THROWS_AS((void)final_state_weight(stretched, psi), StructuralError);
}

TEST_CASE("outcome weights over a complete basis sum to one") {
    Grid1D g = box();
    std::vector<WavefunctionField> members;
    for (unsigned n = 0; n < 32; ++n) members.push_back(harmonic_eigenstate(g, n));
    FinalBasis basis = make_final_basis(std::move(members));

    // a displaced ground-state packet lives in the low end of the ladder
    auto psi = gaussian_packet(g, 0.8, 0.0, 1.0 / std::sqrt(2.0));
    CHECK(completeness_defect(basis, psi) < 1e-6);

    double total = 0.0;
    for (const auto& m : basis.members) total += final_state_weight(m, psi);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("make_final_basis rejects a non-orthonormal family") {
    Grid1D g = box();
    auto p0 = harmonic_eigenstate(g, 0);
    CHECK_THROWS_AS((void)make_final_basis({p0, p0}), StructuralError);
    CHECK_THROWS_AS((void)make_final_basis({}), StructuralError);

    auto basis = make_final_basis({p0, harmonic_eigenstate(g, 1)}, {"ground", "first"});
    CHECK(basis.labels[0] == "ground");

    // defect of a state with one leg outside the span
    auto p2 = harmonic_eigenstate(g, 2);
    CVec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        v[i] = (p0.values[i] + basis.members[1].values[i] + p2.values[i]) / std::sqrt(3.0);
    auto psi = normalized(WavefunctionField(g, std::move(v), 0.0));
    CHECK(completeness_defect(basis, psi) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("joint density obeys the chain rule pointwise") {
    Grid1D g = box();

    // psi_f = psi_i collapses to the usual density
    auto psi = gaussian_packet(g, -1.0, 0.4, 1.3);
    RVec self = joint_density(psi, psi);
    for (std::size_t i = 0; i < g.n; i += 13)
        CHECK(self[i] == doctest::Approx(std::norm(psi.values[i])).epsilon(1e-12));

    // random pair: joint = conditional (symmetric) density times Born weight
    auto psi_i = random_state(g, 42);
    auto psi_f = random_state(g, 43);
    Amplitude a{inner_product(psi_f, psi_i)};
    REQUIRE(std::abs(a.value) > 1e-4);
    GuidanceField cond = symmetric_fields(psi_i, psi_f, a);
    double w = final_state_weight(psi_f, psi_i);
    RVec joint = joint_density(psi_i, psi_f);
    for (std::size_t i = 0; i < g.n; ++i)
        CHECK(joint[i] == doctest::Approx(cond.density[i] * w).epsilon(1e-12));

    // explicit superposition against the closed form (phi0^2 + phi0 phi1)/2
    auto p0 = harmonic_eigenstate(g, 0);
    CVec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        v[i] = (p0.values[i] + harmonic_eigenstate(g, 1).values[i]) / std::sqrt(2.0);
    auto sup = normalized(WavefunctionField(g, std::move(v), 0.0));
    RVec jd = joint_density(sup, p0);
    for (std::size_t i = 0; i < g.n; i += 7) {
        double x = g.x(i);
        double expect = 0.5 * (oracle::phi0(x) * oracle::phi0(x) +
                               oracle::phi0(x) * oracle::phi1(x));
        CHECK(jd[i] == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("position-basis marginal recovers the usual density exactly") {
    Grid1D g{256, 0.125, -16.0};
    auto psi = gaussian_packet(g, 0.5, 0.7, 1.1);
    FinalBasis basis = position_basis(g, 0.0);
    CHECK(completeness_defect(basis, psi) < 1e-10);

    MarginalResult res = marginal_position(psi, basis);
    CHECK(!res.incomplete_basis);
    CHECK(res.defect < 1e-10);
    RVec born(g.n);
    for (std::size_t i = 0; i < g.n; ++i) born[i] = std::norm(psi.values[i]);
    CHECK(l1_distance(res.density, born, g.spacing) < 1e-10);
    for (double d : res.density) CHECK(d >= -1e-12);
}

TEST_CASE("truncated eigenbasis marginal is exact on its span") {
    Grid1D g = box();
    std::vector<WavefunctionField> members;
    for (unsigned n = 0; n < 32; ++n) members.push_back(harmonic_eigenstate(g, n));
    FinalBasis basis = make_final_basis(std::move(members));

    auto psi = gaussian_packet(g, 0.8, 0.0, 1.0 / std::sqrt(2.0));
    MarginalResult res = marginal_position(psi, basis);
    CHECK(!res.incomplete_basis);
    CHECK(res.l1_error < 1e-8);
    for (double d : res.density) CHECK(d >= -1e-12);
}

TEST_CASE("a missing basis component shows up as the lost projection") {
    Grid1D g = box();
    auto p0 = harmonic_eigenstate(g, 0);
    auto p1 = harmonic_eigenstate(g, 1);
    CVec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        v[i] = (p0.values[i] + p1.values[i]) / std::sqrt(2.0);
    auto psi = normalized(WavefunctionField(g, std::move(v), 0.0));

    FinalBasis basis = make_final_basis({p0});
    MarginalResult res = marginal_position(psi, basis);
    CHECK(res.incomplete_basis);
    CHECK(!res.note.empty());
    CHECK(res.defect == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));

    // density + Re[psi r*] restores |psi|^2, r the missing projection
    for (std::size_t i = 0; i < g.n; i += 11) {
        Complex r = psi.values[i] - inner_product(p0, psi) * p0.values[i];
        double restored = res.density[i] + std::real(psi.values[i] * std::conj(r));
        CHECK(restored == doctest::Approx(std::norm(psi.values[i])).epsilon(1e-12));
    }
}

TEST_CASE("appendix product density is the product of the pair marginals") {
    Grid1D g{256, 0.125, -16.0};

    // product states: each factor carries its own single-particle density
    auto a1 = gaussian_packet(g, -0.5, 0.3, 1.0);
    auto a2 = gaussian_packet(g, 0.7, -0.2, 1.4);
    auto b1 = gaussian_packet(g, 0.0, 0.0, 1.2);
    auto b2 = gaussian_packet(g, 0.4, 0.0, 1.1);
    auto Psi_i = product_state(a1, a2);
    auto Psi_f = product_state(b1, b2);
    Amplitude a = amplitude(Psi_f, Psi_i);

    PairDensity prod = appendix_product_density(Psi_i, Psi_f, a);
    GuidanceField f1 = symmetric_fields(a1, b1, amplitude(b1, a1));
    GuidanceField f2 = symmetric_fields(a2, b2, amplitude(b2, a2));
    for (std::size_t i1 = 0; i1 < g.n; i1 += 17)
        for (std::size_t i2 = 0; i2 < g.n; i2 += 17)
            CHECK(prod.values[i1 * g.n + i2] ==
                  doctest::Approx(f1.density[i1] * f2.density[i2]).epsilon(1e-10));

    CHECK_THROWS_AS((void)appendix_product_density(Psi_i, Psi_f, Amplitude{}),
                    DegenerateOverlap);
}

TEST_CASE("appendix product density against a direct quadrature oracle") {
    Grid1D g{256, 0.125, -16.0};
    auto Psi_i = entangled_gaussian(g, g, 0.0, 0.0, 1.2, 0.6);
    auto Psi_f = product_state(gaussian_packet(g, 0.3, 0.0, 1.0),
                               gaussian_packet(g, -0.2, 0.0, 1.0));
    Amplitude a = amplitude(Psi_f, Psi_i);
    PairDensity prod = appendix_product_density(Psi_i, Psi_f, a);

    // marginals computed straight from the definition
    RVec m1(g.n, 0.0), m2(g.n, 0.0);
    for (std::size_t i1 = 0; i1 < g.n; ++i1)
        for (std::size_t i2 = 0; i2 < g.n; ++i2) {
            double cell = std::real(std::conj(Psi_f.values[i1 * g.n + i2]) *
                                    Psi_i.values[i1 * g.n + i2] / a.value);
            m1[i1] += cell * g.spacing;
            m2[i2] += cell * g.spacing;
        }
    for (std::size_t i1 = 0; i1 < g.n; i1 += 23)
        for (std::size_t i2 = 0; i2 < g.n; i2 += 23)
            CHECK(prod.values[i1 * g.n + i2] ==
                  doctest::Approx(m1[i1] * m2[i2]).epsilon(1e-12));

    // explicitly uncorrelated, and normalized to unit mass
    CHECK(std::abs(correlation(prod)) < 1e-10);
    double mass = 0.0;
    for (double vv : prod.values) mass += vv;
    CHECK(mass * g.spacing * g.spacing == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("narrow final packets concentrate the product density") {
    Grid1D g{256, 0.125, -16.0};
    const double sf = 4.0 * g.spacing; // 0.5
    const double X1 = 1.0, X2 = -2.0;
    auto Psi_i = entangled_gaussian(g, g, 0.0, 0.0, 1.5, 0.8);
    auto Psi_f = product_state(gaussian_packet(g, X1, 0.0, sf),
                               gaussian_packet(g, X2, 0.0, sf));
    PairDensity prod = appendix_product_density(Psi_i, Psi_f, amplitude(Psi_f, Psi_i));

    double inside = 0.0, total = 0.0;
    for (std::size_t i1 = 0; i1 < g.n; ++i1)
        for (std::size_t i2 = 0; i2 < g.n; ++i2) {
            double w = std::abs(prod.values[i1 * g.n + i2]);
            total += w;
            if (std::abs(g.x(i1) - X1) < 5.0 * sf && std::abs(g.x(i2) - X2) < 5.0 * sf)
                inside += w;
        }
    CHECK(inside / total > 0.99);
}

TEST_CASE("summing position outcomes restores the correlated density") {
    Grid1D g{256, 0.125, -16.0};
    const double sp = 1.2, sm = 0.6;
    auto Psi = entangled_gaussian(g, g, 0.0, 0.0, sp, sm);
    PairDensity rec = appendix_marginal_recovery(Psi);

    RVec born(Psi.values.size());
    for (std::size_t k = 0; k < born.size(); ++k) born[k] = std::norm(Psi.values[k]);
    double l1 = 0.0;
    for (std::size_t k = 0; k < born.size(); ++k)
        l1 += std::abs(rec.values[k] - born[k]) * g.spacing * g.spacing;
    CHECK(l1 < 1e-10);

    // correlation climbs back out of the uncorrelated per-outcome form
    double expect = (sp * sp - sm * sm) / (sp * sp + sm * sm);
    CHECK(correlation(rec) == doctest::Approx(expect).epsilon(1e-6));

    // a product state recovers zero correlation
    auto prod = product_state(gaussian_packet(g, 0.0, 0.0, 1.0),
                              gaussian_packet(g, 0.5, 0.0, 1.3));
    CHECK(std::abs(correlation(appendix_marginal_recovery(prod))) < 1e-10);
}

TEST_CASE("signed estimator reduces to the mean for flat weights") {
    std::vector<SignedSample> s;
    double mean = 0.0, ssq = 0.0;
    for (int k = 0; k < 16; ++k) {
        s.push_back({static_cast<double>(k), 1.0 / 16.0});
        mean += k / 16.0;
    }
    for (int k = 0; k < 16; ++k) ssq += (k - mean) * (k - mean);

    Estimate e = signed_estimator(s);
    CHECK(e.value == doctest::Approx(mean).epsilon(1e-15));
    CHECK(e.ess == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(e.negativity == 0.0);
    CHECK(e.count == 16);
    CHECK(e.std_error == doctest::Approx(std::sqrt(ssq) / 16.0).epsilon(1e-12));

    std::string js = to_json(e);
    CHECK(js.find("\"estimate\"") != std::string::npos);
    CHECK(js.find("\"effective_sample_size\"") != std::string::npos);
    CHECK(js.find("\"negativity_fraction\"") != std::string::npos);
}

TEST_CASE("signed sampling of a known distribution hits the exact mean") {
    // net masses {0.5, 0.3, 0.2} on {0, 1, 2} written as a signed mixture:
    // |q| = {0.9, 0.7, 0.2} with sign flips carrying the cancellation
    const double q[3] = {0.9, 0.7, 0.2};
    // negative-draw chance (q - net)/(2 q) makes the signed mean come out net
    const double neg[3] = {0.2 / 0.9, 0.2 / 0.7, 0.0};
    std::vector<double> cdf = {q[0], q[0] + q[1], q[0] + q[1] + q[2]};

    Rng rng(20240819u);
    std::vector<SignedSample> s;
    for (int k = 0; k < 4000; ++k) {
        std::size_t v = rng.pick(cdf);
        double w = (rng.uniform() < neg[v]) ? -1.0 : 1.0;
        s.push_back({static_cast<double>(v), w});
    }
    Estimate e = signed_estimator(s);
    // exact expectation under the net masses: (0*0.5 + 1*0.3 + 2*0.2) / 1.0
    CHECK(std::abs(e.value - 0.7) < 3.0 * e.std_error);
    CHECK(e.negativity > 0.1);
    CHECK(e.ess > 1000.0);
}

TEST_CASE("signed estimator refuses unreliable ensembles") {
    std::vector<SignedSample> few = {{1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}};
    CHECK_THROWS_AS((void)signed_estimator(few), UnreliableEstimate);

    std::vector<SignedSample> cancel;
    for (int k = 0; k < 200; ++k) cancel.push_back({static_cast<double>(k % 7), k % 2 ? 1.0 : -1.0});
    CHECK_THROWS_AS((void)signed_estimator(cancel), UnreliableEstimate);

    CHECK_THROWS_AS((void)signed_estimator({}), UnreliableEstimate);
}
