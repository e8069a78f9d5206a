#include "doctest.h"

#include <cmath>

#include "csbohm/errors.hpp"
#include "csbohm/fft.hpp"
#include "csbohm/field.hpp"
#include "csbohm/guidance.hpp"
#include "csbohm/potential.hpp"
#include "csbohm/propagator.hpp"
#include "csbohm/rng.hpp"
#include "oracles.hpp"

using namespace csbohm;

namespace {
Grid1D box() { return Grid1D{512, 0.0625, -16.0}; }

// superposition (phi0 + phi1)/sqrt2 against final phi0, the canonical
// negative-density pair
std::pair<WavefunctionField, WavefunctionField> harmonic_pair(const Grid1D& g) {
    auto p0 = harmonic_eigenstate(g, 0);
    auto p1 = harmonic_eigenstate(g, 1);
    CVec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        v[i] = (p0.values[i] + p1.values[i]) / std::sqrt(2.0);
    return {normalized(WavefunctionField(g, v, 0.0)), p0};
}

WavefunctionField random_superposition(const Grid1D& g, Rng& rng) {
    CVec v(g.n, Complex{0.0, 0.0});
    for (int c = 0; c < 3; ++c) {
        double center = rng.uniform(-3.0, 3.0);
        double p = rng.uniform(-1.5, 1.5);
        double s = rng.uniform(0.8, 1.6);
        Complex coef(rng.normal(), rng.normal());
        for (std::size_t i = 0; i < g.n; ++i)
            v[i] += coef * oracle::gaussian(g.x(i), center, p, s);
    }
    return normalized(WavefunctionField(g, v, 0.0));
}
} // namespace

TEST_CASE("bohm velocity of a lattice plane wave is its momentum") {
    Grid1D g = box();
    double p = 2.0 * M_PI * 12.0 / g.length();
    CVec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i) v[i] = std::exp(Complex(0.0, p * g.x(i)));
    WavefunctionField psi(g, v, 0.0);
    auto gf = bohm_velocity(psi);
    for (std::size_t i = 0; i < g.n; i += 31) {
        REQUIRE(gf.defined[i]);
        CHECK(gf.velocity[i] == doctest::Approx(p).epsilon(1e-10));
    }
}

TEST_CASE("bohm velocity of a real packet vanishes") {
    Grid1D g = box();
    auto psi = gaussian_packet(g, 0.5, 0.0, 1.0);
    auto gf = bohm_velocity(psi);
    for (std::size_t i = 0; i < g.n; ++i)
        if (gf.defined[i]) CHECK(std::abs(gf.velocity[i]) < 1e-9);
}

TEST_CASE("bohm velocity of a spreading gaussian matches the closed form") {
    Grid1D g = box();
    auto psi = gaussian_packet(g, 0.0, 0.0, 1.0);
    auto rec = evolve_window(psi, free_potential(), 1.0, 1e-3, 1000);
    auto gf = bohm_velocity(rec.snapshots.back());
    for (std::size_t i = 0; i < g.n; ++i) {
        double x = g.x(i);
        if (std::abs(x) < 3.0) {
            REQUIRE(gf.defined[i]);
            CHECK(std::abs(gf.velocity[i] - oracle::free_velocity(x, 1.0, 0.0, 0.0, 1.0)) < 1e-6);
        }
    }
}

TEST_CASE("conjugate pair reduces the symmetric fields to the standard ones") {
    Grid1D g = box();
    auto psi = gaussian_packet(g, -1.0, 0.7, 1.2);
    auto a = amplitude(psi, psi);
    auto sym = symmetric_fields(psi, psi, a);
    auto std_gf = bohm_velocity(psi);
    for (std::size_t i = 0; i < g.n; ++i) {
        CHECK(std::abs(sym.density[i] - std_gf.density[i]) < 1e-12);
        if (sym.defined[i] && std_gf.defined[i])
            CHECK(std::abs(sym.velocity[i] - std_gf.velocity[i]) < 1e-10);
    }
    CHECK(sym.negativity_fraction == 0.0);
}

TEST_CASE("harmonic pair density matches the closed form and dips negative") {
    Grid1D g = box();
    auto [psi_i, psi_f] = harmonic_pair(g);
    auto a = amplitude(psi_f, psi_i);
    CHECK(a.value.real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    auto gf = symmetric_fields(psi_i, psi_f, a);
    for (std::size_t i = 0; i < g.n; i += 7)
        CHECK(std::abs(gf.density[i] - oracle::harmonic_pair_density(g.x(i), 0.0)) < 1e-9);
    CHECK(gf.negativity_fraction > 0.01);
    // signed mass still integrates to one
    double total = 0.0;
    for (double r : gf.density) total += r;
    CHECK(total * g.spacing == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("evolved harmonic pair keeps the closed-form density and current") {
    Grid1D g = box();
    auto [psi_i, psi_f] = harmonic_pair(g);
    auto a = amplitude(psi_f, psi_i);
    Potential V = harmonic_potential(1.0);
    double t = 0.8, dt = 1e-3;
    auto rec_i = evolve_window(psi_i, V, t, dt, 800);
    auto rec_f = evolve_window(psi_f, V, t, dt, 800);
    auto gf = symmetric_fields(rec_i.snapshots.back(), rec_f.snapshots.back(), a);
    for (std::size_t i = 0; i < g.n; i += 7) {
        CHECK(std::abs(gf.density[i] - oracle::harmonic_pair_density(g.x(i), t)) < 1e-5);
        CHECK(std::abs(gf.current[i] - oracle::harmonic_pair_current(g.x(i), t)) < 1e-5);
    }
}

TEST_CASE("amplitude is conserved along the evolution") {
    Grid1D g = box();
    auto psi_i = gaussian_packet(g, -2.0, 1.0, 1.0);
    auto psi_f = gaussian_packet(g, 2.0, -0.5, 1.5);
    auto a0 = amplitude(psi_f, psi_i);
    Potential V = harmonic_potential(1.0);
    auto rec_i = evolve_window(psi_i, V, 2.0, 1e-3, 500);
    auto rec_f = evolve_window(psi_f, V, 2.0, 1e-3, 500);
    for (std::size_t m = 0; m < rec_i.snapshots.size(); ++m) {
        Complex at = inner_product(rec_f.snapshots[m], rec_i.snapshots[m]);
        CHECK(std::abs(at - a0.value) / std::abs(a0.value) < 1e-8);
    }
}

TEST_CASE("continuity residual is second order and matches the conjugate-pair case") {
    Grid1D g = box();
    Rng rng(23);
    for (int trial = 0; trial < 3; ++trial) {
        auto psi_i = random_superposition(g, rng);
        auto psi_f = random_superposition(g, rng);
        auto a = amplitude(psi_f, psi_i);
        Potential V = free_potential();
        auto run = [&](double dt) {
            auto ri = evolve_window(psi_i, V, 16 * dt, dt, 1);
            auto rf = evolve_window(psi_f, V, 16 * dt, dt, 1);
            auto res = continuity_residual(ri, rf, a);
            double worst = 0.0;
            for (double r : res) worst = std::max(worst, r);
            return worst;
        };
        double coarse = run(2e-3);
        double fine = run(1e-3);
        CHECK(coarse < 1e-4);
        CHECK(coarse / fine >= 3.5);
    }

    // conjugate pair: the symmetric residual IS the standard continuity residual
    auto psi = gaussian_packet(g, 0.0, 1.0, 1.0);
    auto a = amplitude(psi, psi);
    auto rec = evolve_window(psi, free_potential(), 0.016, 1e-3, 1);
    auto sym = continuity_residual(rec, rec, a);
    for (std::size_t m = 1; m + 1 < rec.snapshots.size(); ++m) {
        // standard residual computed directly from |psi|^2 and Im(psi* dpsi)
        const auto& prev = rec.snapshots[m - 1];
        const auto& next = rec.snapshots[m + 1];
        auto mid_gf = bohm_velocity(rec.snapshots[m]);
        RVec dj = spectral_derivative(mid_gf.current, g);
        double dt2 = next.time - prev.time;
        double acc = 0.0;
        for (std::size_t i = 0; i < g.n; ++i) {
            double r = (std::norm(next.values[i]) - std::norm(prev.values[i])) / dt2 + dj[i];
            acc += r * r;
        }
        double std_rms = std::sqrt(acc / static_cast<double>(g.n));
        CHECK(std::abs(sym[m - 1] - std_rms) < 1e-12);
    }
}

TEST_CASE("complex-product continuity holds for independent solutions") {
    Grid1D g = box();
    Rng rng(41);
    auto psi_i = random_superposition(g, rng);
    auto psi_f = random_superposition(g, rng);
    Potential V = harmonic_potential(1.0);
    auto run = [&](double dt) {
        auto ri = evolve_window(psi_i, V, 16 * dt, dt, 1);
        auto rf = evolve_window(psi_f, V, 16 * dt, dt, 1);
        auto res = continuity_residual_complex(ri, rf);
        double worst = 0.0;
        for (double r : res) worst = std::max(worst, r);
        return worst;
    };
    CHECK(run(2e-3) / run(1e-3) >= 3.5);
}

TEST_CASE("short records are rejected") {
    Grid1D g = box();
    auto psi = gaussian_packet(g, 0.0, 0.0, 1.0);
    auto a = amplitude(psi, psi);
    auto rec = evolve_window(psi, free_potential(), 0.01, 0.01, 1); // 2 snapshots
    CHECK_THROWS_AS(continuity_residual(rec, rec, a), StructuralError);
}

TEST_CASE("reduce_final contracts product and superposition states") {
    Grid1D g{256, 0.125, -16.0};
    auto pa = harmonic_eigenstate(g, 0);
    auto pb = harmonic_eigenstate(g, 1);
    auto pc = harmonic_eigenstate(g, 2);
    auto pd = harmonic_eigenstate(g, 3);

    auto prod = product_state(pa, pb);
    auto got = reduce_final(prod, pa);
    for (std::size_t i = 0; i < g.n; ++i)
        CHECK(std::abs(got.values[i] - pb.values[i]) < 1e-10);

    // (phi_a phi_b + phi_c phi_d)/sqrt2 contracted with phi_a -> phi_b
    CVec v(g.n * g.n);
    for (std::size_t i1 = 0; i1 < g.n; ++i1)
        for (std::size_t i2 = 0; i2 < g.n; ++i2)
            v[i1 * g.n + i2] = (pa.values[i1] * pb.values[i2] +
                                pc.values[i1] * pd.values[i2]) / std::sqrt(2.0);
    TwoParticleField sup(g, g, v, 0.0);
    auto got2 = reduce_final(sup, pa);
    for (std::size_t i = 0; i < g.n; ++i)
        CHECK(std::abs(got2.values[i] - pb.values[i]) < 1e-10);

    // final state orthogonal to both branches
    CHECK_THROWS_AS(reduce_final(sup, pb), DegenerateReduction);
}

TEST_CASE("factorized final state reduces the many-body fields to one body") {
    Grid1D g{128, 0.25, -16.0};
    auto Psi_i = entangled_gaussian(g, g, 0.0, 0.0, 2.0, 1.0);
    auto f1 = gaussian_packet(g, 0.5, 0.3, 1.2);
    auto f2 = gaussian_packet(g, -0.5, -0.2, 1.4);
    auto Psi_f = product_state(f1, f2);
    auto a = amplitude(Psi_f, Psi_i);

    for (int which = 1; which <= 2; ++which) {
        auto many = many_body_velocity(Psi_i, Psi_f, a, which);
        auto rho = many_body_density(Psi_i, Psi_f, a, which);

        // compose: contract with the other particle's final state, then
        // run the single-particle formulas with the matching amplitude
        auto reduced = (which == 2) ? reduce_final(Psi_i, f1)
                                    : reduce_final(swap_particles(Psi_i), f2);
        const auto& fin = (which == 2) ? f2 : f1;
        auto sym = symmetric_fields(reduced, fin, amplitude(fin, reduced));

        for (std::size_t i = 0; i < g.n; ++i) {
            CHECK(std::abs(many.density[i] - sym.density[i]) < 1e-10);
            CHECK(std::abs(rho[i] - sym.density[i]) < 1e-10);
            CHECK(std::abs(many.current[i] - sym.current[i]) < 1e-10);
            if (many.defined[i] && sym.defined[i])
                CHECK(std::abs(many.velocity[i] - sym.velocity[i]) < 1e-8);
        }
    }
}

TEST_CASE("many-body density of a conjugate product pair is the marginal") {
    Grid1D g{128, 0.25, -16.0};
    auto p1 = gaussian_packet(g, -1.0, 0.5, 1.0);
    auto p2 = gaussian_packet(g, 1.0, -0.5, 1.5);
    auto Psi = product_state(p1, p2);
    auto a = amplitude(Psi, Psi);
    auto rho1 = many_body_density(Psi, Psi, a, 1);
    for (std::size_t i = 0; i < g.n; i += 5)
        CHECK(rho1[i] == doctest::Approx(std::norm(p1.values[i])).epsilon(1e-10));
}

TEST_CASE("dirac guidance of the rest pair and the velocity identity") {
    Grid1D g{256, 0.25, -32.0};
    CVec up(g.n, Complex(1.0, 0.0)), lo(g.n, Complex(0.0, 0.0));
    auto psi = normalized(SpinorField(g, up, lo, 0.0));
    auto a = amplitude(psi, psi);
    auto dg = dirac_guidance(psi, psi, a);
    for (std::size_t i = 0; i < g.n; i += 19) {
        REQUIRE(dg.defined[i]);
        CHECK(dg.u0[i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(dg.u1[i]) < 1e-12);
        CHECK(dg.character[i] == CausalCharacter::timelike);
        CHECK(dg.j1[i] == doctest::Approx(0.0));
    }
}

TEST_CASE("dirac 4-velocity normalization and mixed character") {
    Grid1D g{1024, 0.125, -64.0};
    double mass = 1.0;
    auto psi_i = dirac_packet(g, -3.0, 0.8, 2.0, mass);
    auto psi_f = dirac_packet(g, 3.0, -0.6, 2.5, mass);
    auto a = amplitude(psi_f, psi_i);
    auto dg = dirac_guidance(psi_i, psi_f, a);
    bool saw_space = false, saw_time = false;
    for (std::size_t i = 0; i < g.n; ++i) {
        if (!dg.defined[i]) continue;
        double s = dg.u0[i] * dg.u0[i] - dg.u1[i] * dg.u1[i];
        CHECK(std::abs(std::abs(s) - 1.0) < 1e-9);
        if (dg.character[i] == CausalCharacter::spacelike) saw_space = true;
        if (dg.character[i] == CausalCharacter::timelike) saw_time = true;
    }
    CHECK(saw_space);
    CHECK(saw_time);

    // pointwise oracle at one index: direct evaluation of the bilinears
    std::size_t i = g.n / 2 + 40;
    Complex f0 = std::conj(psi_f.upper[i]), f1 = std::conj(psi_f.lower[i]);
    Complex q0 = f0 * psi_i.upper[i] + f1 * psi_i.lower[i];
    Complex q1 = I * (f0 * psi_i.lower[i] - f1 * psi_i.upper[i]);
    CHECK(dg.j0[i] == doctest::Approx((q0 / a.value).real()).epsilon(1e-12));
    CHECK(dg.j1[i] == doctest::Approx((q1 / a.value).real()).epsilon(1e-12));
}

TEST_CASE("dirac current conservation residual shrinks at second order") {
    Grid1D g{1024, 0.125, -64.0};
    double mass = 1.0;
    auto psi_i = dirac_packet(g, -2.0, 0.6, 2.0, mass);
    auto psi_f = dirac_packet(g, 2.0, -0.4, 2.0, mass);
    auto a = amplitude(psi_f, psi_i);
    auto run = [&](double dt) {
        auto ri = dirac_window(psi_i, mass, 16 * dt, dt, 1);
        auto rf = dirac_window(psi_f, mass, 16 * dt, dt, 1);
        auto res = dirac_continuity_residual(ri, rf, a);
        double worst = 0.0;
        for (double r : res) worst = std::max(worst, r);
        return worst;
    };
    CHECK(run(2e-3) / run(1e-3) >= 3.5);
}
