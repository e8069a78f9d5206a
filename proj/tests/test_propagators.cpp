#include "doctest.h"

#include <cmath>

#include "csbohm/errors.hpp"
#include "csbohm/field.hpp"
#include "csbohm/potential.hpp"
#include "csbohm/propagator.hpp"
#include "oracles.hpp"

using namespace csbohm;

namespace {
Grid1D box() { return Grid1D{512, 0.0625, -16.0}; } // [-16,16)

double max_diff(const CVec& a, const CVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}
} // namespace

TEST_CASE("free momentum eigenstate picks up only a global phase") {
    Grid1D g = box();
    double p = 2.0 * M_PI * 8.0 / g.length(); // lattice wavenumber
    CVec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i) v[i] = std::exp(Complex(0.0, p * g.x(i)));
    WavefunctionField psi(g, v, 0.0);
    double dt = 0.01;
    auto out = schrodinger_step(psi, free_potential(), dt);
    Complex phase = std::exp(Complex(0.0, -0.5 * p * p * dt));
    for (std::size_t i = 0; i < g.n; i += 37)
        CHECK(std::abs(out.values[i] - phase * psi.values[i]) < 1e-13);
    CHECK(out.time == doctest::Approx(dt));
}

TEST_CASE("free gaussian dispersion matches the analytic width") {
    Grid1D g = box();
    auto psi = gaussian_packet(g, 0.0, 0.0, 1.0);
    auto rec = evolve_window(psi, free_potential(), 1.0, 1e-3);
    double got = position_variance(rec.snapshots.back());
    CHECK(got == doctest::Approx(oracle::free_sigma_sq(1.0, 1.0)).epsilon(1e-6));
}

TEST_CASE("forward then backward restores the field") {
    Grid1D g = box();
    auto psi = gaussian_packet(g, -2.0, 1.0, 1.0);
    Potential V = harmonic_potential(1.0);
    WavefunctionField cur = psi;
    for (int s = 0; s < 100; ++s) cur = schrodinger_step(cur, V, 0.01);
    for (int s = 0; s < 100; ++s) cur = schrodinger_step(cur, V, -0.01);
    CHECK(max_diff(cur.values, psi.values) < 1e-12);
    CHECK(cur.time == doctest::Approx(0.0));
}

TEST_CASE("norm is conserved over long runs") {
    Grid1D g = box();
    auto psi = gaussian_packet(g, 0.0, 2.0, 1.0);
    Potential V = barrier_potential(1.5, 2.0, 4.0);
    WavefunctionField cur = psi;
    for (int s = 0; s < 1000; ++s) cur = schrodinger_step(cur, V, 1e-3);
    CHECK(std::abs(norm(cur) - 1.0) < 1e-10);
}

TEST_CASE("coherent state returns after one period") {
    Grid1D g = box();
    // displaced ground state, omega = 1, period 2*pi
    CVec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i) v[i] = oracle::phi0(g.x(i) - 2.0);
    auto psi = normalized(WavefunctionField(g, v, 0.0));
    double period = 2.0 * M_PI;
    auto rec = evolve_window(psi, harmonic_potential(1.0), period, period / 16384.0, 1024);
    CHECK(oracle::max_dev_up_to_phase(rec.snapshots.back().values, psi.values) < 1e-6);
}

TEST_CASE("evolve_window endpoints, stride, and direction") {
    Grid1D g = box();
    auto psi = gaussian_packet(g, 0.0, 0.0, 1.0);

    auto still = evolve_window(psi, free_potential(), 0.0, 0.01);
    CHECK(still.snapshots.size() == 1);
    CHECK(max_diff(still.snapshots[0].values, psi.values) == 0.0);

    auto fwd = evolve_window(psi, free_potential(), 0.1, 0.01, 5);
    CHECK(fwd.snapshots.size() == 3);
    CHECK(fwd.snapshots.front().time == doctest::Approx(0.0));
    CHECK(fwd.snapshots.back().time == doctest::Approx(0.1));
    CHECK(fwd.direction == Direction::forward);

    auto bwd = evolve_window(psi, free_potential(), -0.1, -0.01, 5);
    CHECK(bwd.direction == Direction::backward);
    for (std::size_t i = 1; i < bwd.snapshots.size(); ++i)
        CHECK(bwd.snapshots[i].time < bwd.snapshots[i - 1].time);

    CHECK_THROWS_AS(evolve_window(psi, free_potential(), 0.1, -0.01), ConfigError);
    CHECK_THROWS_AS(evolve_window(psi, free_potential(), 0.105, 0.01), ConfigError);
    CHECK_THROWS_AS(evolve_window(psi, free_potential(), 0.1, 0.01, 3), ConfigError);
}

TEST_CASE("strang splitting is second order") {
    Grid1D g = box();
    auto psi = gaussian_packet(g, -1.0, 1.0, 1.0);
    Potential V = harmonic_potential(1.0);
    auto run = [&](double dt) {
        auto rec = evolve_window(psi, V, 0.5, dt, static_cast<std::size_t>(std::llround(0.5 / dt)));
        return rec.snapshots.back();
    };
    auto coarse = run(0.02);
    auto half = run(0.01);
    auto ref = run(0.005);
    double e1 = max_diff(coarse.values, ref.values);
    double e2 = max_diff(half.values, ref.values);
    CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("separable two-particle evolution factorizes") {
    Grid1D g{128, 0.25, -16.0};
    auto a = gaussian_packet(g, -1.0, 0.5, 1.0);
    auto b = gaussian_packet(g, 1.0, -0.5, 1.5);
    auto Psi = product_state(a, b);
    Potential2 V = [](double x1, double x2, double) {
        return 0.5 * x1 * x1 + 0.5 * x2 * x2;
    };
    Potential V1 = harmonic_potential(1.0);
    double dt = 0.01;
    TwoParticleField cur = Psi;
    WavefunctionField ca = a, cb = b;
    for (int s = 0; s < 20; ++s) {
        cur = two_particle_step(cur, V, dt);
        ca = schrodinger_step(ca, V1, dt);
        cb = schrodinger_step(cb, V1, dt);
    }
    auto want = product_state(ca, cb);
    double m = 0.0;
    for (std::size_t i = 0; i < cur.values.size(); ++i)
        m = std::max(m, std::abs(cur.values[i] - want.values[i]));
    CHECK(m < 1e-10);
}

TEST_CASE("two-particle norm holds over 1000 steps") {
    Grid1D g{64, 0.5, -16.0};
    auto Psi = entangled_gaussian(g, g, 0.0, 0.0, 2.0, 1.0);
    TwoParticleField cur = Psi;
    for (int s = 0; s < 1000; ++s) cur = two_particle_step(cur, free_potential2(), 1e-3);
    CHECK(std::abs(norm(cur) - 1.0) < 1e-12);
}

TEST_CASE("entangled pair spreads by normal modes") {
    Grid1D g{128, 0.25, -16.0};
    double sp = 2.0, sm = 1.0, t = 1.0;
    auto Psi = entangled_gaussian(g, g, 0.0, 0.0, sp, sm);
    auto rec = two_particle_window(Psi, free_potential2(), t, 0.01,
                                   static_cast<std::size_t>(std::llround(t / 0.01)));
    const auto& out = rec.snapshots.back();
    // u and v modes disperse independently; Var(x1) = (Var_u + Var_v)/2
    double want = 0.5 * (oracle::free_sigma_sq(sp, t) + oracle::free_sigma_sq(sm, t));
    double w = 0.0, m1 = 0.0;
    for (std::size_t i1 = 0; i1 < g.n; ++i1)
        for (std::size_t i2 = 0; i2 < g.n; ++i2) {
            double pr = std::norm(out.at(i1, i2));
            w += pr;
            m1 += pr * g.x(i1);
        }
    m1 /= w;
    double v1 = 0.0;
    for (std::size_t i1 = 0; i1 < g.n; ++i1)
        for (std::size_t i2 = 0; i2 < g.n; ++i2)
            v1 += std::norm(out.at(i1, i2)) * (g.x(i1) - m1) * (g.x(i1) - m1);
    v1 /= w;
    CHECK(v1 == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("dirac rest spinor just rotates its phase") {
    Grid1D g{256, 0.25, -32.0};
    double mass = 1.0;
    CVec up(g.n, Complex(1.0, 0.0)), lo(g.n, Complex(0.0, 0.0));
    auto psi = normalized(SpinorField(g, up, lo, 0.0));
    double dt = 0.3;
    auto out = dirac_step(psi, mass, dt);
    Complex phase = std::exp(Complex(0.0, -mass * dt));
    for (std::size_t i = 0; i < g.n; i += 17) {
        CHECK(std::abs(out.upper[i] - phase * psi.upper[i]) < 1e-13);
        CHECK(std::abs(out.lower[i]) < 1e-13);
    }
}

TEST_CASE("dirac norm conservation and reversibility") {
    Grid1D g{1024, 0.125, -64.0};
    auto psi = dirac_packet(g, 0.0, 0.5, 2.0, 1.0);
    SpinorField cur = psi;
    for (int s = 0; s < 200; ++s) cur = dirac_step(cur, 1.0, 0.01);
    CHECK(std::abs(norm(cur) - 1.0) < 1e-12);
    for (int s = 0; s < 200; ++s) cur = dirac_step(cur, 1.0, -0.01);
    double m = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        m = std::max(m, std::abs(cur.upper[i] - psi.upper[i]));
        m = std::max(m, std::abs(cur.lower[i] - psi.lower[i]));
    }
    CHECK(m < 1e-10);
}

TEST_CASE("dirac packet moves at the group velocity") {
    // broad packet on a long coarse grid: the wavenumber lattice must sample
    // the narrow momentum envelope finely or the discrete <k/E> drifts
    Grid1D g{4096, 1.0, -2048.0};
    double mass = 1.0, p = 0.5, t = 2.0;
    auto psi = dirac_packet(g, 0.0, p, 64.0, mass);
    auto rec = dirac_window(psi, mass, t, 0.1, 20);
    double got = (position_mean(rec.snapshots.back()) - position_mean(psi)) / t;
    double want = p / std::sqrt(p * p + mass * mass);
    CHECK(std::abs(got - want) < 1e-4);
}
