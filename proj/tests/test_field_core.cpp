#include "doctest.h"

#include <cmath>

#include "csbohm/errors.hpp"
#include "csbohm/fft.hpp"
#include "csbohm/field.hpp"
#include "csbohm/rng.hpp"
#include "oracles.hpp"

using namespace csbohm;

namespace {
Grid1D wide_grid() { return Grid1D{512, 0.0625, -16.0}; } // [-16,16)
} // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid1D(100, 0.1, 0.0), StructuralError);
    CHECK_THROWS_AS(Grid1D(128, 0.0, 0.0), StructuralError);
    Grid1D g{128, 0.25, -16.0};
    CHECK(g.x(0) == -16.0);
    CHECK(g.xmax() == doctest::Approx(-16.0 + 127 * 0.25));
}

TEST_CASE("inner product basics") {
    Grid1D g = wide_grid();
    auto psi = gaussian_packet(g, 0.0, 0.0, 1.0);
    Complex self = inner_product(psi, psi);
    CHECK(self.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(self.imag()) < 1e-14);

    auto phi0 = harmonic_eigenstate(g, 0);
    auto phi1 = harmonic_eigenstate(g, 1);
    CHECK(std::abs(inner_product(phi0, phi1)) < 1e-12);

    Grid1D other{256, 0.1, -12.8};
    auto mismatched = gaussian_packet(other, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(inner_product(psi, mismatched), GridMismatch);
}

TEST_CASE("inner product of displaced gaussians matches refined quadrature") {
    Grid1D g = wide_grid();
    auto a = gaussian_packet(g, 0.0, 0.0, 1.0);
    auto b = gaussian_packet(g, 2.0, 0.0, 1.0);
    Complex got = inner_product(a, b);
    Complex want = oracle::quad_over_grid(
        [](double x) { return std::conj(oracle::gaussian(x, 0.0, 0.0, 1.0)) *
                              oracle::gaussian(x, 2.0, 0.0, 1.0); },
        g);
    CHECK(std::abs(got - want) < 1e-9);
}

TEST_CASE("inner product conjugate symmetry is exact") {
    Grid1D g = wide_grid();
    Rng rng(7);
    CVec va(g.n), vb(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        va[i] = Complex(rng.normal(), rng.normal());
        vb[i] = Complex(rng.normal(), rng.normal());
    }
    WavefunctionField A(g, va, 0.0), B(g, vb, 0.0);
    Complex ab = inner_product(A, B);
    Complex ba = inner_product(B, A);
    CHECK(ab.real() == std::conj(ba).real());
    CHECK(ab.imag() == std::conj(ba).imag());
}

TEST_CASE("cauchy-schwarz on random fields") {
    Grid1D g{256, 0.125, -16.0};
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        CVec va(g.n), vb(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            va[i] = Complex(rng.normal(), rng.normal());
            vb[i] = Complex(rng.normal(), rng.normal());
        }
        WavefunctionField A(g, va, 0.0), B(g, vb, 0.0);
        double lhs = std::norm(inner_product(A, B));
        double rhs = inner_product(A, A).real() * inner_product(B, B).real();
        CHECK(lhs <= rhs + 1e-12);
    }
}

TEST_CASE("amplitude contract") {
    Grid1D g = wide_grid();
    auto psi = gaussian_packet(g, 0.0, 0.5, 1.0);
    CHECK(amplitude(psi, psi).value.real() == doctest::Approx(1.0).epsilon(1e-12));

    auto phi0 = harmonic_eigenstate(g, 0);
    auto phi1 = harmonic_eigenstate(g, 1);
    CHECK_THROWS_AS(amplitude(phi0, phi1), DegenerateOverlap);

    auto pi = gaussian_packet(g, 0.0, 1.0, 1.0);
    auto pf = gaussian_packet(g, 1.0, 1.0, 1.0);
    Complex want = oracle::quad_over_grid(
        [](double x) { return std::conj(oracle::gaussian(x, 1.0, 1.0, 1.0)) *
                              oracle::gaussian(x, 0.0, 1.0, 1.0); },
        g);
    CHECK(std::abs(amplitude(pf, pi).value - want) < 1e-9);
}

TEST_CASE("gaussian packet geometry and moments") {
    Grid1D g = wide_grid();
    auto psi = gaussian_packet(g, 1.5, 0.0, 2.0);
    CHECK(position_mean(psi) == doctest::Approx(1.5).epsilon(1e-8));
    CHECK(position_variance(psi) == doctest::Approx(4.0).epsilon(1e-8));
    for (const Complex& z : psi.values) CHECK(z.imag() == 0.0);

    CHECK_THROWS_AS(gaussian_packet(g, 0.0, 0.0, 0.1), PacketTooNarrow);
    CHECK_THROWS_AS(gaussian_packet(g, 14.0, 0.0, 1.0), PacketTooWide);
}

TEST_CASE("gaussian momentum shows up as the spectral peak") {
    Grid1D g = wide_grid();
    double p = 2.0 * M_PI * 16.0 / g.length(); // on the wavenumber lattice
    auto psi = gaussian_packet(g, 0.0, p, 1.0);
    CVec spec = psi.values;
    fft_forward(spec);
    RVec ks = wavenumbers(g.n, g.spacing);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < g.n; ++i)
        if (std::abs(spec[i]) > std::abs(spec[peak])) peak = i;
    CHECK(ks[peak] == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("harmonic eigenstates are orthonormal and satisfy the ladder form") {
    Grid1D g = wide_grid();
    std::vector<WavefunctionField> phi;
    for (unsigned n = 0; n < 6; ++n) phi.push_back(harmonic_eigenstate(g, n));
    for (unsigned m = 0; m < 6; ++m)
        for (unsigned n = 0; n < 6; ++n) {
            double want = (m == n) ? 1.0 : 0.0;
            CHECK(std::abs(inner_product(phi[m], phi[n]) - want) < 1e-10);
        }
    // phi1(x) = sqrt(2) x phi0(x)
    for (std::size_t i = 0; i < g.n; ++i) {
        double want = std::sqrt(2.0) * g.x(i) * phi[0].values[i].real();
        CHECK(phi[1].values[i].real() == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("entangled gaussian correlation matches the mode asymmetry") {
    Grid1D g{128, 0.25, -16.0};
    double sp = 2.0, sm = 1.0;
    auto Psi = entangled_gaussian(g, g, 0.0, 0.0, sp, sm);
    CHECK(norm(Psi) == doctest::Approx(1.0).epsilon(1e-10));

    double w = 0.0, m1 = 0.0, m2 = 0.0, v1 = 0.0, v2 = 0.0, cov = 0.0;
    for (std::size_t i1 = 0; i1 < g.n; ++i1)
        for (std::size_t i2 = 0; i2 < g.n; ++i2) {
            double pr = std::norm(Psi.at(i1, i2));
            w += pr;
            m1 += pr * g.x(i1);
            m2 += pr * g.x(i2);
        }
    m1 /= w; m2 /= w;
    for (std::size_t i1 = 0; i1 < g.n; ++i1)
        for (std::size_t i2 = 0; i2 < g.n; ++i2) {
            double pr = std::norm(Psi.at(i1, i2));
            v1 += pr * (g.x(i1) - m1) * (g.x(i1) - m1);
            v2 += pr * (g.x(i2) - m2) * (g.x(i2) - m2);
            cov += pr * (g.x(i1) - m1) * (g.x(i2) - m2);
        }
    double corr = cov / std::sqrt(v1 * v2);
    double want = (sp * sp - sm * sm) / (sp * sp + sm * sm);
    CHECK(corr == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("product state factorizes") {
    Grid1D g{128, 0.25, -16.0};
    auto a = gaussian_packet(g, -1.0, 0.0, 1.0);
    auto b = gaussian_packet(g, 1.0, 0.5, 1.5);
    auto Psi = product_state(a, b);
    CHECK(Psi.normalized);
    CHECK(std::abs(Psi.at(10, 20) - a.values[10] * b.values[20]) < 1e-15);
}

TEST_CASE("dirac packet is normalized and well placed") {
    Grid1D g{1024, 0.125, -64.0};
    auto psi = dirac_packet(g, 0.0, 0.5, 2.0, 1.0);
    CHECK(norm(psi) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(position_mean(psi) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(boundary_magnitude(psi) < 1e-12);
}

TEST_CASE("boundary magnitude flags a leaking field") {
    Grid1D g = wide_grid();
    auto snug = gaussian_packet(g, 0.0, 0.0, 1.0);
    CHECK(boundary_magnitude(snug) < 1e-12);
    CVec flat(g.n, Complex(0.1, 0.0));
    WavefunctionField bad(g, flat, 0.0);
    CHECK(boundary_magnitude(bad) == doctest::Approx(0.1));
}

TEST_CASE("normalized flag is enforced") {
    Grid1D g{128, 0.25, -16.0};
    CVec v(g.n, Complex(1.0, 0.0));
    CHECK_THROWS_AS(WavefunctionField(g, v, 0.0, true), StructuralError);
}
