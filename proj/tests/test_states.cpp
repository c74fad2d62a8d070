#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pathint/errors.hpp"
#include "pathint/states.hpp"

using namespace pathint;

namespace {

constexpr cplx I{0.0, 1.0};

// <xi|xi'> summed over the Fock basis, independent of the closed form
cplx fock_overlap(cplx a, cplx b) {
    cplx s = 0.0, term = 1.0;
    for (int n = 0; n < 200; ++n) {
        if (n) term *= std::conj(a) * b / double(n);
        s += term;
    }
    return s * std::exp(-0.5 * (std::norm(a) + std::norm(b)));
}

// <xi|xi'> summed over |M>, coefficients from binomials
cplx spin_overlap_sum(cplx a, cplx b, int two_s) {
    cplx s = 0.0;
    for (int k = 0; k <= two_s; ++k) s += std::tgamma(two_s + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(two_s - k + 1.0)) * std::pow(std::conj(a) * b, k);
    return s / (std::pow(1.0 + std::norm(a), 0.5 * two_s) * std::pow(1.0 + std::norm(b), 0.5 * two_s));
}

}  // namespace

TEST_CASE("cs overlap examples and Fock oracle") {
    CHECK(std::abs(cs_overlap(0.0, 0.0) - 1.0) < 1e-15);
    CHECK(std::abs(cs_overlap({0.7, -0.2}, {0.7, -0.2}) - 1.0) < 1e-15);
    CHECK(std::abs(cs_overlap(1.0, 0.0) - 0.6065306597126334) < 1e-15);
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 50; ++k) {
        cplx a(u(g), u(g)), b(u(g), u(g));
        CHECK(std::abs(cs_overlap(a, b) - fock_overlap(a, b)) < 1e-13);
        CHECK(std::abs(cs_overlap(a, b)) <= 1.0 + 1e-15);
    }
}

TEST_CASE("scs overlap examples and binomial oracle") {
    CHECK(std::abs(scs_overlap(0.0, 1.0, 0.5) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(scs_overlap(0.0, 1.0, 1.0) - 0.5) < 1e-15);
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int two_s : {1, 2, 5, 12}) {
        for (int k = 0; k < 20; ++k) {
            cplx a(u(g), u(g)), b(u(g), u(g));
            CHECK(std::abs(scs_overlap(a, a, 0.5 * two_s) - 1.0) < 1e-13);
            CHECK(std::abs(scs_overlap(a, b, 0.5 * two_s) - spin_overlap_sum(a, b, two_s)) < 1e-12);
        }
    }
}

TEST_CASE("exact amplitude examples") {
    CHECK(std::abs(exact_cs_amplitude(0.0, 0.0, 2.3) - 1.0) < 1e-15);
    CHECK(std::abs(exact_cs_amplitude(1.0, 1.0, std::numbers::pi) - std::exp(-2.0)) < 1e-15);
    cplx a(0.3, -0.4), b(-0.1, 0.8);
    CHECK(std::abs(exact_cs_amplitude(a, b, 0.0) - cs_overlap(b, a)) < 1e-15);
    CHECK(std::abs(exact_scs_amplitude(0.0, 0.0, 1.7, 0.5) - std::exp(I * 0.85)) < 1e-15);
    CHECK(std::abs(exact_scs_amplitude(a, b, 0.0, 2.5) - scs_overlap(b, a, 2.5)) < 1e-14);
    CHECK(std::abs(exact_scs_amplitude(1.0, 1.0, 2 * std::numbers::pi, 1.0) - 1.0) < 1e-14);
}

TEST_CASE("unitarity symmetry and contraction") {
    std::mt19937_64 g(9);
    std::uniform_real_distribution<double> u(-1.5, 1.5), uT(-4, 4);
    for (int k = 0; k < 100; ++k) {
        cplx a(u(g), u(g)), b(u(g), u(g));
        double T = uT(g);
        CHECK(std::abs(exact_cs_amplitude(a, b, T) - std::conj(exact_cs_amplitude(b, a, -T))) < 1e-12);
        CHECK(std::abs(exact_scs_amplitude(a, b, T, 1.5) - std::conj(exact_scs_amplitude(b, a, -T, 1.5))) < 1e-12);
        CHECK(std::abs(exact_cs_amplitude(a, b, T)) <= 1.0 + 1e-14);
        CHECK(std::abs(exact_scs_amplitude(a, b, T, 3.0)) <= 1.0 + 1e-14);
    }
}

TEST_CASE("exponents are logs of the amplitudes") {
    cplx a(0.4, 0.1), b(-0.2, 0.6);
    CHECK(std::abs(std::exp(exact_cs_exponent(a, b, 1.3)) - exact_cs_amplitude(a, b, 1.3)) < 1e-15);
    CHECK(std::abs(std::exp(exact_scs_exponent(a, b, 1.3, 7.0)) - exact_scs_amplitude(a, b, 1.3, 7.0)) < 1e-14);
    CHECK(exponent_distance(cplx(0.1, 0.2), cplx(0.1, 0.2 + 2 * std::numbers::pi)) < 1e-14);
}

TEST_CASE("phase-point and sphere round trips") {
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> u(-3, 3), th(1e-6, std::numbers::pi - 1e-3), ph(0, 2 * std::numbers::pi);
    for (int k = 0; k < 1000; ++k) {
        PhasePoint p{u(g), u(g), 1.7};
        CHECK(std::abs(p.xi() - (p.q + I * p.p) / std::sqrt(2 * 1.7)) < 1e-15);
        PhasePoint r = PhasePoint::from_xi(p.xi(), 1.7);
        CHECK(std::abs(r.p - p.p) < 1e-13);
        CHECK(std::abs(r.q - p.q) < 1e-13);
        SpherePoint s{th(g), ph(g)};
        cplx xi = s.xi();
        CHECK(std::abs(xi - std::polar(std::tan(s.theta / 2), s.phi)) < 1e-12 * (1 + std::abs(xi)));
        CHECK(std::abs(SpherePoint::from_xi(xi).xi() - xi) < 1e-12 * (1 + std::abs(xi)));
    }
    const SpherePoint pole{std::numbers::pi, 0.0};
    CHECK_THROWS_AS(pole.xi(), PoleError);
}

TEST_CASE("kernels: closed forms and partials against central differences") {
    HamiltonianKernel h = ho_kernel(1.0), s = spin_kernel(2.5, 1.0);
    cplx xb(0.3, -0.2), x(0.5, 0.4);
    CHECK(std::abs(h.value(xb, x) - xb * x) < 1e-15);
    CHECK(std::abs(s.value(xb, x) - (-2.5 * (1.0 - xb * x) / (1.0 + xb * x))) < 1e-15);
    CHECK(kernel_partials_error(h, xb, x) < 1e-6);
    CHECK(kernel_partials_error(s, xb, x) < 1e-6);
}

TEST_CASE("spin validation and powers") {
    CHECK_THROWS_AS(twice_spin(0.3), ValidationError);
    CHECK_THROWS_AS(twice_spin(0.0), ValidationError);
    CHECK(twice_spin(2.5) == 5);
    cplx z(0.2, 0.3);
    CHECK(std::abs(one_plus_pow(z, 7) - std::pow(1.0 + z, 7)) < 1e-14);
    CHECK(std::abs(one_plus_pow(z, 100) - std::exp(100.0 * std::log(1.0 + z))) < 1e-10 * std::abs(std::pow(1.0 + z, 100)));
}

TEST_CASE("continuous-time reference curve") {
    cplx a(0.5, 0.2), b(-0.3, 0.1);
    const double T = 1.4;
    auto [x0, xb0] = ct_stationary_reference(0.0, a, b, T);
    CHECK(std::abs(x0 - a) < 1e-15);
    CHECK(std::abs(xb0 - std::conj(b) * std::exp(-I * T)) < 1e-15);
    auto [xT, xbT] = ct_stationary_reference(T, a, b, T);
    CHECK(std::abs(xbT - std::conj(b)) < 1e-15);
    CHECK(std::abs(xT - a * std::exp(-I * T)) < 1e-15);
    cplx bs = a * std::exp(-I * T);
    for (double t : {0.1, 0.7, 1.3}) {
        auto [x, xb] = ct_stationary_reference(t, a, bs, T);
        CHECK(std::abs(xb - std::conj(x)) < 1e-15);
    }
}
