#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pathint/discrete_action.hpp"
#include "pathint/errors.hpp"
#include "pathint/stationary_path.hpp"

using namespace pathint;

namespace {

constexpr cplx I{0.0, 1.0};

DiscretePath random_honest(std::mt19937_64& g, int N, double T, double scale = 0.8) {
    std::normal_distribution<double> d(0.0, scale);
    CVec f(N + 1);
    for (auto& z : f) z = cplx(d(g), d(g));
    return DiscretePath::honest(TimeGrid(N, T), f);
}

// product of per-step overlaps times exp(-i eps H/hbar), straight from the definitions
cplx direct_cs_amplitude(const DiscretePath& p, double hbar) {
    cplx a = 1.0;
    for (int n = 1; n <= p.grid.N; ++n) {
        cplx xn = p.fwd[n], xm = p.fwd[n - 1];
        a *= std::exp(-0.5 * (std::norm(xn) + std::norm(xm)) + std::conj(xn) * xm - I * p.grid.eps * std::conj(xn) * xm);
    }
    (void)hbar;
    return a;
}

cplx direct_scs_amplitude(const DiscretePath& p, double S) {
    cplx a = 1.0;
    for (int n = 1; n <= p.grid.N; ++n) {
        cplx xb = std::conj(p.fwd[n]), xm = p.fwd[n - 1];
        cplx g = 1.0 + xb * xm;
        cplx ov = std::pow(g, 2 * S) / std::pow((1 + std::norm(p.fwd[n])) * (1 + std::norm(xm)), S);
        cplx H = -S * (1.0 - xb * xm) / g;
        a *= ov * std::exp(-I * p.grid.eps * H);
    }
    return a;
}

}  // namespace

TEST_CASE("grid stores eps N == T") {
    TimeGrid g(7, 1.3);
    CHECK(g.eps * 7 == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(g.t(3) == doctest::Approx(3 * 1.3 / 7));
    CHECK_THROWS_AS(TimeGrid(0, 1.0), ValidationError);
    CHECK_THROWS_AS(TimeGrid(3, -1.0), ValidationError);
}

TEST_CASE("path shape and pinning errors") {
    DiscretePath p(TimeGrid(4, 1.0), 0.1, 0.2);
    p.fwd.pop_back();
    CHECK_THROWS_AS(p.validate(), ShapeError);
    CHECK_THROWS_AS(dtcs_action(p, ho_kernel()), ShapeError);
}

TEST_CASE("dtcs action: trivial examples") {
    DiscretePath zero(TimeGrid(10, 1.0), 0.0, 0.0);
    CHECK(std::abs(dtcs_action(zero, ho_kernel()).total) < 1e-15);
    cplx a(0.3, -0.7), b(-0.4, 0.2);
    DiscretePath one(TimeGrid(1, 0.0), a, b);
    CHECK(std::abs(std::exp(dtcs_action(one, ho_kernel()).total) - cs_overlap(b, a)) < 1e-15);
}

TEST_CASE("dtcs action matches a direct product on random honest paths") {
    std::mt19937_64 g(31);
    for (int k = 0; k < 100; ++k) {
        DiscretePath p = random_honest(g, 2 + k % 9, 0.5 + 0.01 * k);
        ActionBreakdown b = dtcs_action(p, ho_kernel());
        CHECK(std::abs(std::exp(b.total) - direct_cs_amplitude(p, 1.0)) < 1e-12);
        CHECK(std::abs(b.parts_sum() - b.total) < 1e-12);
        // honest paths: eps term exponent is real and non-positive
        CHECK(std::abs(b.eps_term.imag()) < 1e-12);
        CHECK(b.eps_term.real() <= 1e-14);
    }
}

TEST_CASE("dtcs action invariant under a global phase") {
    std::mt19937_64 g(32);
    DiscretePath p = random_honest(g, 12, 1.1);
    DiscretePath q = p;
    const cplx ph = std::polar(1.0, 0.77);
    for (auto& z : q.fwd) z *= ph;
    for (auto& z : q.bwd) z *= std::conj(ph);
    CHECK(std::abs(dtcs_action(p, ho_kernel()).total - dtcs_action(q, ho_kernel()).total) < 1e-13);
}

TEST_CASE("dtcs action on the stationary path approaches the exact exponent") {
    cplx a(0.3, 0.1), b(0.2, -0.4);
    const int N = 10000;
    StationarySolution s = solve_ho_dtcs(TimeGrid(N, 1.0), a, b);
    cplx e = dtcs_action(s.path, ho_kernel()).total;
    cplx ref = -0.5 * (std::norm(a) + std::norm(b)) + std::conj(b) * a * std::exp(-I);
    CHECK(std::abs(e - ref) < 5.0 / N);
}

TEST_CASE("eps term is O(eps) on the stationary path") {
    cplx a(0.5, 0.2), b(-0.1, 0.6);
    cplx e1 = solve_ho_dtcs(TimeGrid(2000, 1.0), a, b).action.eps_term;
    cplx e2 = solve_ho_dtcs(TimeGrid(4000, 1.0), a, b).action.eps_term;
    CHECK(std::abs(e1) / std::abs(e2) == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("dtscs action: constant path, zero time, random paths") {
    const double S = 1.5, T = 0.8;
    DiscretePath zero(TimeGrid(20, T), 0.0, 0.0);
    CHECK(std::abs(dtscs_action(zero, spin_kernel(S), S).total - I * S * T) < 1e-13);
    cplx a(0.3, 0.2), b(-0.5, 0.1);
    DiscretePath one(TimeGrid(1, 0.0), a, b);
    CHECK(std::abs(std::exp(dtscs_action(one, spin_kernel(S), S).total) - scs_overlap(b, a, S)) < 1e-14);
    std::mt19937_64 g(33);
    for (int k = 0; k < 50; ++k) {
        // smooth-ish paths keep per-step phases small
        const int N = 40;
        CVec f(N + 1);
        std::normal_distribution<double> d(0.0, 0.5);
        cplx z0(d(g), d(g)), z1(d(g), d(g));
        for (int n = 0; n <= N; ++n) f[n] = z0 + (z1 - z0) * (double(n) / N) + 0.02 * cplx(d(g), d(g));
        DiscretePath p = DiscretePath::honest(TimeGrid(N, 1.0), f);
        ActionBreakdown e = dtscs_action(p, spin_kernel(2.0), 2.0);
        CHECK(std::abs(std::exp(e.total) - direct_scs_amplitude(p, 2.0)) < 1e-11);
        ActionBreakdown x = dtscs_action(p, spin_kernel(2.0), 2.0, 1.0, ActionMode::second_order_expanded);
        CHECK(std::abs(x.total - x.parts_sum()) < 1e-12);
    }
}

TEST_CASE("dtscs action on the stationary path, S = 20") {
    const double S = 20.0, T = 1.0;
    const int N = 10000;
    cplx a(0.4, -0.3), b(-0.2, 0.5);
    StationarySolution s = solve_spin_dtscs(TimeGrid(N, T), a, b, S);
    cplx R = std::conj(b) * a * std::exp(-I * T);
    cplx ref = S * std::log((1.0 + R) * (1.0 + R) / ((1 + std::norm(b)) * (1 + std::norm(a)))) + I * S * T;
    CHECK(exponent_distance(dtscs_action(s.path, spin_kernel(S), S).total, ref) < 10.0 / N * S);
}

TEST_CASE("dtscs branch and pole guards") {
    DiscretePath p(TimeGrid(2, 0.1), 1.0, 0.0);
    p.bwd[1] = -1.0;  // 1 + xibar_1 xi_0 = 0
    CHECK_THROWS_AS(dtscs_action(p, spin_kernel(1.0), 1.0), PoleError);
    DiscretePath q(TimeGrid(2, 0.1), 1.0, 1.0);
    q.fwd[1] = cplx(-1.1, 0.3);
    q.bwd[1] = 0.0;
    CHECK_THROWS_AS(dtscs_action(q, spin_kernel(1.0), 1.0), BranchError);
}

TEST_CASE("theta-phi parts") {
    CVec th(5, std::numbers::pi / 3), ph(5, 0.4);
    ThetaPhiParts z = dtscs_theta_phi_parts(th, ph, 2.0);
    CHECK(std::abs(z.eps1) + std::abs(z.eps2) + std::abs(z.canonical) < 1e-15);
    const double d = 0.01;
    ThetaPhiParts two = dtscs_theta_phi_parts({std::numbers::pi / 2, std::numbers::pi / 2}, {0.0, d}, 1.0);
    CHECK(std::abs(two.eps1 - (-0.25 * d * d)) < 1e-16);
    CHECK_THROWS_AS(dtscs_theta_phi_parts({0.0, 0.1}, {0.0, 0.0}, 1.0), PoleError);
}

TEST_CASE("dtps action") {
    PhaseHamiltonian h = ho_phase_hamiltonian(0.3);
    PhasePath zero{TimeGrid(5, 1.0), CVec(6, 0.0), CVec(6, 0.0)};
    // only the -hbar/2 zero-point shift survives: -eps sum H = T hbar / 2
    CHECK(std::abs(dtps_action(zero, ho_phase_hamiltonian(1.0)) - 0.5) < 1e-15);
    PhasePath one{TimeGrid(1, 0.5), {0.0, 1.0}, {0.0, 0.0}};
    CHECK(std::abs(dtps_action(one, h) - (-0.5 * (1.0 - 0.3) / 2)) < 1e-15);
    PhasePath bad{TimeGrid(3, 1.0), CVec(3), CVec(4)};
    CHECK_THROWS_AS(dtps_action(bad, h), ShapeError);
}

TEST_CASE("unified exponent equals the direct actions") {
    std::mt19937_64 g(34);
    DiscretePath p = random_honest(g, 9, 0.7, 0.4);
    CHECK(exponent_distance(DiscreteModel::ho().exponent(p), dtcs_action(p, ho_kernel()).total) < 1e-12);
    CHECK(exponent_distance(DiscreteModel::spin(1.5).exponent(p), dtscs_action(p, spin_kernel(1.5), 1.5).total) < 1e-12);
}
