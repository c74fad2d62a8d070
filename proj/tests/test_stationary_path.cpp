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

double max_abs(const CVec& v) {
    double m = 0.0;
    for (cplx z : v) m = std::max(m, std::abs(z));
    return m;
}
}  // namespace

TEST_CASE("HO closed form") {
    cplx a(0.6, 0.2), b(-0.3, 0.5);
    TimeGrid g(1000, 1.0);
    StationarySolution s = solve_ho_dtcs(g, a, b);
    CHECK(s.path.fwd[0] == a);
    for (int n : {1, 17, 500, 999}) {
        CHECK(std::abs(s.path.fwd[n] - std::pow(cplx(1.0, -g.eps), n) * a) < 1e-13);
        CHECK(std::abs(s.path.bwd[n] - std::pow(cplx(1.0, -g.eps), 1000 - n) * std::conj(b)) < 1e-13);
    }
    CHECK(s.residual_inf < 1e-14);
    StationarySolution z = solve_ho_dtcs(g, 0.0, b);
    for (int n = 0; n < 1000; ++n) CHECK(z.path.fwd[n] == cplx(0.0));
}

TEST_CASE("HO converges to the continuum curve") {
    const int N = 100000;
    cplx a(0.6, 0.2), b(-0.3, 0.5);
    StationarySolution s = solve_ho_dtcs(TimeGrid(N, 1.0), a, b);
    double e = 0.0;
    for (int n = 0; n <= N; n += 97) e = std::max(e, std::abs(s.path.fwd[n] - a * std::exp(-I * (n * 1.0 / N))));
    CHECK(e < 10.0 / N);
}

TEST_CASE("spin: pole-aligned and real precession cases") {
    StationarySolution z = solve_spin_dtscs(TimeGrid(100, 1.0), 0.0, 0.0, 1.0);
    CHECK(max_abs(z.path.fwd) == 0.0);
    CHECK(std::abs(z.conserved->R) == 0.0);
    CHECK(std::abs(z.conserved->P) == 0.0);
    const double T = 0.9;
    const int N = 2000;
    cplx a(0.5, 0.3), b = a * std::exp(-I * T);
    StationarySolution s = solve_spin_dtscs(TimeGrid(N, T), a, b, 2.0);
    double d = 0.0;
    for (int n = 1; n < N; ++n) d = std::max(d, std::abs(s.path.bwd[n] - std::conj(s.path.fwd[n])));
    CHECK(d < 10.0 / N);
}

TEST_CASE("spin: conserved R and stationarity") {
    const int N = 10000;
    cplx a(0.5, 0.0), b(0.0, 0.4);
    StationarySolution s = solve_spin_dtscs(TimeGrid(N, 1.0), a, b, 3.0);
    REQUIRE(s.conserved);
    CHECK(std::abs(s.conserved->R - std::conj(b) * a * std::exp(-I)) < 10.0 / N);
    CHECK(s.conserved->spread() <= 1.0 / N);
    CHECK(std::abs(s.conserved->P - (1.0 + I * (1.0 / N)) * s.conserved->R) < 10.0 / (double(N) * N) + 1e-12);
    CHECK(max_abs(stationarity_residual(s.path, DiscreteModel::spin(3.0))) < 1e-9);
    CHECK(s.final_jump > 0.05);
}

TEST_CASE("degenerate spin endpoints") {
    CHECK_THROWS_AS(solve_spin_dtscs(TimeGrid(100, std::numbers::pi), 1.0, 1.0, 1.0), DegenerateError);
}

TEST_CASE("general Newton agrees with the closed forms") {
    cplx a(0.4, -0.2), b(0.1, 0.7);
    TimeGrid g(200, 1.2);
    StationarySolution ho = solve_ho_dtcs(g, a, b);
    StationarySolution nh = solve_general_newton(g, DiscreteModel::ho(), a, b);
    StationarySolution sp = solve_spin_dtscs(g, a, b, 2.5);
    StationarySolution ns = solve_general_newton(g, DiscreteModel::spin(2.5), a, b);
    double eh = 0.0, es = 0.0;
    for (int n = 0; n <= 200; ++n) {
        eh = std::max({eh, std::abs(ho.path.fwd[n] - nh.path.fwd[n]), std::abs(ho.path.bwd[n] - nh.path.bwd[n])});
        es = std::max({es, std::abs(sp.path.fwd[n] - ns.path.fwd[n]), std::abs(sp.path.bwd[n] - ns.path.bwd[n])});
    }
    CHECK(eh < 1e-9);
    CHECK(es < 1e-8);
    CHECK(nh.residual_inf < 1e-10);
    StationarySolution two = solve_general_newton(TimeGrid(2, 0.5), DiscreteModel::ho(), a, b);
    CHECK(two.iterations <= 1);
}

TEST_CASE("analytic Jacobian matches differences of the residual") {
    cplx a(0.3, 0.2), b(-0.4, 0.1);
    TimeGrid g(6, 0.9);
    DiscreteModel m = DiscreteModel::spin(1.5);
    DiscretePath p = solve_spin_dtscs(g, a, b, 1.5).path;
    p.fwd[2] += cplx(0.05, -0.02);
    p.bwd[3] += cplx(-0.03, 0.04);
    Eigen::MatrixXcd J = stationarity_jacobian(p, m).dense();
    const double h = 1e-6;
    for (int k = 0; k < 2 * (g.N - 1); ++k) {
        DiscretePath up = p, dn = p;
        cplx& u = (k % 2 == 0) ? up.bwd[k / 2 + 1] : up.fwd[k / 2 + 1];
        cplx& d = (k % 2 == 0) ? dn.bwd[k / 2 + 1] : dn.fwd[k / 2 + 1];
        u += h;
        d -= h;
        CVec ru = stationarity_residual(up, m), rd = stationarity_residual(dn, m);
        for (int r = 0; r < J.rows(); ++r) CHECK(std::abs((ru[r] - rd[r]) / (2 * h) - J(r, k)) < 1e-6);
    }
}

TEST_CASE("spin stationary action decomposition") {
    const double S = 2.0, T = 1.0;
    StationarySolution z = solve_spin_dtscs(TimeGrid(100, T), 0.0, 0.0, S);
    CHECK(std::abs(stationary_action_spin(z, S).total - I * S * T) < 1e-13);
    const int N = 10000;
    std::mt19937_64 g(41);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int k = 0; k < 5; ++k) {
        cplx a(u(g), u(g)), b(u(g), u(g));
        StationarySolution s = solve_spin_dtscs(TimeGrid(N, T), a, b, S);
        SpinStationaryAction act = stationary_action_spin(s, S);
        cplx R = s.conserved->R_continuum;
        CHECK(std::abs(act.interior - I * S * T) < 10.0 / N);
        cplx disc = act.final_discontinuity + act.initial_discontinuity;
        CHECK(exponent_distance(disc, S * std::log(std::pow(1.0 + R, 4) / ((1 + std::norm(a)) * (1 + std::norm(b))))) < 10.0 / N);
        CHECK(exponent_distance(act.total, exact_scs_exponent(a, b, T, S)) < 10.0 / N);
    }
}

TEST_CASE("HO stationary exponent equals the exact amplitude up to O(1/N)") {
    cplx a(0.7, -0.1), b(0.2, 0.3);
    double e1 = exponent_distance(solve_ho_dtcs(TimeGrid(1000, 2.0), a, b).action.total, exact_cs_exponent(a, b, 2.0));
    double e2 = exponent_distance(solve_ho_dtcs(TimeGrid(2000, 2.0), a, b).action.total, exact_cs_exponent(a, b, 2.0));
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("phase-space classical path") {
    PhaseHamiltonian h = ho_phase_hamiltonian();
    ClassicalPhaseSolution z = solve_dtps_classical(TimeGrid(50, 1.0), h, 0.0, 0.0);
    CHECK(max_abs(z.path.q) < 1e-15);
    const int N = 2000;
    const double T = std::numbers::pi / 2;
    ClassicalPhaseSolution s = solve_dtps_classical(TimeGrid(N, T), h, 0.0, 1.0);
    double e = 0.0;
    for (int n = 0; n <= N; ++n) e = std::max(e, std::abs(s.path.q[n] - std::sin(n * T / N)));
    CHECK(e < 5.0 / N);
    CHECK(s.residual_inf < 1e-12);
    CHECK(std::abs(s.action - ho_classical_action(0.0, 1.0, T)) < 5.0 / N);
    CHECK_THROWS_AS(solve_dtps_classical(TimeGrid(100, std::numbers::pi), h, 0.0, 1.0), SingularBVPError);
}
