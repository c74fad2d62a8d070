#include <doctest.h>

#include <cmath>
#include <random>

#include "pathint/errors.hpp"
#include "pathint/kernels.hpp"
#include "pathint/stationary_path.hpp"

using namespace pathint;

namespace {

double max_abs(const CVec& v) {
    double m = 0.0;
    for (cplx z : v) m = std::max(m, std::abs(z));
    return m;
}

DiscretePath perturbed(const DiscretePath& p, unsigned seed) {
    DiscretePath q = p;
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d(0.0, 0.05);
    for (int n = 1; n < q.grid.N; ++n) q.fwd[n] += cplx(d(g), d(g)), q.bwd[n] += cplx(d(g), d(g));
    return q;
}

}  // namespace

TEST_CASE("numerical gradient: parallel equals serial") {
    DiscretePath p = perturbed(solve_ho_dtcs(TimeGrid(300, 1.0), {0.4, 0.1}, {-0.2, 0.3}).path, 61);
    DiscreteModel m = DiscreteModel::spin(2.0);
    CVec s = numerical_gradient_serial(p, m), q = numerical_gradient(p, m, 1e-6, 4);
    REQUIRE(s.size() == q.size());
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(s[k] == q[k]);
}

TEST_CASE("numerical gradient matches the analytic residual") {
    for (DiscreteModel m : {DiscreteModel::ho(), DiscreteModel::spin(1.5)}) {
        DiscretePath p = perturbed(solve_ho_dtcs(TimeGrid(40, 1.0), {0.3, 0.2}, {0.1, -0.4}).path, 62);
        CVec num = numerical_gradient_serial(p, m);
        CVec ana = stationarity_residual(p, m);
        // the residual is divided by 2S for spin
        const double scale = m.model == Model::spin ? 2.0 * m.S : 1.0;
        REQUIRE(num.size() == ana.size());
        for (std::size_t k = 0; k < num.size(); ++k) CHECK(std::abs(num[k] - scale * ana[k]) < 1e-7);
    }
}

TEST_CASE("numerical gradient vanishes at stationary paths") {
    DiscretePath h = solve_ho_dtcs(TimeGrid(1000, 1.0), {0.3, 0.2}, {0.1, -0.4}).path;
    CHECK(max_abs(numerical_gradient(h, DiscreteModel::ho())) < 1e-6);
    DiscretePath s = solve_spin_dtscs(TimeGrid(1000, 1.0), {0.3, 0.2}, {0.1, -0.4}, 3.0).path;
    CHECK(max_abs(numerical_gradient(s, DiscreteModel::spin(3.0))) < 1e-6);
}

TEST_CASE("quadrature K agrees with LU on convergent forms") {
    std::vector<QuadraticForm> forms;
    for (int N : {2, 3, 4}) {
        forms.push_back(expand_dtcs(solve_ho_dtcs(TimeGrid(N, 1.0), {0.3, 0.1}, {0.2, 0.2})));
        forms.push_back(expand_dtscs(solve_spin_dtscs(TimeGrid(N, 1.0), {0.3, 0.1}, {0.2, 0.2}, 2.0), 2.0));
    }
    for (const auto& f : forms) {
        REQUIRE(is_convergent(f));
        QuadratureK q = gaussian_quadrature_K(f);
        CHECK(q.converged);
        cplx K = gaussian_K(f).K;
        CHECK(std::abs(q.K - K) < 1e-6 * std::abs(K));
    }
    auto ser = gaussian_quadrature_batch_serial(forms), par = gaussian_quadrature_batch(forms, 3);
    for (std::size_t k = 0; k < forms.size(); ++k) CHECK(ser[k].K == par[k].K);
}

TEST_CASE("quadrature refuses large or divergent forms") {
    QuadraticForm big = expand_dtcs(solve_ho_dtcs(TimeGrid(9, 1.0), 0.1, 0.1));
    CHECK_THROWS_AS(gaussian_quadrature_K(big), DimensionError);
    QuadratureK d = gaussian_quadrature_K(build_kcs_alt_form(TimeGrid(3, 1.0)));
    if (!d.convergent_form) CHECK_FALSE(d.converged);
}

TEST_CASE("parallel_map keeps order and rethrows") {
    auto v = parallel_map(100, [](int i) { return i * i; }, 4);
    for (int i = 0; i < 100; ++i) CHECK(v[i] == i * i);
    CHECK_THROWS_AS(parallel_map(10, [](int i) -> int { if (i == 7) throw ShapeError("x"); return i; }, 2), ShapeError);
}
