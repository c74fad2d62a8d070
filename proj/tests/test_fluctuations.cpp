#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pathint/discrete_action.hpp"
#include "pathint/errors.hpp"
#include "pathint/fluctuations.hpp"
#include "pathint/stationary_path.hpp"

using namespace pathint;

namespace {

constexpr cplx I{0.0, 1.0};

// Brute-force K for a dim 2 form: tensor Gauss-Legendre over the four real coordinates.
cplx brute_force_K(const QuadraticForm& f, double half_width, int panels) {
    QuadratureRule gl = gauss_legendre(8);
    std::vector<double> x, w;
    const double h = 2 * half_width / panels;
    for (int p = 0; p < panels; ++p)
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
            x.push_back(-half_width + h * (p + 0.5 * (gl.nodes[j] + 1)));
            w.push_back(0.5 * h * gl.weights[j]);
        }
    CompensatedSum s;
    const std::size_t m = x.size();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            for (std::size_t c = 0; c < m; ++c)
                for (std::size_t d = 0; d < m; ++d) {
                    CVec eta = {cplx(x[a], x[b]), cplx(x[c], x[d])};
                    s.add(w[a] * w[b] * w[c] * w[d] * std::exp(f.exponent(eta)));
                }
    return s.value() * f.normalization * f.normalization / (std::numbers::pi * std::numbers::pi);
}

}  // namespace

TEST_CASE("DTCS proper: unit triangular, K = 1") {
    StationarySolution s = solve_ho_dtcs(TimeGrid(2, 1.0), 0.3, 0.2);
    QuadraticForm one = expand_dtcs(s);
    CHECK(one.dim == 1);
    CHECK(std::abs(one.matrix.get(0, 0) - 1.0) < 1e-15);
    for (int N : {2, 3, 10, 101, 1001, 2000}) {
        QuadraticForm f = expand_dtcs(solve_ho_dtcs(TimeGrid(N, 1.0), {0.4, 0.1}, {-0.2, 0.3}));
        if (f.dim > 1) CHECK(std::abs(f.matrix.get(1, 0) + (1.0 - I * (1.0 / N))) < 1e-15);
        DetResult d = gaussian_K(f);
        CHECK(std::abs(d.K - 1.0) < 1e-12);
        CHECK(d.convergent);
    }
}

TEST_CASE("DTCS proper form reproduces the second-order change of the action") {
    const int N = 50;
    cplx a(0.4, 0.1), b(-0.2, 0.3);
    StationarySolution s = solve_ho_dtcs(TimeGrid(N, 1.0), a, b);
    QuadraticForm f = expand_dtcs(s);
    std::mt19937_64 g(51);
    std::normal_distribution<double> d(0.0, 0.1);
    for (int k = 0; k < 10; ++k) {
        CVec eta(N - 1);
        for (auto& z : eta) z = cplx(d(g), d(g));
        DiscretePath p = s.path;
        for (int n = 1; n < N; ++n) p.fwd[n] += eta[n - 1], p.bwd[n] += std::conj(eta[n - 1]);
        cplx delta = dtcs_action(p, ho_kernel()).total - dtcs_action(s.path, ho_kernel()).total;
        // the HO exponent is exactly quadratic, linear terms vanish at the stationary point
        CHECK(std::abs(delta - f.exponent(eta)) < 1e-12);
    }
}

TEST_CASE("semi-eps determinants") {
    for (int N : {3, 5, 7, 21}) {
        TimeGrid g(N, 1.0);
        const cplx a = 1.0 - 2.0 * I * g.eps;
        bool sing = false;
        cplx ld = form_log_det(build_semi_eps_form(g), &sing);
        CHECK_FALSE(sing);
        CHECK(std::abs(std::exp(ld) - std::pow(a, (N - 1) / 2)) < 1e-12);
    }
    for (int N : {2, 4, 10}) {
        bool sing = false;
        form_log_det(build_semi_eps_form(TimeGrid(N, 1.0)), &sing);
        CHECK(sing);
        CHECK_THROWS_AS(gaussian_K(build_semi_eps_form(TimeGrid(N, 1.0))), SingularMatrixError);
    }
    TimeGrid g(21, 1.0);
    DetResult d = gaussian_K(build_semi_eps_form(g));
    const double abs_a = std::abs(1.0 - 2.0 * I * g.eps);
    CHECK(std::abs(d.K) == doctest::Approx(std::pow(2.0, 20) * std::pow(abs_a, -10.0)).epsilon(1e-12));
    CHECK(d.growth_rate == doctest::Approx(4.0).epsilon(0.01));
    CHECK_FALSE(d.convergent);
}

TEST_CASE("KCS alternative form diverges like 2^(N-1)") {
    TimeGrid g3(3, 0.6);
    QuadraticForm f3 = build_kcs_alt_form(g3);
    Eigen::MatrixXcd m = f3.matrix.dense();
    CHECK(std::abs(std::exp(form_log_det(f3)) - (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0))) < 1e-14);
    std::vector<double> lk;
    for (int N = 11; N <= 31; ++N) lk.push_back(std::log(std::abs(gaussian_K(build_kcs_alt_form(TimeGrid(N, 1.0))).K)));
    for (std::size_t k = 1; k < lk.size(); ++k) CHECK(std::exp(lk[k] - lk[k - 1]) == doctest::Approx(2.0).epsilon(0.05));
    const double slope = (lk.back() - lk.front()) / 20.0;
    CHECK(slope == doctest::Approx(std::numbers::ln2).epsilon(0.02));
}

TEST_CASE("DTSCS proper") {
    QuadraticForm z = expand_dtscs(solve_spin_dtscs(TimeGrid(100, 1.0), 0.0, 0.0, 3.0), 3.0);
    CHECK(std::abs(gaussian_K(z).K - 1.0) < 1e-12);
    cplx a(0.5, -0.1), b(0.2, 0.4);
    StationarySolution s = solve_spin_dtscs(TimeGrid(2001, 1.0), a, b, 20.0);
    DetResult d = gaussian_K(expand_dtscs(s, 20.0));
    CHECK(std::abs(d.K - 1.0) < 0.1);
    cplx R = s.conserved->R;
    CHECK(std::abs(expand_dtscs(s, 20.0).measure_normalization - 41.0 / ((1.0 + R) * (1.0 + R))) < 1e-12);
}

TEST_CASE("DTSCS fluctuation width scales as 1/S") {
    cplx a(0.3, 0.2), b(-0.1, 0.4);
    std::vector<double> v;
    for (double S : {5.0, 20.0, 80.0}) {
        StationarySolution s = solve_spin_dtscs(TimeGrid(200, 1.0), a, b, S);
        v.push_back(std::abs(mode_variance(expand_dtscs(s, S), 100)));
    }
    CHECK(v[0] / v[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(v[1] / v[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("KSCS discretization: decoupled limit, roots and closed form") {
    DetResult d0 = gaussian_K(build_kscs_form(TimeGrid(50, 1.0), 0.0));
    CHECK(std::abs(std::exp(d0.log_det) - 1.0) < 1e-12);
    const cplx R(0.2, 0.1);
    TimeGrid g(10000, 1.0);
    TransferRoots r = kscs_transfer_roots(g, R);
    const cplx q = (1.0 + R) * (1.0 + R);
    CHECK(std::abs(r.plus - (1.0 + I * g.eps * (1.0 + 2.0 * R) * R / q)) < 1e-3 * g.eps);
    CHECK(std::abs(r.minus - I * g.eps * R / q) < 1e-3 * std::abs(I * g.eps * R / q));
    TimeGrid big(100000, 1.0);
    cplx det = std::exp(form_log_det(build_kscs_form(big, R)));
    CHECK(std::abs(det - std::exp(I * (1.0 + 2.0 * R) * R / q)) < 10.0 / big.N);
}

TEST_CASE("tridiagonal recurrence agrees with LU") {
    const cplx a(1.0, 0.02), b(0.9, -0.1), c(0.05, 0.03);
    for (int dim : {1, 2, 5, 40}) {
        QuadraticForm f;
        f.dim = dim;
        f.matrix = BandedMatrix(dim, 1, 1);
        for (int i = 0; i < dim; ++i) {
            f.matrix.set(i, i, a);
            if (i) f.matrix.set(i, i - 1, -b), f.matrix.set(i - 1, i, -c);
        }
        cplx lu = std::exp(form_log_det(f));
        CHECK(std::abs(tridiagonal_closed_form_det(a, b, c, dim) - lu) < 1e-12 * std::abs(lu));
    }
}

TEST_CASE("K from LU equals brute-force integration on convergent dim 2 forms") {
    QuadraticForm ho = expand_dtcs(solve_ho_dtcs(TimeGrid(3, 1.0), {0.1, 0.2}, {0.3, -0.1}));
    REQUIRE(is_convergent(ho));
    cplx bf = brute_force_K(ho, 6.0, 6);
    CHECK(std::abs(bf - gaussian_K(ho).K) < 1e-6 * std::abs(bf));
    StationarySolution s = solve_spin_dtscs(TimeGrid(3, 1.0), {0.2, 0.1}, {-0.1, 0.3}, 1.0);
    QuadraticForm sp = expand_dtscs(s, 1.0);
    REQUIRE(is_convergent(sp));
    bf = brute_force_K(sp, 6.0, 6);
    CHECK(std::abs(bf - gaussian_K(sp).K) < 1e-6 * std::abs(bf));
}

TEST_CASE("convergence flag follows the Hermitian part") {
    QuadraticForm f;
    f.dim = 2;
    f.matrix = BandedMatrix(2, 1, 1);
    f.matrix.set(0, 0, 1.0);
    f.matrix.set(1, 1, cplx(-0.5, 3.0));
    CHECK_FALSE(is_convergent(f));
    f.matrix.set(1, 1, cplx(0.5, 3.0));
    CHECK(is_convergent(f));
    CHECK(parse_provenance(provenance_name(Provenance::kscs_discretized)) == Provenance::kscs_discretized);
    CHECK_THROWS_AS(parse_provenance("nope"), ValidationError);
}
