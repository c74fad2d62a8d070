#include <doctest.h>

#include <cmath>
#include <random>

#include "pathint/errors.hpp"
#include "pathint/linalg.hpp"

using namespace pathint;

namespace {

BandedMatrix random_band(std::mt19937_64& g, int n, int kl, int ku) {
    std::normal_distribution<double> d;
    BandedMatrix m(n, kl, ku);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) m.set(i, j, cplx(d(g), d(g)));
    return m;
}

}  // namespace

TEST_CASE("band LU determinant and solve agree with dense Eigen LU") {
    std::mt19937_64 g(11);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + trial % 17, kl = trial % 3, ku = (trial / 3) % 4;
        BandedMatrix m = random_band(g, n, kl, ku);
        Eigen::MatrixXcd d = m.dense();
        Eigen::PartialPivLU<Eigen::MatrixXcd> ref(d);
        BandedLU lu(m);
        const cplx det_ref = ref.determinant();
        CHECK(std::abs(lu.det() - det_ref) <= 1e-10 * std::abs(det_ref));
        CVec b(n);
        Eigen::VectorXcd be(n);
        for (int i = 0; i < n; ++i) b[i] = be[i] = cplx(std::sin(i + 1.0), std::cos(2.0 * i));
        CVec x = lu.solve(b);
        Eigen::VectorXcd xe = ref.solve(be);
        for (int i = 0; i < n; ++i) CHECK(std::abs(x[i] - xe[i]) <= 1e-9 * (1.0 + std::abs(xe[i])));
    }
}

TEST_CASE("band matrix rejects entries outside the band") {
    BandedMatrix m(5, 1, 1);
    CHECK_THROWS_AS(m.set(0, 3, 1.0), ShapeError);
    CHECK(m.get(0, 3) == cplx(0.0));
}

TEST_CASE("singular band matrix: log det is -inf and solve throws") {
    BandedMatrix m(3, 1, 1);
    m.set(0, 0, 1.0);
    m.set(0, 1, 2.0);
    m.set(1, 0, 2.0);
    m.set(1, 1, 4.0);
    m.set(2, 2, 1.0);
    BandedLU lu(m);
    CHECK(lu.singular());
    CHECK(lu.det() == cplx(0.0));
    CHECK_THROWS_AS(lu.solve(CVec(3, 1.0)), SingularMatrixError);
}

TEST_CASE("tridiagonal minors match dense leading determinants") {
    std::mt19937_64 g(5);
    BandedMatrix m = random_band(g, 8, 1, 1);
    CVec diag(8), sub(8), super(8);
    for (int i = 0; i < 8; ++i) {
        diag[i] = m.get(i, i);
        if (i) sub[i] = m.get(i, i - 1), super[i] = m.get(i - 1, i);
    }
    CVec D = tridiagonal_minors(diag, sub, super);
    Eigen::MatrixXcd d = m.dense();
    for (int k = 1; k <= 8; ++k) {
        cplx ref = d.topLeftCorner(k, k).determinant();
        CHECK(std::abs(D[k - 1] - ref) <= 1e-11 * (1.0 + std::abs(ref)));
    }
}

TEST_CASE("Gauss rules integrate polynomials exactly") {
    QuadratureRule gl = gauss_legendre(6);
    for (int p = 0; p <= 11; ++p) {
        double s = 0.0;
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) s += gl.weights[j] * std::pow(gl.nodes[j], p);
        const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
        CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
    QuadratureRule gh = gauss_hermite(8);
    double s0 = 0.0, s2 = 0.0, s4 = 0.0;
    for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
        const double x = gh.nodes[j];
        s0 += gh.weights[j], s2 += gh.weights[j] * x * x, s4 += gh.weights[j] * x * x * x * x;
    }
    const double rp = std::sqrt(M_PI);
    CHECK(s0 == doctest::Approx(rp).epsilon(1e-13));
    CHECK(s2 == doctest::Approx(rp / 2).epsilon(1e-13));
    CHECK(s4 == doctest::Approx(3 * rp / 4).epsilon(1e-13));
}

TEST_CASE("expm matches a Taylor series on a small matrix") {
    Eigen::MatrixXcd a(2, 2);
    a << cplx(0.1, 0.2), cplx(-0.3, 0.0), cplx(0.05, 0.1), cplx(0.0, -0.4);
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(2, 2), term = s;
    for (int k = 1; k < 30; ++k) {
        term = term * a / double(k);
        s += term;
    }
    CHECK((expm(a) - s).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("compensated sum keeps small terms") {
    CompensatedSum c;
    c.add(1e16);
    for (int i = 0; i < 1000; ++i) c.add(1.0);
    c.add(-1e16);
    CHECK(c.value().real() == doctest::Approx(1000.0));
}

TEST_CASE("Hermitian part and banded Cholesky") {
    BandedMatrix m(3, 1, 1);
    for (int i = 0; i < 3; ++i) m.set(i, i, cplx(2.0, 5.0));
    m.set(1, 0, cplx(0.0, 1.0));
    BandedMatrix h = hermitian_part(m);
    CHECK(std::abs(h.get(0, 0) - 2.0) < 1e-15);
    CHECK(std::abs(h.get(0, 1) - std::conj(h.get(1, 0))) < 1e-15);
    CHECK(banded_cholesky_succeeds(h));
    for (int i = 0; i < 3; ++i) h.set(i, i, -1.0);
    CHECK_FALSE(banded_cholesky_succeeds(h));
}
