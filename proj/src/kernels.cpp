#include "pathint/kernels.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>

#include "pathint/errors.hpp"

namespace pathint {

namespace {

constexpr cplx I{0.0, 1.0};

// Terms of the exponent that contain xibar_n or xi_n (1 <= n <= N-1).
cplx local_exponent(const CVec& xb, const CVec& x, int n, const DiscreteModel& m, double eps) {
    auto step = [&](int k) { return m.a(xb[k] * x[k - 1]) - I * (eps / m.hbar) * m.kernel.value(xb[k], x[k - 1]); };
    return step(n) + step(n + 1) - m.a(xb[n] * x[n]);
}

void gradient_entry(const DiscretePath& path, const DiscreteModel& m, double h, int n, CVec& xb, CVec& x,
                    cplx& gb, cplx& gx) {
    const double eps = path.grid.eps;
    const cplx b0 = xb[n], x0 = x[n];
    xb[n] = b0 + h;
    cplx ep = local_exponent(xb, x, n, m, eps);
    xb[n] = b0 - h;
    cplx em = local_exponent(xb, x, n, m, eps);
    xb[n] = b0;
    gb = (ep - em) / (2.0 * h);
    x[n] = x0 + h;
    ep = local_exponent(xb, x, n, m, eps);
    x[n] = x0 - h;
    em = local_exponent(xb, x, n, m, eps);
    x[n] = x0;
    gx = (ep - em) / (2.0 * h);
}

}  // namespace

CVec numerical_gradient_serial(const DiscretePath& path, const DiscreteModel& m, double step) {
    path.validate();
    const int N = path.grid.N;
    CVec g(2 * (N - 1));
    CVec xb = path.bwd, x = path.fwd;
    for (int n = 1; n < N; ++n) gradient_entry(path, m, step, n, xb, x, g[2 * (n - 1)], g[2 * (n - 1) + 1]);
    return g;
}

CVec numerical_gradient(const DiscretePath& path, const DiscreteModel& m, double step, int jobs) {
    path.validate();
    const int N = path.grid.N;
    CVec g(2 * (N - 1));
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
    {
        CVec xb = path.bwd, x = path.fwd;  // private copies, perturbed one entry at a time
#pragma omp for schedule(static)
        for (int n = 1; n < N; ++n) gradient_entry(path, m, step, n, xb, x, g[2 * (n - 1)], g[2 * (n - 1) + 1]);
    }
    return g;
}

namespace {

Eigen::MatrixXd realify(const Eigen::MatrixXcd& c) {
    const int d = static_cast<int>(c.rows());
    Eigen::MatrixXd r(2 * d, 2 * d);
    r.topLeftCorner(d, d) = c.real();
    r.topRightCorner(d, d) = -c.imag();
    r.bottomLeftCorner(d, d) = c.imag();
    r.bottomRightCorner(d, d) = c.real();
    return r;
}

const QuadratureRule& legendre16() {
    static const QuadratureRule r = gauss_legendre(16);
    return r;
}

// 2 * int_0^L exp(-(1 + i beta) w^2) dw with `panels` 16-point Gauss-Legendre panels; L = 6.5
// leaves a tail below 1e-18.
cplx mode_integral(double beta, int panels) {
    const QuadratureRule& r = legendre16();
    const double L = 6.5, h = L / panels;
    CompensatedSum s;
    for (int k = 0; k < panels; ++k) {
        const double a = k * h;
        for (std::size_t j = 0; j < r.nodes.size(); ++j) {
            const double w = a + 0.5 * h * (r.nodes[j] + 1.0);
            s.add(h * r.weights[j] * std::exp(-cplx(1.0, beta) * (w * w)));
        }
    }
    return s.value();
}

}  // namespace

QuadratureK gaussian_quadrature_K(const QuadraticForm& f, double tol, int max_panels) {
    if (f.dim < 1 || f.dim > 6) throw DimensionError("gaussian_quadrature_K: dim must be 1..6");
    const Eigen::MatrixXcd M = f.scale * f.matrix.dense();
    const Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
    const Eigen::MatrixXcd A = (M - M.adjoint()) / (2.0 * I);
    const Eigen::MatrixXd Hr = realify(H), Ar = realify(A);
    QuadratureK out;
    Eigen::LLT<Eigen::MatrixXd> llt(Hr);
    if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() < 1e-12) return out;
    out.convergent_form = true;
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::MatrixXd Linv = L.inverse();
    Eigen::MatrixXd B = Linv * Ar * Linv.transpose();
    B = 0.5 * (B + B.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    const Eigen::VectorXd beta = es.eigenvalues();
    const double detL = L.diagonal().prod();

    // panels start at one per unit of phase change and double until stable
    const double bmax = beta.cwiseAbs().maxCoeff();
    int n = std::max(8, static_cast<int>(std::ceil(2.0 * bmax * 6.5 * 6.5)));
    auto product = [&](int panels) {
        cplx p = 1.0;
        for (int k = 0; k < beta.size(); ++k) p *= mode_integral(beta[k], panels);
        return p;
    };
    const double pref_real = 1.0 / detL;
    const cplx pref = std::pow(f.normalization / std::numbers::pi, f.dim) * pref_real;
    cplx prev = product(n);
    while (n < max_panels) {
        n *= 2;
        cplx cur = product(n);
        const bool done = std::abs(cur - prev) <= tol * std::abs(cur);
        prev = cur;
        if (done) {
            out.converged = true;
            break;
        }
    }
    out.order = n;
    out.K = pref * prev;
    return out;
}

std::vector<QuadratureK> gaussian_quadrature_batch_serial(const std::vector<QuadraticForm>& forms) {
    std::vector<QuadratureK> out;
    for (auto& f : forms) out.push_back(gaussian_quadrature_K(f));
    return out;
}

std::vector<QuadratureK> gaussian_quadrature_batch(const std::vector<QuadraticForm>& forms, int jobs) {
    return parallel_map(static_cast<int>(forms.size()), [&](int i) { return gaussian_quadrature_K(forms[i]); }, jobs);
}

}  // namespace pathint
