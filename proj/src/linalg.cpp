#include "pathint/linalg.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "pathint/errors.hpp"

namespace pathint {

namespace {
constexpr double kPivotThreshold = 0.1;
}

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), data_(static_cast<size_t>(n) * (kl + ku + 1)) {
    if (n < 0 || kl < 0 || ku < 0) throw ShapeError("BandedMatrix: negative size or bandwidth");
}

cplx BandedMatrix::get(int i, int j) const {
    if (!in_band(i, j) || i < 0 || j < 0 || i >= n_ || j >= n_) return 0.0;
    return data_[static_cast<size_t>(i) * (kl_ + ku_ + 1) + (j - i + kl_)];
}

void BandedMatrix::set(int i, int j, cplx v) {
    if (!in_band(i, j) || i < 0 || j < 0 || i >= n_ || j >= n_)
        throw ShapeError("BandedMatrix: entry outside band");
    data_[static_cast<size_t>(i) * (kl_ + ku_ + 1) + (j - i + kl_)] = v;
}

void BandedMatrix::add(int i, int j, cplx v) { set(i, j, get(i, j) + v); }

CVec BandedMatrix::multiply(const CVec& x) const {
    if (static_cast<int>(x.size()) != n_) throw ShapeError("BandedMatrix::multiply size");
    CVec y(n_);
    for (int i = 0; i < n_; ++i) {
        cplx s = 0.0;
        for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) s += get(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

cplx BandedMatrix::quadratic(const CVec& x) const {
    CVec y = multiply(x);
    cplx s = 0.0;
    for (int i = 0; i < n_; ++i) s += std::conj(x[i]) * y[i];
    return s;
}

Eigen::MatrixXcd BandedMatrix::dense() const {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) d(i, j) = get(i, j);
    return d;
}

BandedLU::BandedLU(const BandedMatrix& m) : n_(m.size()), kl_(m.lower()), ku_(m.upper()) {
    const int width = 2 * kl_ + ku_ + 1;
    rows_.assign(n_, CVec(width));
    lower_.assign(n_, CVec(kl_));
    ipiv_.resize(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) at(i, j) = m.get(i, j);
    min_pivot_ = n_ > 0 ? INFINITY : 0.0;
    const int uw = kl_ + ku_;
    for (int k = 0; k < n_; ++k) {
        const int last = std::min(n_ - 1, k + kl_);
        const int jmax = std::min(n_ - 1, k + uw);
        int piv = k;
        double best = std::abs(at(k, k));
        for (int i = k + 1; i <= last; ++i) {
            double v = std::abs(at(i, k));
            if (v > best) best = v, piv = i;
        }
        // Threshold pivoting: keep the diagonal unless it is much smaller than the column max.
        // Unit-triangular forms then factor without rounding.
        if (piv != k && std::abs(at(k, k)) >= kPivotThreshold * best) piv = k;
        ipiv_[k] = piv;
        if (piv != k) {
            for (int j = k; j <= jmax; ++j) std::swap(at(k, j), at(piv, j));
            log_det_ += cplx(0.0, std::numbers::pi);
        }
        cplx p = at(k, k);
        min_pivot_ = std::min(min_pivot_, std::abs(p));
        if (p == cplx(0.0)) {
            singular_ = true;
            continue;
        }
        log_det_ += std::log(p);
        for (int i = k + 1; i <= last; ++i) {
            cplx f = at(i, k) / p;
            lower_[k][i - k - 1] = f;
            at(i, k) = 0.0;
            if (f == cplx(0.0)) continue;
            for (int j = k + 1; j <= jmax; ++j) at(i, j) -= f * at(k, j);
        }
    }
    if (singular_) log_det_ = cplx(-INFINITY, 0.0);
}

cplx BandedLU::det() const {
    if (singular_) return 0.0;
    return std::exp(log_det_);
}

CVec BandedLU::solve(const CVec& b) const {
    if (static_cast<int>(b.size()) != n_) throw ShapeError("BandedLU::solve size");
    if (singular_) throw SingularMatrixError("BandedLU::solve on singular matrix");
    CVec y = b;
    for (int k = 0; k < n_; ++k) {
        if (ipiv_[k] != k) std::swap(y[k], y[ipiv_[k]]);
        for (int i = k + 1; i <= std::min(n_ - 1, k + kl_); ++i) y[i] -= lower_[k][i - k - 1] * y[k];
    }
    const int uw = kl_ + ku_;
    for (int i = n_ - 1; i >= 0; --i) {
        cplx s = y[i];
        for (int j = i + 1; j <= std::min(n_ - 1, i + uw); ++j) s -= at(i, j) * y[j];
        y[i] = s / at(i, i);
    }
    return y;
}

CVec tridiagonal_minors(const CVec& diag, const CVec& sub, const CVec& super) {
    const size_t n = diag.size();
    if (sub.size() != n || super.size() != n) throw ShapeError("tridiagonal_minors sizes");
    CVec d(n);
    cplx dm2 = 1.0, dm1 = 1.0;
    for (size_t k = 0; k < n; ++k) {
        cplx dk = diag[k] * dm1 - (k > 0 ? sub[k] * super[k] * dm2 : cplx(0.0));
        d[k] = dk;
        dm2 = dm1;
        dm1 = dk;
    }
    return d;
}

BandedMatrix hermitian_part(const BandedMatrix& m) {
    int bw = std::max(m.lower(), m.upper());
    BandedMatrix h(m.size(), bw, bw);
    for (int i = 0; i < m.size(); ++i)
        for (int j = std::max(0, i - bw); j <= std::min(m.size() - 1, i + bw); ++j)
            h.set(i, j, 0.5 * (m.get(i, j) + std::conj(m.get(j, i))));
    return h;
}

bool banded_cholesky_succeeds(const BandedMatrix& herm) {
    const int n = herm.size(), b = herm.lower();
    // L stored as rows with offset columns [i-b, i]
    std::vector<CVec> l(n, CVec(b + 1));
    auto L = [&](int i, int j) -> cplx& { return l[i][j - i + b]; };
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(0, i - b); j <= i; ++j) {
            cplx s = herm.get(i, j);
            for (int k = std::max(0, i - b); k < j; ++k)
                if (j - k <= b) s -= L(i, k) * std::conj(L(j, k));
            if (i == j) {
                if (!(s.real() > 0.0) || !std::isfinite(s.real())) return false;
                L(i, i) = std::sqrt(s.real());
            } else {
                L(i, j) = s / L(j, j);
            }
        }
    }
    return true;
}

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) { return a.exp(); }

namespace {

QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
    const int n = static_cast<int>(offdiag.size()) + 1;
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) j(i, i + 1) = j(i + 1, i) = offdiag(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.weights[i] = mu0 * v * v;
    }
    return r;
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw ValidationError("gauss_legendre: n < 1");
    Eigen::VectorXd b(n - 1);
    for (int k = 1; k < n; ++k) b(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    return golub_welsch(b, 2.0);
}

QuadratureRule gauss_hermite(int n) {
    if (n < 1) throw ValidationError("gauss_hermite: n < 1");
    Eigen::VectorXd b(n - 1);
    for (int k = 1; k < n; ++k) b(k - 1) = std::sqrt(0.5 * k);
    return golub_welsch(b, std::sqrt(std::numbers::pi));
}

void CompensatedSum::add(cplx v) {
    auto step = [](double& s, double& c, double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x)) c += (s - t) + x;
        else c += (x - t) + s;
        s = t;
    };
    step(re_, cre_, v.real());
    step(im_, cim_, v.imag());
}

}  // namespace pathint
