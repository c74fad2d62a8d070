#include "pathint/exact_oracle.hpp"

#include <cmath>
#include <numbers>

#include "pathint/errors.hpp"

namespace pathint {

namespace {
constexpr cplx I{0.0, 1.0};
constexpr int kMaxTwoS = 1000;

// exp(log_mag) e^{i k arg xi}, with xi^0 = 1 even at xi = 0
cplx coeff_power(cplx xi, int k, double log_mag) {
    if (k == 0) return std::exp(log_mag);
    if (xi == cplx(0.0)) return 0.0;
    return std::polar(std::exp(log_mag), k * std::arg(xi));
}
}  // namespace

SpinBasis::SpinBasis(double S) : S_(S) {
    int two_s = twice_spin(S);
    if (two_s > kMaxTwoS) throw DimensionError("SpinBasis: S above 500 is out of range for dense matrices");
    dim_ = two_s + 1;
    sz_ = Eigen::MatrixXcd::Zero(dim_, dim_);
    sp_ = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (int k = 0; k < dim_; ++k) {
        double m = S - k;
        sz_(k, k) = m;
        // S+ |M> = sqrt(S(S+1) - M(M+1)) |M+1>, and M+1 sits at index k-1
        if (k > 0) sp_(k - 1, k) = std::sqrt(S * (S + 1) - m * (m + 1));
    }
    sm_ = sp_.adjoint();
}

Eigen::VectorXcd SpinBasis::coherent(cplx xi) const {
    require_finite(xi, "SpinBasis::coherent");
    Eigen::VectorXcd v(dim_);
    const int n = dim_ - 1;
    const double lr = xi == cplx(0.0) ? 0.0 : std::log(std::abs(xi));
    const double norm = -S_ * std::log1p(std::norm(xi));
    for (int k = 0; k <= n; ++k) {
        double lb = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
        v(k) = coeff_power(xi, k, k * lr + lb + norm);
    }
    return v;
}

Eigen::VectorXcd SpinBasis::propagator_diagonal(double T) const {
    Eigen::VectorXcd d(dim_);
    for (int k = 0; k < dim_; ++k) d(k) = std::exp(I * (sz_(k, k).real() * T));
    return d;
}

FockBasis::FockBasis(int n_max, double hbar) : n_(n_max), hbar_(hbar) {
    if (n_max < 1) throw ValidationError("FockBasis: n_max < 1");
    a_ = Eigen::MatrixXcd::Zero(n_, n_);
    for (int n = 1; n < n_; ++n) a_(n - 1, n) = std::sqrt(static_cast<double>(n));
}

Eigen::MatrixXcd FockBasis::q() const { return std::sqrt(hbar_ / 2.0) * (a_ + a_.adjoint()); }

Eigen::MatrixXcd FockBasis::p() const { return -I * std::sqrt(hbar_ / 2.0) * (a_ - a_.adjoint()); }

Eigen::VectorXcd FockBasis::coherent(cplx xi) const {
    Eigen::VectorXcd v(n_);
    const double lr = xi == cplx(0.0) ? 0.0 : std::log(std::abs(xi));
    for (int n = 0; n < n_; ++n)
        v(n) = coeff_power(xi, n, n * lr - 0.5 * std::lgamma(n + 1.0) - 0.5 * std::norm(xi));
    return v;
}

double FockBasis::tail_weight(cplx xi, int n_max) {
    const double m = std::norm(xi);
    if (m == 0.0) return 0.0;
    const double lm = std::log(m);
    double sum = 0.0;
    // Poisson(m) tail summed upward from n_max; terms decay once n > m
    for (int n = n_max; n < n_max + 100000; ++n) {
        double t = std::exp(n * lm - m - std::lgamma(n + 1.0));
        sum += t;
        if (n > m && t < 1e-20 * sum) break;
    }
    return sum;
}

cplx spin_amplitude_oracle(cplx xi_i, cplx xi_f, double T, double S) {
    SpinBasis b(S);
    Eigen::VectorXcd ci = b.coherent(xi_i), cf = b.coherent(xi_f);
    Eigen::VectorXcd u = b.propagator_diagonal(T);
    cplx s = 0.0;
    for (int k = 0; k < b.dimension(); ++k) s += std::conj(cf(k)) * u(k) * ci(k);
    return s;
}

OracleValue ho_amplitude_oracle(cplx xi_i, cplx xi_f, double T, int n_max, double tolerance) {
    FockBasis b(n_max);
    double bound = std::sqrt(FockBasis::tail_weight(xi_i, n_max) * FockBasis::tail_weight(xi_f, n_max));
    if (bound > tolerance)
        throw TruncationError("ho_amplitude_oracle: truncation bound " + std::to_string(bound) +
                              " exceeds tolerance");
    Eigen::VectorXcd ci = b.coherent(xi_i), cf = b.coherent(xi_f);
    cplx s = 0.0;
    for (int n = 0; n < n_max; ++n) s += std::conj(cf(n)) * std::exp(-I * (n * T)) * ci(n);
    return {s, bound};
}

namespace {

double spin_sphere_composition(cplx xi_i, cplx xi_f, double T1, double T2, double S, int order) {
    int two_s = twice_spin(S);
    if (order == 0) order = two_s + 1;
    if (order < two_s + 1)
        throw QuadratureError("composition_check: quadrature order below 2S+1 is not exact");
    SpinBasis b(S);
    Eigen::VectorXcd ci = b.coherent(xi_i), cf = b.coherent(xi_f);
    Eigen::VectorXcd u1 = b.propagator_diagonal(T1), u2 = b.propagator_diagonal(T2);
    Eigen::VectorXcd a = u1.cwiseProduct(ci);               // U1 |xi_i>
    Eigen::VectorXcd bf = u2.conjugate().cwiseProduct(cf);  // U2^dag |xi_f>
    QuadratureRule gl = gauss_legendre(order);
    CompensatedSum sum;
    for (size_t i = 0; i < gl.nodes.size(); ++i) {
        double theta = std::acos(gl.nodes[i]);
        for (int j = 0; j < order; ++j) {
            double phi = 2.0 * std::numbers::pi * j / order;
            Eigen::VectorXcd n = b.coherent(std::polar(std::tan(0.5 * theta), phi));
            cplx left = bf.dot(n);   // <xi_f| U2 |n>
            cplx right = n.dot(a);   // <n| U1 |xi_i>
            // (2S+1)/(4 pi) dOmega, dOmega = d(cos theta) dphi
            sum.add(left * right * (gl.weights[i] * (2.0 * std::numbers::pi / order)) *
                    ((two_s + 1) / (4.0 * std::numbers::pi)));
        }
    }
    cplx direct = spin_amplitude_oracle(xi_i, xi_f, T1 + T2, S);
    return std::abs(direct - sum.value());
}

double matrix_product_composition(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& ci,
                                  const Eigen::VectorXcd& cf, double T1, double T2) {
    Eigen::MatrixXcd u1 = expm(-I * T1 * h), u2 = expm(-I * T2 * h), u12 = expm(-I * (T1 + T2) * h);
    cplx composed = cf.dot(u2 * (u1 * ci));
    cplx direct = cf.dot(u12 * ci);
    return std::abs(direct - composed);
}

}  // namespace

double composition_check(cplx xi_i, cplx xi_f, double T1, double T2, const CompositionOptions& opt) {
    CompositionMethod m = opt.method;
    if (m == CompositionMethod::automatic)
        m = opt.model == Model::spin ? CompositionMethod::sphere_quadrature : CompositionMethod::matrix_product;
    if (opt.model == Model::spin) {
        if (m == CompositionMethod::sphere_quadrature)
            return spin_sphere_composition(xi_i, xi_f, T1, T2, opt.S, opt.quad_order);
        SpinBasis b(opt.S);
        // H = -Sz in units of hbar
        return matrix_product_composition(-b.Sz(), b.coherent(xi_i), b.coherent(xi_f), T1, T2);
    }
    if (m == CompositionMethod::sphere_quadrature)
        throw ValidationError("composition_check: sphere quadrature applies to the spin model only");
    FockBasis b(opt.n_max);
    return matrix_product_composition(b.number(), b.coherent(xi_i), b.coherent(xi_f), T1, T2);
}

}  // namespace pathint
