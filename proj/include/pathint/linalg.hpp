#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace pathint {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// Square complex band matrix, kl sub- and ku super-diagonals.
// Stored row-major by diagonal offset: data[i*(kl+ku+1) + (j-i+kl)].
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(int n, int kl, int ku);

    int size() const { return n_; }
    int lower() const { return kl_; }
    int upper() const { return ku_; }

    bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_; }
    cplx get(int i, int j) const;
    void set(int i, int j, cplx v);
    void add(int i, int j, cplx v);

    CVec multiply(const CVec& x) const;
    // x^H M x
    cplx quadratic(const CVec& x) const;
    Eigen::MatrixXcd dense() const;

private:
    int n_ = 0, kl_ = 0, ku_ = 0;
    CVec data_;
};

// LU with threshold partial pivoting (diagonal kept unless below 0.1 of the column max). Fill-in widens the upper band to kl+ku.
class BandedLU {
public:
    explicit BandedLU(const BandedMatrix& m);

    CVec solve(const CVec& b) const;
    // Log determinant as sum of pivot logs plus i*pi per row swap; exp() of it is det.
    cplx log_det() const { return log_det_; }
    cplx det() const;
    bool singular() const { return singular_; }
    double min_abs_pivot() const { return min_pivot_; }

private:
    int n_, kl_, ku_;
    std::vector<CVec> rows_;   // each row holds columns [i-kl, i+kl+ku]; U lives at j >= i
    std::vector<CVec> lower_;  // multipliers of column k for rows k+1..k+kl
    std::vector<int> ipiv_;
    cplx log_det_{0.0, 0.0};
    bool singular_ = false;
    double min_pivot_ = 0.0;

    cplx& at(int i, int j) { return rows_[i][j - i + kl_]; }
    cplx at(int i, int j) const { return rows_[i][j - i + kl_]; }
};

// Leading principal minors D_1..D_n of a tridiagonal matrix by
// D_k = a_k D_{k-1} - b_k c_k D_{k-2}, with sub[k] = M(k,k-1), super[k] = M(k-1,k).
CVec tridiagonal_minors(const CVec& diag, const CVec& sub, const CVec& super);

// Cholesky attempt of a Hermitian band matrix (only lower band read). True when it succeeds.
bool banded_cholesky_succeeds(const BandedMatrix& herm);

// Hermitian part (M + M^H)/2 as a band matrix with symmetric bandwidth.
BandedMatrix hermitian_part(const BandedMatrix& m);

// Dense matrix exponential (scaling and squaring, Pade).
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a);

// Gauss rules on [-1,1] and with weight exp(-x^2), Golub-Welsch.
struct QuadratureRule {
    std::vector<double> nodes, weights;
};
QuadratureRule gauss_legendre(int n);
QuadratureRule gauss_hermite(int n);

// Neumaier compensated sum for complex values.
class CompensatedSum {
public:
    void add(cplx v);
    cplx value() const { return {re_ + cre_, im_ + cim_}; }

private:
    double re_ = 0, cre_ = 0, im_ = 0, cim_ = 0;
};

}  // namespace pathint
