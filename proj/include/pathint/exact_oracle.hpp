#pragma once

#include <Eigen/Dense>

#include "pathint/linalg.hpp"
#include "pathint/states.hpp"

namespace pathint {

// Spin-S irrep in the |M> basis, index k = S - M so row 0 is M = S.
class SpinBasis {
public:
    explicit SpinBasis(double S);

    double S() const { return S_; }
    int dimension() const { return dim_; }
    const Eigen::MatrixXcd& Sz() const { return sz_; }
    const Eigen::MatrixXcd& Splus() const { return sp_; }
    const Eigen::MatrixXcd& Sminus() const { return sm_; }
    Eigen::MatrixXcd Sx() const { return 0.5 * (sp_ + sm_); }
    Eigen::MatrixXcd Sy() const { return cplx(0.0, -0.5) * (sp_ - sm_); }

    Eigen::VectorXcd coherent(cplx xi) const;
    // exp(i Sz T), diagonal
    Eigen::VectorXcd propagator_diagonal(double T) const;

private:
    double S_;
    int dim_;
    Eigen::MatrixXcd sz_, sp_, sm_;
};

// Truncated oscillator space with levels 0..n_max-1.
class FockBasis {
public:
    explicit FockBasis(int n_max, double hbar = 1.0);

    int n_max() const { return n_; }
    const Eigen::MatrixXcd& a() const { return a_; }
    Eigen::MatrixXcd adag() const { return a_.adjoint(); }
    Eigen::MatrixXcd number() const { return a_.adjoint() * a_; }
    Eigen::MatrixXcd q() const;
    Eigen::MatrixXcd p() const;
    double hbar() const { return hbar_; }

    Eigen::VectorXcd coherent(cplx xi) const;
    // sum_{n >= n_max} |<n|xi>|^2
    static double tail_weight(cplx xi, int n_max);

private:
    int n_;
    double hbar_;
    Eigen::MatrixXcd a_;
};

cplx spin_amplitude_oracle(cplx xi_i, cplx xi_f, double T, double S);

struct OracleValue {
    cplx value;
    double truncation_bound;
};

OracleValue ho_amplitude_oracle(cplx xi_i, cplx xi_f, double T, int n_max, double tolerance = 1e-10);

enum class CompositionMethod { automatic, sphere_quadrature, matrix_product };

struct CompositionOptions {
    Model model = Model::spin;
    double S = 0.5;
    int n_max = 40;
    int quad_order = 0;  // 0 picks the minimal exact order
    CompositionMethod method = CompositionMethod::automatic;
};

double composition_check(cplx xi_i, cplx xi_f, double T1, double T2, const CompositionOptions& opt);

}  // namespace pathint
