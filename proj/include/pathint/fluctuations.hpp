#pragma once

#include "pathint/stationary_path.hpp"

namespace pathint {

enum class Provenance { dtcs_proper, dtcs_semi_eps, kcs_alt, dtscs_proper, kscs_discretized };

const char* provenance_name(Provenance p);
Provenance parse_provenance(const std::string& s);

// Gaussian exponent -scale * eta^H M eta over modes eta_1..eta_dim, measure
// prod_n normalization d^2 eta_n / pi. With this convention K = normalization^dim / (scale^dim det M).
struct QuadraticForm {
    int dim = 0;
    BandedMatrix matrix;
    cplx scale{1.0};
    cplx normalization{1.0};
    Provenance provenance = Provenance::dtcs_proper;
    // Literal per-mode measure of the spin resolution of unity, (2S+1)/(1+R)^2; informational.
    cplx measure_normalization{1.0};
    bool ablation = false;

    cplx exponent(const CVec& eta) const;
};

struct DetResult {
    cplx det{1.0};
    cplx log_det{0.0};
    cplx K{1.0};
    cplx log_K{0.0};
    bool convergent = true;
    double growth_rate = 0.0;  // |K_dim / K_{dim-2}|, 0 when dim < 3
};

QuadraticForm expand_dtcs(const StationarySolution& sol);
QuadraticForm build_semi_eps_form(const TimeGrid& grid);
QuadraticForm build_kcs_alt_form(const TimeGrid& grid);
QuadraticForm expand_dtscs(const StationarySolution& sol, double S);
// ablation drops every O(eps) term except the Hamiltonian one
QuadraticForm build_kscs_form(const TimeGrid& grid, cplx R, bool ablation = false);

// Log determinant by banded LU; never throws on singular matrices.
cplx form_log_det(const QuadraticForm& f, bool* singular = nullptr);
DetResult gaussian_K(const QuadraticForm& f);

// Minimum-eigenvalue test on the Hermitian part of scale*M, threshold -1e-10.
bool is_convergent(const QuadraticForm& f);

// <eta_n eta_n^*> of the Gaussian weight, (scale M)^{-1}_{nn}, n zero-based.
cplx mode_variance(const QuadraticForm& f, int n);

// Transfer-matrix eigenvalues of the constant tridiagonal recurrence D_k = a D_{k-1} - bc D_{k-2}.
struct TransferRoots {
    cplx plus, minus;
};
TransferRoots kscs_transfer_roots(const TimeGrid& grid, cplx R);
// Closed form det from lambda_+-, D_1 = a, D_2 = a^2 - bc.
cplx tridiagonal_closed_form_det(cplx a, cplx b, cplx c, int dim);

}  // namespace pathint
