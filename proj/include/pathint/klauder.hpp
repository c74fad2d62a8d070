#pragma once

#include <string>
#include <vector>

#include "pathint/discrete_action.hpp"
#include "pathint/fluctuations.hpp"
#include "pathint/states.hpp"

namespace pathint {

// Klauder's regulator epsilon is a continuum parameter, unrelated to the grid step.
struct KlauderParams {
    double epsilon = 1e-3;
    double T = 1.0;
    cplx xi_i{0.0}, xi_f{0.0};
    double hbar = 1.0;

    // epsilon in (0, T/20]; IllConditionedError below 1e-8.
    void validate() const;
};

// Dense samples of an independent pair (xb(t), x(t)) with first and second derivatives.
struct PathSamples {
    double epsilon = 0.0;
    std::vector<double> t;
    CVec xb, x, dxb, dx, ddxb, ddx;

    std::size_t size() const { return t.size(); }
};

// chi_bar = xb / xb^S and chi = x / x^S against the classical precession;
// asym_* are the boundary-layer closed forms with rate `rate`.
struct ChiProfile {
    std::vector<double> t;
    CVec chi_bar, chi, asym_chi_bar, asym_chi;
    cplx rate{0.0};
    cplx exact_rate{0.0};  // fast characteristic rate of the linear problem (HO only)
};

struct KlauderSolution {
    PathSamples samples;
    ChiProfile chi;
    ActionBreakdown exponent;  // (i/hbar) S split into eps, canonical and dynamical parts
    cplx action{0.0};          // (hbar/i) exponent.total
    cplx exact_exponent{0.0};  // log of the closed-form amplitude
    cplx predicted_log_term{0.0}, predicted_interior{0.0};  // spin: layer log term and hbar S T
    double bc_error = 0.0;
    double ode_residual = 0.0;
    int mesh_cells = 0;
    int newton_iterations = 0;

    double action_error() const;  // |exponent.total - exact_exponent| modulo 2 pi i, times hbar
};

// Sample times graded geometrically into both ends (first cell h0, growth `ratio`, capped at hmax).
std::vector<double> layer_mesh(double T, double h0, double ratio, double hmax);

KlauderSolution solve_kcs_ho(const KlauderParams& p, int interior_samples = 2000);
// HO Klauder path evaluated at arbitrary (sorted) times.
PathSamples sample_kcs_ho(const KlauderParams& p, const std::vector<double>& times);
KlauderSolution solve_kscs_spin(const KlauderParams& p, double S);

// Value of the epsilon-term of the action (not the exponent) by cubic Hermite quadrature.
cplx epsilon_term_value(const PathSamples& s, const ModelParams& m);

// WRONG by construction: Klauder path with the epsilon-term dropped, then a discretized
// Gaussian integral of the remaining action. Kept to reproduce the divergence.
struct SemiEpsResult {
    std::string label = "WRONG: semi-eps prescription";
    cplx action_without_eps{0.0};
    DetResult fluctuation;
    bool singular = false;
    bool convergent = false;
};
SemiEpsResult wrong_semi_eps_prescription(const KlauderParams& p, int N);

}  // namespace pathint
