#pragma once

#include <functional>
#include <vector>

#include "pathint/linalg.hpp"
#include "pathint/states.hpp"

namespace pathint {

struct TimeGrid {
    int N = 1;
    double T = 0.0;
    double eps = 0.0;

    TimeGrid() = default;
    TimeGrid(int N, double T);
    double t(int n) const { return n * eps; }
};

// fwd[n] = xi_n for n = 0..N, bwd[n] = xibar_n for n = 0..N.
// fwd[0] = xi_I, fwd[N] = xi_F, bwd[N] = conj(xi_F); bwd[0] holds conj(xi_I) by convention
// and is not a variable. Interior bwd is independent of fwd.
struct DiscretePath {
    TimeGrid grid;
    CVec fwd, bwd;

    DiscretePath() = default;
    DiscretePath(TimeGrid g, cplx xi_i, cplx xi_f);
    static DiscretePath honest(TimeGrid g, const CVec& fwd);

    cplx xi_i() const { return fwd.front(); }
    cplx xi_f() const { return fwd.back(); }
    void validate() const;
    // |xi_F - xi_{N-1}| and |xibar_1 - conj(xi_I)|
    double final_jump() const;
    double initial_jump() const;
};

enum class ActionMode { exact, second_order_expanded };

// All values are exponents (i/hbar) S; action() converts back.
struct ActionBreakdown {
    cplx total{0.0};
    cplx eps_term{0.0};
    cplx eps2_term{0.0};
    cplx canonical{0.0};
    cplx dynamical{0.0};
    ActionMode mode = ActionMode::exact;

    cplx parts_sum() const { return eps_term + eps2_term + canonical + dynamical; }
    static cplx action(cplx exponent, double hbar) { return exponent * hbar / cplx(0.0, 1.0); }
};

ActionBreakdown dtcs_action(const DiscretePath& path, const HamiltonianKernel& kernel, double hbar = 1.0);

// Exact mode: total is the logarithmic action, parts are the second-order expansion (diagnostic).
// Expanded mode: total is the sum of the parts.
ActionBreakdown dtscs_action(const DiscretePath& path, const HamiltonianKernel& kernel, double S,
                             double hbar = 1.0, ActionMode mode = ActionMode::exact);

struct ThetaPhiParts {
    cplx eps1{0.0}, eps2{0.0}, canonical{0.0};
};

// theta, phi of size N+1 (complex to allow stationary paths).
ThetaPhiParts dtscs_theta_phi_parts(const CVec& theta, const CVec& phi, double S);

// Complex (theta_n, phi_n) of a path: theta = 2 atan sqrt(xibar xi), phi = ln(xi/xibar)/(2i),
// both continued along n.
void path_to_theta_phi(const DiscretePath& path, CVec& theta, CVec& phi);

struct PhaseHamiltonian {
    std::function<cplx(cplx, cplx)> value, dp, dq, dpp, dpq, dqq;  // arguments (p, q)
    bool linear = false;
};

// H = (p^2 + q^2 - hbar)/2
PhaseHamiltonian ho_phase_hamiltonian(double hbar = 1.0);

// p[n] for n = 1..N (p[0] unused), q[n] for n = 0..N.
struct PhasePath {
    TimeGrid grid;
    CVec p, q;

    void validate() const;
};

cplx dtps_action(const PhasePath& path, const PhaseHamiltonian& H);

// Unified exponent pieces: E = sum_n A(P_n) - (i eps/hbar) H - sum_{n<N} B(R_n) + const.
struct DiscreteModel {
    Model model = Model::ho;
    double S = 0.5;
    double hbar = 1.0;
    HamiltonianKernel kernel;

    static DiscreteModel ho(double hbar = 1.0);
    static DiscreteModel spin(double S, double hbar = 1.0);

    cplx a(cplx x) const;    // A(x) = B(x)
    cplx da(cplx x) const;
    cplx dda(cplx x) const;
    cplx exponent(const DiscretePath& path) const;
};

}  // namespace pathint
