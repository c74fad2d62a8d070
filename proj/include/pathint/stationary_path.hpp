#pragma once

#include <optional>

#include "pathint/discrete_action.hpp"

namespace pathint {

struct ConservedPair {
    cplx R{0.0}, P{0.0};
    cplx R_continuum{0.0};   // xi_F^* xi_I e^{-iT}
    cplx beta{1.0};          // xi_n = beta xi_{n-1}
    CVec per_step_R;         // R_n, n = 1..N-1
    CVec per_step_P;         // P_n, n = 1..N

    double spread() const;               // max_n |R_n - R_1|
    double deviation_from_continuum() const;  // max_n |R_n - R^S|
};

struct StationarySolution {
    DiscretePath path;
    double residual_inf = 0.0;
    ActionBreakdown action;
    std::optional<ConservedPair> conserved;
    double final_jump = 0.0;    // |xi_F - xi_{N-1}|
    double initial_jump = 0.0;  // |xibar_1 - xi_I^*|
    int iterations = 0;
};

struct NewtonOptions {
    int max_iterations = 50;
    double tolerance = 1e-10;
    int max_halvings = 20;
};

// Gradient of the discrete exponent with respect to the interior variables,
// ordered (xibar_1, xi_1, ..., xibar_{N-1}, xi_{N-1}). Spin gradients are divided by 2S.
CVec stationarity_residual(const DiscretePath& path, const DiscreteModel& m);
BandedMatrix stationarity_jacobian(const DiscretePath& path, const DiscreteModel& m);

StationarySolution solve_ho_dtcs(const TimeGrid& grid, cplx xi_i, cplx xi_f, double hbar = 1.0);
StationarySolution solve_spin_dtscs(const TimeGrid& grid, cplx xi_i, cplx xi_f, double S, double hbar = 1.0);
StationarySolution solve_general_newton(const TimeGrid& grid, const DiscreteModel& m, cplx xi_i, cplx xi_f,
                                        const NewtonOptions& opt = {});
// Newton from a given starting path.
StationarySolution newton_polish(DiscretePath start, const DiscreteModel& m, const NewtonOptions& opt = {});

// Root of the per-step quadratic beta^2 + beta (R - 1 + i eps (1+R)) - R = 0 near 1.
cplx spin_step_ratio(cplx R, double eps);

struct SpinStationaryAction {
    cplx final_discontinuity{0.0};
    cplx interior{0.0};
    cplx log_term{0.0};  // -2S ln(1+R)
    cplx initial_discontinuity{0.0};
    cplx total{0.0};
};

SpinStationaryAction stationary_action_spin(const StationarySolution& sol, double S, double hbar = 1.0);

struct ClassicalPhaseSolution {
    PhasePath path;
    double residual_inf = 0.0;
    cplx action{0.0};
};

ClassicalPhaseSolution solve_dtps_classical(const TimeGrid& grid, const PhaseHamiltonian& H, double q_i,
                                            double q_f, const NewtonOptions& opt = {});

// Continuum HO classical action with H = (p^2 + q^2 - hbar)/2.
double ho_classical_action(double q_i, double q_f, double T, double hbar = 1.0);

}  // namespace pathint
