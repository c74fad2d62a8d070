#include "pathint/stationary_path.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <spdlog/spdlog.h>

#include "pathint/errors.hpp"

namespace pathint {

namespace {

constexpr cplx I{0.0, 1.0};

double inf_norm(const CVec& v) {
    double m = 0.0;
    for (cplx z : v) m = std::max(m, std::abs(z));
    return m;
}

double residual_scale(const DiscreteModel& m) { return m.model == Model::spin ? 1.0 / (2.0 * m.S) : 1.0; }

void finish(StationarySolution& s, const DiscreteModel& m) {
    s.final_jump = s.path.final_jump();
    s.initial_jump = s.path.initial_jump();
    s.action = m.model == Model::ho ? dtcs_action(s.path, m.kernel, m.hbar)
                                    : dtscs_action(s.path, m.kernel, m.S, m.hbar);
}

}  // namespace

double ConservedPair::spread() const {
    double d = 0.0;
    for (cplx r : per_step_R) d = std::max(d, std::abs(r - per_step_R.front()));
    return d;
}

double ConservedPair::deviation_from_continuum() const {
    double d = 0.0;
    for (cplx r : per_step_R) d = std::max(d, std::abs(r - R_continuum));
    return d;
}

CVec stationarity_residual(const DiscretePath& path, const DiscreteModel& m) {
    path.validate();
    const int N = path.grid.N;
    const CVec& x = path.fwd;
    const CVec& xb = path.bwd;
    const cplx c = -I * (path.grid.eps / m.hbar);
    const double sc = residual_scale(m);
    CVec F(2 * static_cast<size_t>(N - 1));
    for (int n = 1; n < N; ++n) {
        cplx Pn = xb[n] * x[n - 1], Rn = xb[n] * x[n], Pn1 = xb[n + 1] * x[n];
        F[2 * (n - 1)] = sc * (m.da(Pn) * x[n - 1] + c * m.kernel.d1(xb[n], x[n - 1]) - m.da(Rn) * x[n]);
        F[2 * (n - 1) + 1] = sc * (m.da(Pn1) * xb[n + 1] + c * m.kernel.d2(xb[n + 1], x[n]) - m.da(Rn) * xb[n]);
    }
    return F;
}

BandedMatrix stationarity_jacobian(const DiscretePath& path, const DiscreteModel& m) {
    const int N = path.grid.N;
    const int dim = 2 * (N - 1);
    const CVec& x = path.fwd;
    const CVec& xb = path.bwd;
    const cplx c = -I * (path.grid.eps / m.hbar);
    const double sc = residual_scale(m);
    BandedMatrix J(dim, 1, 1);
    for (int n = 1; n < N; ++n) {
        const int ib = 2 * (n - 1), ix = ib + 1;
        cplx Pn = xb[n] * x[n - 1], Rn = xb[n] * x[n], Pn1 = xb[n + 1] * x[n];
        cplx cross = -(m.dda(Rn) * Rn + m.da(Rn));
        J.set(ib, ib, sc * (m.dda(Pn) * x[n - 1] * x[n - 1] + c * m.kernel.d11(xb[n], x[n - 1]) -
                            m.dda(Rn) * x[n] * x[n]));
        J.set(ib, ix, sc * cross);
        J.set(ix, ib, sc * cross);
        J.set(ix, ix, sc * (m.dda(Pn1) * xb[n + 1] * xb[n + 1] + c * m.kernel.d22(xb[n + 1], x[n]) -
                            m.dda(Rn) * xb[n] * xb[n]));
        if (n > 1) J.set(ib, ib - 1, sc * (m.dda(Pn) * Pn + m.da(Pn) + c * m.kernel.d12(xb[n], x[n - 1])));
        if (n + 1 < N)
            J.set(ix, ix + 1, sc * (m.dda(Pn1) * Pn1 + m.da(Pn1) + c * m.kernel.d12(xb[n + 1], x[n])));
    }
    return J;
}

StationarySolution solve_ho_dtcs(const TimeGrid& grid, cplx xi_i, cplx xi_f, double hbar) {
    const int N = grid.N;
    const cplx la = std::log(1.0 - I * grid.eps);
    StationarySolution s;
    s.path = DiscretePath(grid, xi_i, xi_f);
    for (int n = 1; n < N; ++n) {
        s.path.fwd[n] = std::exp(static_cast<double>(n) * la) * xi_i;
        s.path.bwd[n] = std::exp(static_cast<double>(N - n) * la) * std::conj(xi_f);
    }
    DiscreteModel m = DiscreteModel::ho(hbar);
    s.residual_inf = inf_norm(stationarity_residual(s.path, m));
    finish(s, m);
    return s;
}

namespace {

// beta - 1 as the small root of d^2 + (1+R)(1+i eps) d + i eps (1+R) = 0, without cancellation
cplx spin_step_delta(cplx R, double eps) {
    const cplx p = (1.0 + R) * (1.0 + I * eps), q = I * eps * (1.0 + R);
    cplx root = std::sqrt(p * p - 4.0 * q);
    if (std::abs(p - root) > std::abs(p + root)) root = -root;
    const cplx den = p + root;
    return den != cplx(0.0) ? -2.0 * q / den : cplx(0.0);
}

cplx log1p_complex(cplx z) {
    return {0.5 * std::log1p(2.0 * z.real() + std::norm(z)), std::atan2(z.imag(), 1.0 + z.real())};
}

}  // namespace

cplx spin_step_ratio(cplx R, double eps) { return 1.0 + spin_step_delta(R, eps); }

StationarySolution solve_spin_dtscs(const TimeGrid& grid, cplx xi_i, cplx xi_f, double S, double hbar) {
    twice_spin(S);
    require_finite(xi_i, "solve_spin_dtscs");
    require_finite(xi_f, "solve_spin_dtscs");
    const int N = grid.N;
    const double eps = grid.eps;
    const cplx c = std::conj(xi_f) * xi_i;
    const cplx RS = c * std::exp(-I * grid.T);
    if (std::abs(1.0 + RS) < 1e-8) throw DegenerateError("solve_spin_dtscs: 1 + R vanishes, amplitude degenerate");

    // Scalar fixed point R = c beta(R)^N; the reduced path is then xi_n = beta^n xi_I.
    cplx R = RS;
    if (c != cplx(0.0)) {
        double best = INFINITY;
        int it = 0;
        for (; it < 60; ++it) {
            cplx beta = spin_step_ratio(R, eps);
            cplx lb = log1p_complex(spin_step_delta(R, eps));
            cplx bn = std::exp(static_cast<double>(N) * lb);
            cplx F = R - c * bn;
            best = std::min(best, std::abs(F));
            if (std::abs(F) <= 4e-16 * std::max(1.0, std::abs(R))) break;
            cplx bq = R - 1.0 + I * eps * (1.0 + R);
            cplx dbeta = (1.0 - beta * (1.0 + I * eps)) / (2.0 * beta + bq);
            cplx dF = 1.0 - c * static_cast<double>(N) * bn / beta * dbeta;
            R -= F / dF;
        }
        if (it == 60 && best > 1e-12) throw ConvergenceError("solve_spin_dtscs: conserved R did not converge", best, it);
    }
    const cplx beta = spin_step_ratio(R, eps);
    const cplx lb = log1p_complex(spin_step_delta(R, eps));

    StationarySolution s;
    s.path = DiscretePath(grid, xi_i, xi_f);
    for (int n = 1; n < N; ++n) {
        s.path.fwd[n] = std::exp(static_cast<double>(n) * lb) * xi_i;
        s.path.bwd[n] = std::exp(static_cast<double>(N - n) * lb) * std::conj(xi_f);
    }
    DiscreteModel m = DiscreteModel::spin(S, hbar);
    s.residual_inf = inf_norm(stationarity_residual(s.path, m));
    if (s.residual_inf > 1e-9) {
        spdlog::debug("solve_spin_dtscs: residual {} after reduction, polishing", s.residual_inf);
        NewtonOptions opt;
        opt.tolerance = 1e-12;
        s = newton_polish(s.path, m, opt);
    }

    ConservedPair cp;
    cp.R_continuum = RS;
    cp.beta = beta;
    for (int n = 1; n < N; ++n) cp.per_step_R.push_back(s.path.bwd[n] * s.path.fwd[n]);
    for (int n = 1; n <= N; ++n) cp.per_step_P.push_back(s.path.bwd[n] * s.path.fwd[n - 1]);
    cp.R = R;
    cp.P = beta != cplx(0.0) ? R / beta : cplx(0.0);
    s.conserved = cp;
    finish(s, m);
    return s;
}

StationarySolution newton_polish(DiscretePath path, const DiscreteModel& m, const NewtonOptions& opt) {
    const int N = path.grid.N;
    StationarySolution s;
    CVec F = stationarity_residual(path, m);
    double res = inf_norm(F);
    int it = 0;
    // Keep iterating past the tolerance: the residual is O(eps^2) smaller than the
    // pointwise error, so stopping at the first acceptable residual leaves O(eps) slack.
    const double target = std::max(opt.tolerance * 1e-4, 1e-15);
    while (res >= target && N > 1) {
        if (it >= opt.max_iterations)
            throw ConvergenceError("newton: no convergence within " + std::to_string(opt.max_iterations) +
                                       " iterations",
                                   res, it);
        ++it;
        BandedLU lu(stationarity_jacobian(path, m));
        if (lu.singular()) throw ConvergenceError("newton: singular Jacobian", res, it);
        CVec dx = lu.solve(F);
        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h, lambda *= 0.5) {
            DiscretePath trial = path;
            for (int n = 1; n < N; ++n) {
                trial.bwd[n] -= lambda * dx[2 * (n - 1)];
                trial.fwd[n] -= lambda * dx[2 * (n - 1) + 1];
            }
            CVec Ft = stationarity_residual(trial, m);
            double rt = inf_norm(Ft);
            if (std::isfinite(rt) && rt < res) {
                path = std::move(trial);
                F = std::move(Ft);
                res = rt;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // stalled at rounding level
    }
    if (res >= opt.tolerance) throw ConvergenceError("newton: residual above tolerance", res, it);
    s.path = std::move(path);
    s.residual_inf = res;
    s.iterations = it;
    finish(s, m);
    return s;
}

StationarySolution solve_general_newton(const TimeGrid& grid, const DiscreteModel& m, cplx xi_i, cplx xi_f,
                                        const NewtonOptions& opt) {
    DiscretePath start(grid, xi_i, xi_f);
    for (int n = 1; n < grid.N; ++n) {
        auto [x, xb] = ct_stationary_reference(grid.t(n), xi_i, xi_f, grid.T);
        start.fwd[n] = x;
        start.bwd[n] = xb;
    }
    StationarySolution s = newton_polish(std::move(start), m, opt);
    if (m.model == Model::spin) {
        ConservedPair cp;
        cp.R_continuum = std::conj(xi_f) * xi_i * std::exp(-I * grid.T);
        for (int n = 1; n < grid.N; ++n) cp.per_step_R.push_back(s.path.bwd[n] * s.path.fwd[n]);
        for (int n = 1; n <= grid.N; ++n) cp.per_step_P.push_back(s.path.bwd[n] * s.path.fwd[n - 1]);
        if (!cp.per_step_R.empty()) cp.R = cp.per_step_R.front();
        if (cp.per_step_P.size() > 1) cp.P = cp.per_step_P[1];
        s.conserved = cp;
    }
    return s;
}

SpinStationaryAction stationary_action_spin(const StationarySolution& sol, double S, double hbar) {
    const DiscretePath& p = sol.path;
    p.validate();
    const int N = p.grid.N;
    const double eps = p.grid.eps;
    const CVec& x = p.fwd;
    const CVec& xb = p.bwd;
    HamiltonianKernel k = spin_kernel(S, hbar);
    auto d = [&](int n) { return -I * (eps / hbar) * k.value(xb[n], x[n - 1]); };
    auto L = [](cplx v) {
        if (std::abs(1.0 + v) < 1e-300) throw PoleError("stationary_action_spin: 1 + P vanishes");
        return std::log(1.0 + v);
    };
    SpinStationaryAction r;
    if (N == 1) {
        r.initial_discontinuity = dtscs_action(p, k, S, hbar).total;
        r.total = r.initial_discontinuity;
        return r;
    }
    r.final_discontinuity = 2.0 * S * L(xb[N] * x[N - 1]) - S * std::log1p(std::norm(x[N])) + d(N);
    r.initial_discontinuity = 2.0 * S * L(xb[1] * x[0]) - S * std::log1p(std::norm(x[0])) + d(1);
    r.log_term = -2.0 * S * L(xb[N - 1] * x[N - 1]);
    CompensatedSum in;
    for (int n = 2; n < N; ++n) {
        cplx ratio = (1.0 + xb[n] * x[n - 1]) / (1.0 + xb[n - 1] * x[n - 1]);
        if (std::abs(std::arg(ratio)) > 0.5 * std::numbers::pi)
            throw BranchError("stationary_action_spin: per-step phase jump above pi/2");
        in.add(2.0 * S * std::log(ratio) + d(n));
    }
    r.interior = in.value();
    CompensatedSum t;
    t.add(r.final_discontinuity);
    t.add(r.interior);
    t.add(r.log_term);
    t.add(r.initial_discontinuity);
    r.total = t.value();
    return r;
}

namespace {

CVec dtps_residual(const PhasePath& path, const PhaseHamiltonian& H, double eps) {
    const int N = path.grid.N;
    CVec F(2 * static_cast<size_t>(N) - 1);
    for (int n = 1; n <= N; ++n) {
        F[2 * (n - 1)] = path.q[n] - path.q[n - 1] - eps * H.dp(path.p[n], path.q[n]);
        if (n < N) F[2 * n - 1] = path.p[n + 1] - path.p[n] + eps * H.dq(path.p[n], path.q[n]);
    }
    return F;
}

BandedMatrix dtps_jacobian(const PhasePath& path, const PhaseHamiltonian& H, double eps) {
    const int N = path.grid.N;
    BandedMatrix J(2 * N - 1, 1, 1);
    for (int n = 1; n <= N; ++n) {
        const int ip = 2 * (n - 1);
        cplx p = path.p[n], q = path.q[n];
        J.set(ip, ip, -eps * H.dpp(p, q));
        if (n < N) J.set(ip, ip + 1, 1.0 - eps * H.dpq(p, q));
        if (n > 1) J.set(ip, ip - 1, -1.0);
        if (n < N) {
            const int iq = 2 * n - 1;
            J.set(iq, ip, -1.0 + eps * H.dpq(p, q));
            J.set(iq, iq, eps * H.dqq(p, q));
            J.set(iq, iq + 1, 1.0);
        }
    }
    return J;
}

}  // namespace

ClassicalPhaseSolution solve_dtps_classical(const TimeGrid& grid, const PhaseHamiltonian& H, double q_i,
                                            double q_f, const NewtonOptions& opt) {
    const int N = grid.N;
    if (H.linear && (grid.T == 0.0 || std::abs(std::remainder(grid.T, std::numbers::pi)) < 1e-9))
        throw SingularBVPError("solve_dtps_classical: T is a multiple of pi, conjugate point");
    PhasePath path{grid, CVec(N + 1), CVec(N + 1)};
    path.q[0] = q_i;
    path.q[N] = q_f;
    // straight-line start; exact after one step for the oscillator
    for (int n = 1; n < N; ++n) path.q[n] = q_i + (q_f - q_i) * n / static_cast<double>(N);
    for (int n = 1; n <= N; ++n) path.p[n] = grid.T > 0 ? (q_f - q_i) / grid.T : 0.0;

    CVec F = dtps_residual(path, H, grid.eps);
    double res = inf_norm(F);
    int it = 0;
    while (res > opt.tolerance * 1e-2) {
        if (it >= opt.max_iterations) throw ConvergenceError("solve_dtps_classical: no convergence", res, it);
        ++it;
        BandedLU lu(dtps_jacobian(path, H, grid.eps));
        if (lu.singular() || lu.min_abs_pivot() < 1e-14)
            throw SingularBVPError("solve_dtps_classical: singular linearised system");
        CVec dx = lu.solve(F);
        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h, lambda *= 0.5) {
            PhasePath trial = path;
            for (int n = 1; n <= N; ++n) {
                trial.p[n] -= lambda * dx[2 * (n - 1)];
                if (n < N) trial.q[n] -= lambda * dx[2 * n - 1];
            }
            CVec Ft = dtps_residual(trial, H, grid.eps);
            double rt = inf_norm(Ft);
            if (std::isfinite(rt) && (rt < res || H.linear)) {
                path = std::move(trial);
                F = std::move(Ft);
                res = rt;
                accepted = true;
                break;
            }
        }
        if (H.linear && it >= 2) break;  // one step is exact; a second only cleans rounding
        if (!accepted) {
            if (res < 1e-13) break;
            throw ConvergenceError("solve_dtps_classical: damping failed", res, it);
        }
    }
    for (int n = 1; n <= N; ++n) path.p[n] = path.p[n].real();
    for (int n = 0; n <= N; ++n) path.q[n] = path.q[n].real();
    ClassicalPhaseSolution s;
    s.path = path;
    s.residual_inf = inf_norm(dtps_residual(path, H, grid.eps));
    s.action = dtps_action(path, H);
    return s;
}

double ho_classical_action(double q_i, double q_f, double T, double hbar) {
    return ((q_i * q_i + q_f * q_f) * std::cos(T) - 2.0 * q_i * q_f) / (2.0 * std::sin(T)) + 0.5 * hbar * T;
}

}  // namespace pathint
