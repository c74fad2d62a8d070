#include "pathint/discrete_action.hpp"

#include <cmath>
#include <numbers>

#include "pathint/errors.hpp"

namespace pathint {

namespace {
constexpr cplx I{0.0, 1.0};
}

TimeGrid::TimeGrid(int n, double t) : N(n), T(t), eps(t / n) {
    if (n < 1) throw ValidationError("TimeGrid: N must be at least 1");
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("TimeGrid: T must be finite and non-negative");
}

DiscretePath::DiscretePath(TimeGrid g, cplx xi_i, cplx xi_f) : grid(g), fwd(g.N + 1), bwd(g.N + 1) {
    fwd[0] = xi_i;
    fwd[g.N] = xi_f;
    bwd[0] = std::conj(xi_i);
    bwd[g.N] = std::conj(xi_f);
}

DiscretePath DiscretePath::honest(TimeGrid g, const CVec& fwd) {
    if (static_cast<int>(fwd.size()) != g.N + 1) throw ShapeError("DiscretePath::honest: length mismatch");
    DiscretePath p(g, fwd.front(), fwd.back());
    for (int n = 0; n <= g.N; ++n) {
        p.fwd[n] = fwd[n];
        p.bwd[n] = std::conj(fwd[n]);
    }
    return p;
}

void DiscretePath::validate() const {
    const size_t len = static_cast<size_t>(grid.N) + 1;
    if (fwd.size() != len || bwd.size() != len)
        throw ShapeError("DiscretePath: sequence lengths do not match the grid");
    if (bwd[grid.N] != std::conj(fwd[grid.N]) || bwd[0] != std::conj(fwd[0]))
        throw ValidationError("DiscretePath: endpoints not pinned");
}

double DiscretePath::final_jump() const { return std::abs(fwd[grid.N] - fwd[grid.N - 1]); }

double DiscretePath::initial_jump() const { return std::abs(bwd[1] - bwd[0]); }

ActionBreakdown dtcs_action(const DiscretePath& path, const HamiltonianKernel& kernel, double hbar) {
    path.validate();
    const int N = path.grid.N;
    const double eps = path.grid.eps;
    const CVec& x = path.fwd;
    const CVec& xb = path.bwd;
    CompensatedSum tot, et, ct, dt;
    tot.add(-0.5 * (std::norm(x[0]) + std::norm(x[N])));
    for (int n = 1; n <= N; ++n) {
        cplx h = kernel.value(xb[n], x[n - 1]);
        cplx d = -I * (eps / hbar) * h;
        tot.add(xb[n] * x[n - 1] + d);
        if (n < N) tot.add(-xb[n] * x[n]);
        cplx dxb = xb[n] - xb[n - 1], dx = x[n] - x[n - 1];
        et.add(-0.5 * dxb * dx);
        ct.add(-0.5 * (xb[n] * dx - dxb * x[n]));
        dt.add(d);
    }
    ActionBreakdown r;
    r.total = tot.value();
    r.eps_term = et.value();
    r.canonical = ct.value();
    r.dynamical = dt.value();
    r.mode = ActionMode::exact;
    return r;
}

ActionBreakdown dtscs_action(const DiscretePath& path, const HamiltonianKernel& kernel, double S, double hbar,
                             ActionMode mode) {
    path.validate();
    twice_spin(S);
    const int N = path.grid.N;
    const double eps = path.grid.eps;
    const CVec& x = path.fwd;
    const CVec& xb = path.bwd;
    require_finite(x[0], "dtscs_action");
    require_finite(x[N], "dtscs_action");

    auto one_plus = [](cplx v, const char* what) {
        cplx g = 1.0 + v;
        if (std::abs(g) < 1e-300) throw PoleError(std::string("dtscs_action: 1 + ") + what + " vanishes");
        return g;
    };

    CompensatedSum log_part, et1, et2, ct, dt;
    // Neighbouring factors are paired so each log is close to 0 on smooth paths;
    // exp of the result does not depend on the branch because 2S is an integer.
    log_part.add(2.0 * S * std::log(one_plus(xb[1] * x[0], "P_1")));
    for (int n = 1; n < N; ++n) {
        cplx ratio = one_plus(xb[n + 1] * x[n], "P_n") / one_plus(xb[n] * x[n], "R_n");
        if (std::abs(std::arg(ratio)) > 0.5 * std::numbers::pi)
            throw BranchError("dtscs_action: per-step phase jump above pi/2 at n = " + std::to_string(n));
        log_part.add(2.0 * S * std::log(ratio));
    }
    log_part.add(-S * std::log((1.0 + std::norm(x[0])) * (1.0 + std::norm(x[N]))));

    for (int n = 1; n <= N; ++n) {
        cplx d = -I * (eps / hbar) * kernel.value(xb[n], x[n - 1]);
        dt.add(d);
        cplx g = one_plus(xb[n] * x[n], "R_n");
        cplx dxb = xb[n] - xb[n - 1], dx = x[n] - x[n - 1];
        cplx u = x[n] * dxb, v = xb[n] * dx;
        et1.add(-S * dxb * dx / (g * g));
        et2.add(0.5 * S * (u * u - v * v) / (g * g));
        ct.add(S * (u - v) / g);
    }

    ActionBreakdown r;
    r.eps_term = et1.value();
    r.eps2_term = et2.value();
    r.canonical = ct.value();
    r.dynamical = dt.value();
    r.mode = mode;
    if (mode == ActionMode::exact) {
        CompensatedSum t;
        t.add(log_part.value());
        t.add(r.dynamical);
        r.total = t.value();
    } else {
        r.total = r.parts_sum();
    }
    return r;
}

ThetaPhiParts dtscs_theta_phi_parts(const CVec& theta, const CVec& phi, double S) {
    if (theta.size() != phi.size() || theta.size() < 2) throw ShapeError("dtscs_theta_phi_parts: lengths");
    for (cplx th : theta)
        if (std::abs(std::sin(th)) < 1e-12)
            throw PoleError("dtscs_theta_phi_parts: theta at a pole, phi undefined");
    CompensatedSum e1, e2, c;
    for (size_t n = 1; n < theta.size(); ++n) {
        cplx dth = theta[n] - theta[n - 1], dph = phi[n] - phi[n - 1];
        cplx s = std::sin(theta[n]), hs = std::sin(0.5 * theta[n]), ht = std::tan(0.5 * theta[n]);
        e1.add(-0.25 * S * (dth * dth + dph * dph * s * s));
        e2.add(-I * S * dth * dph * ht * hs * hs);
        c.add(I * S * (dph * (std::cos(theta[n]) - 1.0) + dth * dph * ht));
    }
    return {e1.value(), e2.value(), c.value()};
}

void path_to_theta_phi(const DiscretePath& path, CVec& theta, CVec& phi) {
    path.validate();
    const int N = path.grid.N;
    theta.assign(N + 1, 0.0);
    phi.assign(N + 1, 0.0);
    cplx prev_root = 0.0;
    for (int n = 0; n <= N; ++n) {
        cplx r = path.bwd[n] * path.fwd[n];
        cplx root = std::sqrt(r);
        if (n > 0 && std::abs(-root - prev_root) < std::abs(root - prev_root)) root = -root;
        prev_root = root;
        theta[n] = 2.0 * std::atan(root);
        if (path.fwd[n] == cplx(0.0) || path.bwd[n] == cplx(0.0))
            throw PoleError("path_to_theta_phi: xi = 0, phi undefined");
        cplx f = std::log(path.fwd[n] / path.bwd[n]) / (2.0 * I);
        if (n > 0) {
            // log continues by 2 pi i, which shifts phi by pi
            double k = std::round((phi[n - 1] - f).real() / std::numbers::pi);
            f += k * std::numbers::pi;
        }
        phi[n] = f;
    }
}

PhaseHamiltonian ho_phase_hamiltonian(double hbar) {
    PhaseHamiltonian h;
    h.value = [hbar](cplx p, cplx q) { return 0.5 * (p * p + q * q - hbar); };
    h.dp = [](cplx p, cplx) { return p; };
    h.dq = [](cplx, cplx q) { return q; };
    h.dpp = [](cplx, cplx) { return cplx(1.0); };
    h.dpq = [](cplx, cplx) { return cplx(0.0); };
    h.dqq = [](cplx, cplx) { return cplx(1.0); };
    h.linear = true;
    return h;
}

void PhasePath::validate() const {
    const size_t len = static_cast<size_t>(grid.N) + 1;
    if (p.size() != len || q.size() != len) throw ShapeError("PhasePath: sequence lengths do not match the grid");
}

cplx dtps_action(const PhasePath& path, const PhaseHamiltonian& H) {
    path.validate();
    CompensatedSum s;
    for (int n = 1; n <= path.grid.N; ++n)
        s.add((path.q[n] - path.q[n - 1]) * path.p[n] - path.grid.eps * H.value(path.p[n], path.q[n]));
    return s.value();
}

DiscreteModel DiscreteModel::ho(double hbar) {
    DiscreteModel m;
    m.model = Model::ho;
    m.hbar = hbar;
    m.kernel = ho_kernel(hbar);
    return m;
}

DiscreteModel DiscreteModel::spin(double S, double hbar) {
    DiscreteModel m;
    m.model = Model::spin;
    m.S = S;
    m.hbar = hbar;
    m.kernel = spin_kernel(S, hbar);
    return m;
}

cplx DiscreteModel::a(cplx x) const { return model == Model::ho ? x : 2.0 * S * std::log(1.0 + x); }

cplx DiscreteModel::da(cplx x) const { return model == Model::ho ? cplx(1.0) : 2.0 * S / (1.0 + x); }

cplx DiscreteModel::dda(cplx x) const {
    if (model == Model::ho) return 0.0;
    cplx g = 1.0 + x;
    return -2.0 * S / (g * g);
}

cplx DiscreteModel::exponent(const DiscretePath& path) const {
    const int N = path.grid.N;
    const CVec& x = path.fwd;
    const CVec& xb = path.bwd;
    CompensatedSum s;
    if (model == Model::ho) s.add(-0.5 * (std::norm(x[0]) + std::norm(x[N])));
    else s.add(-S * std::log((1.0 + std::norm(x[0])) * (1.0 + std::norm(x[N]))));
    for (int n = 1; n <= N; ++n) {
        s.add(a(xb[n] * x[n - 1]) - I * (path.grid.eps / hbar) * kernel.value(xb[n], x[n - 1]));
        if (n < N) s.add(-a(xb[n] * x[n]));
    }
    return s.value();
}

}  // namespace pathint
