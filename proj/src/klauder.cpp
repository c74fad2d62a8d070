#include "pathint/klauder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <spdlog/spdlog.h>

#include "pathint/bvp.hpp"
#include "pathint/errors.hpp"

namespace pathint {

namespace {

constexpr cplx I{0.0, 1.0};

// c * exp(k (t - anchor)); anchors keep every exponent non-positive in real part on [0, T].
struct ExpTerm {
    cplx c, k;
    double anchor;
};

struct ExpSum {
    std::vector<ExpTerm> terms;

    cplx operator()(double t, int deriv = 0) const {
        cplx s = 0.0;
        for (auto& e : terms) s += e.c * std::pow(e.k, deriv) * std::exp(e.k * (t - e.anchor));
        return s;
    }
    ExpSum derivative() const {
        ExpSum d = *this;
        for (auto& e : d.terms) e.c *= e.k;
        return d;
    }
};

// exp(z) - 1 over z
cplx phi1(cplx z) {
    if (std::abs(z) < 1e-3) return 1.0 + z * (0.5 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z / 720.0))));
    return (std::exp(z) - 1.0) / z;
}

cplx integrate_product(const ExpSum& a, const ExpSum& b, double T) {
    CompensatedSum acc;
    for (auto& x : a.terms) {
        for (auto& y : b.terms) {
            cplx K = x.k + y.k;
            cplx e0 = -x.k * x.anchor - y.k * y.anchor;
            cplx e1 = e0 + K * T;
            cplx v;
            if (std::abs(K) * T < 1e-3)
                v = std::exp(e0) * T * phi1(K * T);
            else if (e1.real() > e0.real())
                v = std::exp(e1) * (-phi1(-K * T)) * (-T);  // exp(e1) (1 - exp(-KT)) / K
            else
                v = std::exp(e0) * T * phi1(K * T);
            acc.add(x.c * y.c * v);
        }
    }
    return acc.value();
}

struct HoPair {
    ExpSum xb, x;
    cplx lam_fast, mu_fast;
};

HoPair ho_klauder_pair(const KlauderParams& p) {
    const double e = p.epsilon, T = p.T;
    const cplx s = std::sqrt(1.0 + 2.0 * I * e);
    const cplx lam_s = -2.0 * I / (1.0 + s), lam_f = (1.0 + s) / e;
    const cplx mu_s = 2.0 * I / (1.0 + s), mu_f = -(1.0 + s) / e;
    if (!std::isfinite(std::abs(lam_f)) || std::abs(lam_f) * T > 1e12)
        throw IllConditionedError("Klauder HO: characteristic roots out of range");

    // x = A e^{lam_s t} + B e^{lam_f (t - T)}
    const cplx eB0 = std::exp(-lam_f * T), eA = std::exp(lam_s * T);
    cplx det = 1.0 - eA * eB0;
    cplx A = (p.xi_i - eB0 * p.xi_f) / det, B = (p.xi_f - eA * p.xi_i) / det;
    // xb = C e^{mu_s (t - T)} + D e^{mu_f t}
    const cplx xbi = std::conj(p.xi_i), xbf = std::conj(p.xi_f);
    const cplx eC = std::exp(-mu_s * T), eD = std::exp(mu_f * T);
    cplx D = (xbi - xbf * eC) / (1.0 - eD * eC);
    cplx C = xbf - D * eD;

    HoPair h;
    h.x.terms = {{A, lam_s, 0.0}, {B, lam_f, T}};
    h.xb.terms = {{C, mu_s, T}, {D, mu_f, 0.0}};
    h.lam_fast = lam_f;
    h.mu_fast = mu_f;
    return h;
}

cplx xb_classical(const KlauderParams& p, double t) { return std::conj(p.xi_f) * std::exp(I * (t - p.T)); }
cplx x_classical(const KlauderParams& p, double t) { return p.xi_i * std::exp(-I * t); }

cplx safe_ratio(cplx a, cplx b) {
    if (b == 0.0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    return a / b;
}

void fill_chi_from_samples(const KlauderParams& p, const PathSamples& s, ChiProfile& c) {
    c.t = s.t;
    c.chi_bar.resize(s.size());
    c.chi.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        c.chi_bar[i] = safe_ratio(s.xb[i], xb_classical(p, s.t[i]));
        c.chi[i] = safe_ratio(s.x[i], x_classical(p, s.t[i]));
    }
}

}  // namespace

void KlauderParams::validate() const {
    if (!std::isfinite(T) || !(T > 0.0)) throw ValidationError("Klauder: T must be positive");
    if (!std::isfinite(epsilon) || !(epsilon > 0.0)) throw ValidationError("Klauder: epsilon must be positive");
    if (epsilon > T / 20.0) throw ValidationError("Klauder: need epsilon <= T/20");
    if (epsilon < 1e-8) throw IllConditionedError("Klauder: epsilon below 1e-8");
    if (!(hbar > 0.0)) throw ValidationError("Klauder: hbar must be positive");
    require_finite(xi_i, "Klauder xi_i");
    require_finite(xi_f, "Klauder xi_f");
}

double KlauderSolution::action_error() const {
    return exponent_distance(exponent.total, exact_exponent);
}

std::vector<double> layer_mesh(double T, double h0, double ratio, double hmax) {
    if (!(T > 0.0) || !(h0 > 0.0) || !(ratio >= 1.0) || !(hmax >= h0)) throw ValidationError("layer_mesh: bad arguments");
    std::vector<double> left{0.0};
    double t = 0.0, h = h0;
    while (t + h < 0.5 * T) {
        t += h;
        left.push_back(t);
        h = std::min(h * ratio, hmax);
    }
    std::vector<double> pts = left;
    for (double x : left) pts.push_back(T - x);
    pts.push_back(0.5 * T);
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double x : pts)
        if (out.empty() || x - out.back() > 1e-12 * T) out.push_back(x);
    out.back() = T;
    return out;
}

KlauderSolution solve_kcs_ho(const KlauderParams& p, int interior_samples) {
    p.validate();
    if (interior_samples < 10) throw ValidationError("solve_kcs_ho: need at least 10 interior samples");
    const HoPair h = ho_klauder_pair(p);
    const ExpSum dxb = h.xb.derivative(), dx = h.x.derivative();
    const double e = p.epsilon, T = p.T;

    KlauderSolution sol;
    ActionBreakdown& a = sol.exponent;
    a.eps_term = -0.5 * e * integrate_product(dxb, dx, T);
    a.canonical = -0.5 * (integrate_product(h.xb, dx, T) - integrate_product(dxb, h.x, T));
    a.dynamical = -I * integrate_product(h.xb, h.x, T);
    a.total = a.eps_term + a.canonical + a.dynamical;
    sol.action = ActionBreakdown::action(a.total, p.hbar);
    sol.exact_exponent = exact_cs_exponent(p.xi_i, p.xi_f, T);

    PathSamples& s = sol.samples;
    s.epsilon = e;
    s.t = layer_mesh(T, e / 40.0, 1.1, T / interior_samples);
    const std::size_t n = s.t.size();
    s.xb.resize(n), s.x.resize(n), s.dxb.resize(n), s.dx.resize(n), s.ddxb.resize(n), s.ddx.resize(n);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = s.t[i];
        s.xb[i] = h.xb(t), s.x[i] = h.x(t);
        s.dxb[i] = h.xb(t, 1), s.dx[i] = h.x(t, 1);
        s.ddxb[i] = h.xb(t, 2), s.ddx[i] = h.x(t, 2);
        res = std::max(res, std::abs(0.5 * e * s.ddxb[i] + s.dxb[i] - I * s.xb[i]));
        res = std::max(res, std::abs(0.5 * e * s.ddx[i] - s.dx[i] - I * s.x[i]));
    }
    sol.ode_residual = res;
    sol.bc_error = std::max({std::abs(h.x(0.0) - p.xi_i), std::abs(h.x(T) - p.xi_f),
                             std::abs(h.xb(0.0) - std::conj(p.xi_i)), std::abs(h.xb(T) - std::conj(p.xi_f))});
    sol.mesh_cells = static_cast<int>(n) - 1;

    ChiProfile& c = sol.chi;
    fill_chi_from_samples(p, s, c);
    c.rate = 2.0 * (1.0 / e + I);
    c.exact_rate = h.lam_fast + I;
    const cplx chi_b0 = safe_ratio(std::conj(p.xi_i), xb_classical(p, 0.0));
    const cplx chi_T = safe_ratio(p.xi_f, x_classical(p, T));
    c.asym_chi_bar.resize(n);
    c.asym_chi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.asym_chi_bar[i] = 1.0 + (chi_b0 - 1.0) * std::exp(-c.rate * s.t[i]);
        c.asym_chi[i] = 1.0 + (chi_T - 1.0) * std::exp(-c.rate * (T - s.t[i]));
    }
    return sol;
}

PathSamples sample_kcs_ho(const KlauderParams& p, const std::vector<double>& times) {
    p.validate();
    const HoPair h = ho_klauder_pair(p);
    PathSamples s;
    s.epsilon = p.epsilon;
    s.t = times;
    for (double t : times) {
        s.xb.push_back(h.xb(t));
        s.x.push_back(h.x(t));
        s.dxb.push_back(h.xb(t, 1));
        s.dx.push_back(h.x(t, 1));
        s.ddxb.push_back(h.xb(t, 2));
        s.ddx.push_back(h.x(t, 2));
    }
    return s;
}

namespace {

// y = (xb, x, eps xb', eps x'); scaled so every component stays O(1) through the layers.
BvpProblem spin_problem(const KlauderParams& p) {
    const double e = p.epsilon;
    BvpProblem bp;
    bp.m = 4;
    bp.rhs = [e](double, const cplx* y, cplx* f) {
        const cplx g = 1.0 + y[0] * y[1];
        f[0] = y[2] / e;
        f[1] = y[3] / e;
        f[2] = -2.0 * y[2] / e + 2.0 * I * y[0] + 2.0 * y[1] * y[2] * y[2] / (e * g);
        f[3] = 2.0 * y[3] / e + 2.0 * I * y[1] + 2.0 * y[0] * y[3] * y[3] / (e * g);
    };
    bp.jacobian = [e](double, const cplx* y, cplx* J) {
        const cplx xb = y[0], x = y[1], wb = y[2], w = y[3];
        const cplx g = 1.0 + xb * x, g2 = g * g;
        std::fill(J, J + 16, cplx(0.0));
        J[0 * 4 + 2] = 1.0 / e;
        J[1 * 4 + 3] = 1.0 / e;
        J[2 * 4 + 0] = 2.0 * I - 2.0 * x * x * wb * wb / (e * g2);
        J[2 * 4 + 1] = 2.0 * wb * wb / (e * g2);
        J[2 * 4 + 2] = -2.0 / e + 4.0 * x * wb / (e * g);
        J[3 * 4 + 0] = 2.0 * w * w / (e * g2);
        J[3 * 4 + 1] = 2.0 * I - 2.0 * xb * xb * w * w / (e * g2);
        J[3 * 4 + 3] = 2.0 / e + 4.0 * xb * w / (e * g);
    };
    bp.left = {{0, std::conj(p.xi_i)}, {1, p.xi_i}};
    bp.right = {{0, std::conj(p.xi_f)}, {1, p.xi_f}};
    return bp;
}

// Layer closed forms for chi_bar (rising from t=0) and chi (rising toward T), with t-derivatives.
struct SpinChiSeed {
    cplx R, mu, chi_b0, chi_T;

    std::pair<cplx, cplx> chi_bar(double t) const {
        const cplx al = 1.0 + R * chi_b0, be = chi_b0 - 1.0, E = std::exp(-mu * t);
        const cplx den = al - be * R * E;
        return {(al + be * E) / den, be * (-mu * E) * al * (1.0 + R) / (den * den)};
    }
    std::pair<cplx, cplx> chi(double t, double T) const {
        const cplx al = 1.0 + R * chi_T, be = chi_T - 1.0, E = std::exp(-mu * (T - t));
        const cplx den = al - be * R * E;
        return {(al + be * E) / den, be * (mu * E) * al * (1.0 + R) / (den * den)};
    }
};

double spin_residual_at(const BvpSolution& s, double t, double e) {
    cplx y[4], dy[4];
    s.eval(t, y, dy);
    const cplx g = 1.0 + y[0] * y[1];
    const cplx r1 = 0.5 * dy[2] - y[1] * y[2] * y[2] / (e * g) + y[2] / e - I * y[0];
    const cplx r2 = 0.5 * dy[3] - y[0] * y[3] * y[3] / (e * g) - y[3] / e - I * y[1];
    return std::max(std::abs(r1), std::abs(r2));
}

}  // namespace

KlauderSolution solve_kscs_spin(const KlauderParams& p, double S) {
    p.validate();
    twice_spin(S);
    const double e = p.epsilon, T = p.T;
    const cplx R = std::conj(p.xi_f) * p.xi_i * std::exp(-I * T);
    if (std::abs(1.0 + R) < 1e-8) throw DegenerateError("Klauder spin: 1 + R^S vanishes");

    SpinChiSeed seed{R, 2.0 * (1.0 / e + I * (1.0 - R) / (1.0 + R)), 0.0, 0.0};
    const bool have_chi = p.xi_i != 0.0 && p.xi_f != 0.0;
    if (have_chi) {
        seed.chi_b0 = std::conj(p.xi_i) / xb_classical(p, 0.0);
        seed.chi_T = p.xi_f / x_classical(p, T);
    }
    std::optional<HoPair> ho;
    if (!have_chi) ho = ho_klauder_pair(p);

    auto seed_at = [&](double t) {
        CVec y(4);
        if (have_chi) {
            auto [cb, dcb] = seed.chi_bar(t);
            auto [c, dc] = seed.chi(t, T);
            const cplx xbs = xb_classical(p, t), xs = x_classical(p, t);
            y[0] = cb * xbs;
            y[1] = c * xs;
            y[2] = e * (dcb * xbs + cb * I * xbs);
            y[3] = e * (dc * xs - c * I * xs);
        } else {
            y[0] = ho->xb(t);
            y[1] = ho->x(t);
            y[2] = e * ho->xb(t, 1);
            y[3] = e * ho->x(t, 1);
        }
        return y;
    };

    const BvpProblem bp = spin_problem(p);
    std::vector<double> mesh = layer_mesh(T, e / 10.0, 1.2, T / 1000.0);
    std::vector<CVec> guess;
    for (double t : mesh) guess.push_back(seed_at(t));

    const double target = e;  // an order of magnitude inside the 10 eps requirement
    BvpSolution bs;
    double worst = 0.0, previous = INFINITY;
    int total_iterations = 0;
    for (int round = 0;; ++round) {
        bs = solve_collocation(bp, mesh, guess);
        total_iterations += bs.iterations;
        std::vector<double> next{mesh[0]};
        worst = 0.0;
        for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
            const double a = mesh[i], h = mesh[i + 1] - mesh[i];
            double r = 0.0;
            for (double q : {0.25, 0.5, 0.75}) r = std::max(r, spin_residual_at(bs, a + q * h, e));
            worst = std::max(worst, r);
            if (r > target) next.push_back(a + 0.5 * h);
            next.push_back(mesh[i + 1]);
        }
        spdlog::debug("klauder spin round {}: cells {}, residual {:.3e}", round, mesh.size() - 1, worst);
        if (worst <= target) break;
        // bisecting cells of ~eps^2 width stops helping once roundoff in the interpolant's
        // derivative dominates; accept a stalled residual that is inside 10 eps
        if (worst > 0.5 * previous && worst <= 10.0 * e) break;
        previous = worst;
        if (round >= 16 || next.size() > 400000)
            throw MeshError("Klauder spin: layer refinement did not reach the residual target");
        guess.clear();
        for (double t : next) {
            CVec y(4);
            bs.eval(t, y.data(), nullptr);
            guess.push_back(y);
        }
        mesh = std::move(next);
    }

    KlauderSolution sol;
    sol.ode_residual = worst;
    sol.newton_iterations = total_iterations;
    sol.mesh_cells = static_cast<int>(mesh.size()) - 1;

    // action on 4-point Gauss-Legendre per cell
    const QuadratureRule gl = gauss_legendre(4);
    CompensatedSum se, sc, sd;
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
        const double a = mesh[i], h = mesh[i + 1] - mesh[i];
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double t = a + 0.5 * h * (gl.nodes[q] + 1.0), w = 0.5 * h * gl.weights[q];
            cplx y[4];
            bs.eval(t, y, nullptr);
            const cplx u = y[2] / e, v = y[3] / e, g = 1.0 + y[0] * y[1];
            se.add(w * (-S * e * u * v / (g * g)));
            sc.add(w * (-S * (y[0] * v - u * y[1]) / g));
            sd.add(w * (I * S * (1.0 - y[0] * y[1]) / g));
        }
    }
    ActionBreakdown& ab = sol.exponent;
    ab.eps_term = se.value();
    ab.canonical = sc.value();
    ab.dynamical = sd.value();
    ab.total = ab.eps_term + ab.canonical + ab.dynamical;
    sol.action = ActionBreakdown::action(ab.total, p.hbar);
    sol.exact_exponent = exact_scs_exponent(p.xi_i, p.xi_f, T, S);
    const double layers = std::log((1.0 + std::norm(p.xi_f)) * (1.0 + std::norm(p.xi_i)));
    sol.predicted_log_term = I * p.hbar * S * (layers - 2.0 * std::log(1.0 + R));
    sol.predicted_interior = p.hbar * S * T;

    PathSamples& s = sol.samples;
    s.epsilon = e;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        std::vector<double> ts{mesh[i]};
        if (i + 1 < mesh.size()) ts.push_back(0.5 * (mesh[i] + mesh[i + 1]));
        for (double t : ts) {
            cplx y[4], dy[4];
            bs.eval(std::min(t, T), y, dy);
            s.t.push_back(t);
            s.xb.push_back(y[0]);
            s.x.push_back(y[1]);
            s.dxb.push_back(y[2] / e);
            s.dx.push_back(y[3] / e);
            s.ddxb.push_back(dy[2] / e);
            s.ddx.push_back(dy[3] / e);
        }
    }
    const CVec& y0 = bs.y.front();
    const CVec& yT = bs.y.back();
    sol.bc_error = std::max({std::abs(y0[0] - std::conj(p.xi_i)), std::abs(y0[1] - p.xi_i),
                             std::abs(yT[0] - std::conj(p.xi_f)), std::abs(yT[1] - p.xi_f)});

    ChiProfile& c = sol.chi;
    fill_chi_from_samples(p, s, c);
    c.rate = seed.mu;
    c.asym_chi_bar.resize(s.size());
    c.asym_chi.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        c.asym_chi_bar[i] = have_chi ? seed.chi_bar(s.t[i]).first : cplx(1.0);
        c.asym_chi[i] = have_chi ? seed.chi(s.t[i], T).first : cplx(1.0);
    }
    return sol;
}

cplx epsilon_term_value(const PathSamples& s, const ModelParams& m) {
    m.validate();
    const std::size_t n = s.size();
    if (n < 2 || s.xb.size() != n || s.x.size() != n || s.dxb.size() != n || s.dx.size() != n ||
        s.ddxb.size() != n || s.ddx.size() != n)
        throw ShapeError("epsilon_term_value: inconsistent samples");
    const double e = s.epsilon;
    if (!(e > 0.0)) throw ValidationError("epsilon_term_value: samples carry no epsilon");
    const double t0 = s.t.front(), t1 = s.t.back();
    const bool spin = m.model == Model::spin;

    auto F = [&](std::size_t i, cplx& f, cplx& df) {
        const cplx a = s.dxb[i], b = s.dx[i];
        const cplx prod = a * b, dprod = s.ddxb[i] * b + a * s.ddx[i];
        if (!spin) {
            f = prod;
            df = dprod;
            return;
        }
        const cplx g = 1.0 + s.xb[i] * s.x[i], dg = a * s.x[i] + s.xb[i] * b;
        f = prod / (g * g);
        df = dprod / (g * g) - 2.0 * prod * dg / (g * g * g);
    };

    CompensatedSum acc;
    cplx fa, da;
    F(0, fa, da);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = s.t[i + 1] - s.t[i];
        if (!(h > 0.0)) throw QuadratureError("epsilon_term_value: sample times not increasing");
        const bool in_layer = s.t[i] < t0 + 5.0 * e || s.t[i + 1] > t1 - 5.0 * e;
        if (in_layer && h > e) throw QuadratureError("epsilon_term_value: boundary layer undersampled");
        cplx fb, db;
        F(i + 1, fb, db);
        acc.add(0.5 * h * (fa + fb) + h * h / 12.0 * (da - db));
        fa = fb;
        da = db;
    }
    const cplx pref = spin ? I * m.hbar * m.spin_S * e : 0.5 * I * m.hbar * e;
    return pref * acc.value();
}

SemiEpsResult wrong_semi_eps_prescription(const KlauderParams& p, int N) {
    KlauderSolution k = solve_kcs_ho(p);
    SemiEpsResult r;
    r.action_without_eps = ActionBreakdown::action(k.exponent.canonical + k.exponent.dynamical, p.hbar);
    const QuadraticForm f = build_semi_eps_form(TimeGrid(N, p.T));
    r.convergent = is_convergent(f);
    try {
        r.fluctuation = gaussian_K(f);
    } catch (const SingularMatrixError&) {
        r.singular = true;
    }
    return r;
}

}  // namespace pathint
