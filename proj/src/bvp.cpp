#include "pathint/bvp.hpp"

#include <algorithm>
#include <cmath>

#include "pathint/errors.hpp"

namespace pathint {

namespace {

double inf_norm(const CVec& v) {
    double m = 0.0;
    for (cplx z : v) m = std::max(m, std::abs(z));
    return m;
}

struct Collocation {
    const BvpProblem& p;
    const std::vector<double>& t;
    int m, M;  // components, cells

    int unknowns() const { return m * (M + 1); }

    void eval_f(const std::vector<CVec>& y, std::vector<CVec>& f) const {
        f.assign(M + 1, CVec(m));
        for (int i = 0; i <= M; ++i) p.rhs(t[i], y[i].data(), f[i].data());
    }

    CVec residual(const std::vector<CVec>& y, const std::vector<CVec>& f) const {
        CVec r(unknowns());
        int row = 0;
        for (auto& [c, v] : p.left) r[row++] = y[0][c] - v;
        CVec ym(m), fm(m);
        for (int i = 0; i < M; ++i) {
            const double h = t[i + 1] - t[i];
            for (int k = 0; k < m; ++k) ym[k] = 0.5 * (y[i][k] + y[i + 1][k]) - h / 8.0 * (f[i + 1][k] - f[i][k]);
            p.rhs(t[i] + 0.5 * h, ym.data(), fm.data());
            for (int k = 0; k < m; ++k)
                r[row++] = y[i + 1][k] - y[i][k] - h / 6.0 * (f[i][k] + 4.0 * fm[k] + f[i + 1][k]);
        }
        for (auto& [c, v] : p.right) r[row++] = y[M][c] - v;
        return r;
    }

    BandedMatrix jacobian(const std::vector<CVec>& y, const std::vector<CVec>& f) const {
        const int bw = m + 1;
        BandedMatrix J(unknowns(), bw, bw);
        int row = 0;
        for (auto& lc : p.left) J.set(row++, lc.first, 1.0);
        std::vector<CVec> jn(M + 1, CVec(m * m));
        for (int i = 0; i <= M; ++i) p.jacobian(t[i], y[i].data(), jn[i].data());
        CVec ym(m), jm(m * m);
        for (int i = 0; i < M; ++i) {
            const double h = t[i + 1] - t[i];
            for (int k = 0; k < m; ++k) ym[k] = 0.5 * (y[i][k] + y[i + 1][k]) - h / 8.0 * (f[i + 1][k] - f[i][k]);
            p.jacobian(t[i] + 0.5 * h, ym.data(), jm.data());
            const CVec& Ja = jn[i];
            const CVec& Jb = jn[i + 1];
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < m; ++c) {
                    // Jm * dym/dya with dym/dya = I/2 + h/8 Ja, dym/dyb = I/2 - h/8 Jb
                    cplx ma = 0.5 * jm[r * m + c], mb = 0.5 * jm[r * m + c];
                    for (int k = 0; k < m; ++k) {
                        ma += jm[r * m + k] * (h / 8.0) * Ja[k * m + c];
                        mb -= jm[r * m + k] * (h / 8.0) * Jb[k * m + c];
                    }
                    cplx da = -h / 6.0 * (Ja[r * m + c] + 4.0 * ma) - (r == c ? 1.0 : 0.0);
                    cplx db = -h / 6.0 * (Jb[r * m + c] + 4.0 * mb) + (r == c ? 1.0 : 0.0);
                    J.set(row + r, m * i + c, da);
                    J.set(row + r, m * (i + 1) + c, db);
                }
            }
            row += m;
        }
        for (auto& rc : p.right) J.set(row++, m * M + rc.first, 1.0);
        return J;
    }
};

}  // namespace

BvpSolution solve_collocation(const BvpProblem& p, const std::vector<double>& mesh, const std::vector<CVec>& guess,
                              const BvpOptions& opt) {
    const int M = static_cast<int>(mesh.size()) - 1;
    if (M < 1 || static_cast<int>(guess.size()) != M + 1) throw ShapeError("solve_collocation: mesh/guess sizes");
    if (static_cast<int>(p.left.size() + p.right.size()) != p.m)
        throw ValidationError("solve_collocation: need exactly m boundary conditions");
    for (int i = 0; i < M; ++i)
        if (!(mesh[i + 1] > mesh[i])) throw MeshError("solve_collocation: mesh not strictly increasing");

    Collocation c{p, mesh, p.m, M};
    std::vector<CVec> y = guess, f;
    // impose the boundary values on the start
    for (auto& [k, v] : p.left) y[0][k] = v;
    for (auto& [k, v] : p.right) y[M][k] = v;
    c.eval_f(y, f);
    CVec r = c.residual(y, f);
    double res = inf_norm(r);
    int it = 0;
    while (res > opt.tolerance) {
        if (it >= opt.max_iterations) throw ConvergenceError("collocation Newton did not converge", res, it);
        ++it;
        BandedLU lu(c.jacobian(y, f));
        if (lu.singular()) throw ConvergenceError("collocation Jacobian singular", res, it);
        CVec dx = lu.solve(r);
        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h, lambda *= 0.5) {
            std::vector<CVec> yt = y, ft;
            for (int i = 0; i <= M; ++i)
                for (int k = 0; k < p.m; ++k) yt[i][k] -= lambda * dx[p.m * i + k];
            c.eval_f(yt, ft);
            CVec rt = c.residual(yt, ft);
            double nr = inf_norm(rt);
            if (std::isfinite(nr) && nr < res) {
                y = std::move(yt);
                f = std::move(ft);
                r = std::move(rt);
                res = nr;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (res < 1e3 * opt.tolerance) break;
            throw ConvergenceError("collocation damping failed", res, it);
        }
    }
    BvpSolution s;
    s.t = mesh;
    s.y = std::move(y);
    s.f = std::move(f);
    s.iterations = it;
    s.residual_inf = res;
    return s;
}

int BvpSolution::cell_of(double tt) const {
    auto it = std::upper_bound(t.begin(), t.end(), tt);
    int i = static_cast<int>(it - t.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(t.size()) - 2);
}

void BvpSolution::eval(double tt, cplx* yo, cplx* dyo, cplx* d2o) const {
    const int i = cell_of(tt);
    const double h = t[i + 1] - t[i];
    const double s = (tt - t[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const double d00 = (6 * s2 - 6 * s) / h, d10 = 3 * s2 - 4 * s + 1, d01 = (-6 * s2 + 6 * s) / h, d11 = 3 * s2 - 2 * s;
    const double e00 = (12 * s - 6) / (h * h), e10 = (6 * s - 4) / h, e01 = (-12 * s + 6) / (h * h), e11 = (6 * s - 2) / h;
    const int m = static_cast<int>(y[i].size());
    for (int k = 0; k < m; ++k) {
        const cplx ya = y[i][k], yb = y[i + 1][k], fa = f[i][k], fb = f[i + 1][k];
        if (yo) yo[k] = h00 * ya + h * h10 * fa + h01 * yb + h * h11 * fb;
        if (dyo) dyo[k] = d00 * ya + d10 * fa + d01 * yb + d11 * fb;
        if (d2o) d2o[k] = e00 * ya + e10 * fa + e01 * yb + e11 * fb;
    }
}

}  // namespace pathint
