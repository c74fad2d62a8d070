#include "pathint/fluctuations.hpp"

#include <cmath>
#include <numbers>

#include "pathint/errors.hpp"

namespace pathint {

namespace {
constexpr cplx I{0.0, 1.0};

QuadraticForm tridiagonal_form(int dim, cplx diag, cplx sub, cplx super) {
    QuadraticForm f;
    f.dim = dim;
    f.matrix = BandedMatrix(dim, 1, 1);
    for (int i = 0; i < dim; ++i) {
        f.matrix.set(i, i, diag);
        if (i > 0) f.matrix.set(i, i - 1, sub);
        if (i + 1 < dim) f.matrix.set(i, i + 1, super);
    }
    return f;
}

struct KscsCoefficients {
    cplx a, b, c;
};

KscsCoefficients kscs_coefficients(double eps, cplx R, bool ablation) {
    cplx g = 1.0 + R;
    if (ablation) return {1.0, 1.0 - I * eps * (1.0 - R) / g, 0.0};
    cplx a = 1.0 + 2.0 * I * eps * R / g - eps * eps * R * (1.0 - 2.0 * R) / (g * g);
    cplx b = 1.0 - I * eps * R / (g * g) - I * eps * (1.0 - R) / g;
    cplx c = I * eps * R / (g * g);
    return {a, b, c};
}

}  // namespace

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::dtcs_proper: return "DTCS-proper";
        case Provenance::dtcs_semi_eps: return "DTCS-semi-eps";
        case Provenance::kcs_alt: return "KCS-alt";
        case Provenance::dtscs_proper: return "DTSCS-proper";
        case Provenance::kscs_discretized: return "KSCS-discretized";
    }
    return "?";
}

Provenance parse_provenance(const std::string& s) {
    for (Provenance p : {Provenance::dtcs_proper, Provenance::dtcs_semi_eps, Provenance::kcs_alt,
                         Provenance::dtscs_proper, Provenance::kscs_discretized})
        if (s == provenance_name(p)) return p;
    throw ValidationError("unknown provenance '" + s + "'");
}

cplx QuadraticForm::exponent(const CVec& eta) const { return -scale * matrix.quadratic(eta); }

QuadraticForm expand_dtcs(const StationarySolution& sol) {
    const TimeGrid& g = sol.path.grid;
    const cplx alpha = 1.0 - I * g.eps;
    QuadraticForm f = tridiagonal_form(std::max(0, g.N - 1), 1.0, -alpha, 0.0);
    f.provenance = Provenance::dtcs_proper;
    return f;
}

QuadraticForm build_semi_eps_form(const TimeGrid& grid) {
    const cplx a = 1.0 - 2.0 * I * grid.eps;
    QuadraticForm f = tridiagonal_form(std::max(0, grid.N - 1), 0.0, -a, 1.0);
    f.scale = 0.5;
    f.provenance = Provenance::dtcs_semi_eps;
    return f;
}

QuadraticForm build_kcs_alt_form(const TimeGrid& grid) {
    QuadraticForm f;
    f.dim = std::max(0, grid.N - 1);
    f.matrix = BandedMatrix(f.dim, 2, 0);
    for (int i = 0; i < f.dim; ++i) {
        f.matrix.set(i, i, 1.0);
        if (i > 0) f.matrix.set(i, i - 1, 2.0 * I * grid.eps);
        if (i > 1) f.matrix.set(i, i - 2, -1.0);
    }
    f.scale = 0.5;
    f.provenance = Provenance::kcs_alt;
    return f;
}

QuadraticForm expand_dtscs(const StationarySolution& sol, double S) {
    const TimeGrid& g = sol.path.grid;
    cplx R = 0.0, P = 0.0;
    if (sol.conserved) {
        R = sol.conserved->R;
        P = sol.conserved->P;
    }
    const cplx alpha = (1.0 - I * g.eps) * ((1.0 + R) / (1.0 + P)) * ((1.0 + R) / (1.0 + P));
    QuadraticForm f = tridiagonal_form(std::max(0, g.N - 1), 1.0, -alpha, 0.0);
    const cplx w = 1.0 / ((1.0 + R) * (1.0 + R));
    f.scale = 2.0 * S * w;
    f.normalization = 2.0 * S * w;
    f.measure_normalization = (2.0 * S + 1.0) * w;
    f.provenance = Provenance::dtscs_proper;
    return f;
}

QuadraticForm build_kscs_form(const TimeGrid& grid, cplx R, bool ablation) {
    KscsCoefficients k = kscs_coefficients(grid.eps, R, ablation);
    QuadraticForm f = tridiagonal_form(std::max(0, grid.N - 1), k.a, -k.b, -k.c);
    const cplx w = 1.0 / ((1.0 + R) * (1.0 + R));
    f.scale = 2.0 * w;
    f.normalization = 2.0 * w;
    f.provenance = Provenance::kscs_discretized;
    f.ablation = ablation;
    return f;
}

cplx form_log_det(const QuadraticForm& f, bool* singular) {
    if (f.dim == 0) {
        if (singular) *singular = false;
        return 0.0;
    }
    BandedLU lu(f.matrix);
    if (singular) *singular = lu.singular();
    return lu.log_det();
}

bool is_convergent(const QuadraticForm& f) {
    if (f.dim == 0) return true;
    BandedMatrix sm(f.dim, f.matrix.lower(), f.matrix.upper());
    for (int i = 0; i < f.dim; ++i)
        for (int j = std::max(0, i - f.matrix.lower()); j <= std::min(f.dim - 1, i + f.matrix.upper()); ++j)
            sm.set(i, j, f.scale * f.matrix.get(i, j));
    BandedMatrix h = hermitian_part(sm);
    for (int i = 0; i < f.dim; ++i) h.add(i, i, 1e-10);
    return banded_cholesky_succeeds(h);
}

DetResult gaussian_K(const QuadraticForm& f) {
    DetResult r;
    bool singular = false;
    r.log_det = form_log_det(f, &singular);
    r.det = singular ? cplx(0.0) : std::exp(r.log_det);
    if (singular || r.log_det.real() < std::log(1e-300))
        throw SingularMatrixError(std::string("gaussian_K: singular fluctuation matrix (") +
                                  provenance_name(f.provenance) + ", dim " + std::to_string(f.dim) + ")");
    const double d = f.dim;
    r.log_K = d * std::log(f.normalization) - d * std::log(f.scale) - r.log_det;
    r.log_K.imag(std::remainder(r.log_K.imag(), 2.0 * std::numbers::pi));
    r.log_det.imag(std::remainder(r.log_det.imag(), 2.0 * std::numbers::pi));
    r.K = std::exp(r.log_K);
    r.convergent = is_convergent(f);
    if (f.dim >= 3) {
        // K of the leading (dim-2) block
        BandedMatrix m2(f.dim - 2, f.matrix.lower(), f.matrix.upper());
        for (int i = 0; i < f.dim - 2; ++i)
            for (int j = std::max(0, i - f.matrix.lower()); j <= std::min(f.dim - 3, i + f.matrix.upper()); ++j)
                m2.set(i, j, f.matrix.get(i, j));
        BandedLU lu2(m2);
        if (!lu2.singular()) {
            cplx lk2 = (d - 2) * (std::log(f.normalization) - std::log(f.scale)) - lu2.log_det();
            r.growth_rate = std::exp((r.log_K - lk2).real());
        }
    }
    return r;
}

cplx mode_variance(const QuadraticForm& f, int n) {
    if (n < 0 || n >= f.dim) throw ShapeError("mode_variance: index out of range");
    BandedLU lu(f.matrix);
    CVec e(f.dim, 0.0);
    e[n] = 1.0;
    CVec x = lu.solve(e);
    return x[n] / f.scale;
}

TransferRoots kscs_transfer_roots(const TimeGrid& grid, cplx R) {
    KscsCoefficients k = kscs_coefficients(grid.eps, R, false);
    cplx disc = std::sqrt(k.a * k.a - 4.0 * k.b * k.c);
    cplx p = 0.5 * (k.a + disc);
    // product of the roots is bc; avoids cancellation in the small root
    return {p, k.b * k.c / p};
}

cplx tridiagonal_closed_form_det(cplx a, cplx b, cplx c, int dim) {
    if (dim == 0) return 1.0;
    if (dim == 1) return a;
    cplx disc = std::sqrt(a * a - 4.0 * b * c);
    cplx lp = 0.5 * (a + disc);
    cplx lm = b * c / lp;
    cplx d1 = a, d2 = a * a - b * c;
    if (std::abs(lp - lm) < 1e-300) throw DegenerateError("tridiagonal_closed_form_det: repeated root");
    cplx pk = std::pow(lp, dim - 1), mk = std::pow(lm, dim - 1);
    return (pk * (d2 - lm * d1) - mk * (d2 - lp * d1)) / (lp - lm);
}

}  // namespace pathint
