#include "pathint/states.hpp"

#include <cmath>
#include <numbers>

#include "pathint/errors.hpp"

namespace pathint {

namespace {
constexpr cplx I{0.0, 1.0};
}

cplx PhasePoint::xi() const { return std::sqrt(1.0 / (2.0 * hbar)) * cplx(q, p); }

PhasePoint PhasePoint::from_xi(cplx xi, double hbar) {
    cplx v = std::sqrt(2.0 * hbar) * xi;
    return {v.imag(), v.real(), hbar};
}

cplx SpherePoint::xi() const {
    if (!(theta >= 0.0 && theta < std::numbers::pi)) throw PoleError("SpherePoint: theta outside [0, pi)");
    return std::polar(std::tan(0.5 * theta), phi);
}

cplx SpherePoint::zeta() const { return std::polar(0.5 * theta, phi); }

SpherePoint SpherePoint::from_xi(cplx xi) {
    require_finite(xi, "SpherePoint::from_xi");
    double r = std::abs(xi);
    double phi = r > 0.0 ? std::arg(xi) : 0.0;
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    return {2.0 * std::atan(r), phi};
}

void require_finite(cplx xi, const char* what) {
    if (!std::isfinite(xi.real()) || !std::isfinite(xi.imag()))
        throw PoleError(std::string(what) + ": point at the south pole");
}

HamiltonianKernel ho_kernel(double hbar) {
    HamiltonianKernel k;
    k.name = "ho";
    k.value = [hbar](cplx xb, cplx x) { return hbar * xb * x; };
    k.d1 = [hbar](cplx, cplx x) { return hbar * x; };
    k.d2 = [hbar](cplx xb, cplx) { return hbar * xb; };
    k.d11 = [](cplx, cplx) { return cplx(0.0); };
    k.d12 = [hbar](cplx, cplx) { return cplx(hbar); };
    k.d22 = [](cplx, cplx) { return cplx(0.0); };
    return k;
}

HamiltonianKernel spin_kernel(double S, double hbar) {
    twice_spin(S);
    const double c = hbar * S;
    HamiltonianKernel k;
    k.name = "spin";
    k.value = [c](cplx xb, cplx x) {
        cplx w = xb * x;
        return -c * (1.0 - w) / (1.0 + w);
    };
    k.d1 = [c](cplx xb, cplx x) {
        cplx g = 1.0 + xb * x;
        return 2.0 * c * x / (g * g);
    };
    k.d2 = [c](cplx xb, cplx x) {
        cplx g = 1.0 + xb * x;
        return 2.0 * c * xb / (g * g);
    };
    k.d11 = [c](cplx xb, cplx x) {
        cplx g = 1.0 + xb * x;
        return -4.0 * c * x * x / (g * g * g);
    };
    k.d12 = [c](cplx xb, cplx x) {
        cplx w = xb * x, g = 1.0 + w;
        return 2.0 * c * (1.0 - w) / (g * g * g);
    };
    k.d22 = [c](cplx xb, cplx x) {
        cplx g = 1.0 + xb * x;
        return -4.0 * c * xb * xb / (g * g * g);
    };
    return k;
}

double kernel_partials_error(const HamiltonianKernel& k, cplx xb, cplx x, double h) {
    // Holomorphic in each argument, so a real step suffices.
    auto rel = [](cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    cplx f1 = (k.value(xb + h, x) - k.value(xb - h, x)) / (2 * h);
    cplx f2 = (k.value(xb, x + h) - k.value(xb, x - h)) / (2 * h);
    cplx f11 = (k.d1(xb + h, x) - k.d1(xb - h, x)) / (2 * h);
    cplx f12 = (k.d1(xb, x + h) - k.d1(xb, x - h)) / (2 * h);
    cplx f22 = (k.d2(xb, x + h) - k.d2(xb, x - h)) / (2 * h);
    double e = rel(f1, k.d1(xb, x));
    e = std::max(e, rel(f2, k.d2(xb, x)));
    e = std::max(e, rel(f11, k.d11(xb, x)));
    e = std::max(e, rel(f12, k.d12(xb, x)));
    e = std::max(e, rel(f22, k.d22(xb, x)));
    return e;
}

HamiltonianKernel ModelParams::kernel() const {
    return model == Model::ho ? ho_kernel(hbar) : spin_kernel(spin_S, hbar);
}

void ModelParams::validate() const {
    if (!(hbar > 0.0)) throw ValidationError("hbar must be positive");
    if (model == Model::spin) twice_spin(spin_S);
}

int twice_spin(double S) {
    double t = 2.0 * S;
    if (!(S > 0.0) || std::abs(t - std::round(t)) > 1e-12 || t > 1e9)
        throw ValidationError("spin S must be a positive half-integer");
    return static_cast<int>(std::lround(t));
}

cplx one_plus_pow(cplx z, int two_s) {
    cplx base = 1.0 + z;
    if (two_s <= 64) {
        cplx r = 1.0;
        for (int k = 0; k < two_s; ++k) r *= base;
        return r;
    }
    return std::exp(static_cast<double>(two_s) * std::log(base));
}

cplx cs_overlap(cplx xi, cplx xi_prime) {
    return std::exp(-0.5 * (std::norm(xi) + std::norm(xi_prime)) + std::conj(xi) * xi_prime);
}

cplx scs_overlap(cplx xi, cplx xi_prime, double S) {
    require_finite(xi, "scs_overlap");
    require_finite(xi_prime, "scs_overlap");
    int n = twice_spin(S);
    cplx num = one_plus_pow(std::conj(xi) * xi_prime, n);
    return num / std::pow((1.0 + std::norm(xi)) * (1.0 + std::norm(xi_prime)), S);
}

cplx exact_cs_amplitude(cplx xi_i, cplx xi_f, double T, double) {
    return std::exp(exact_cs_exponent(xi_i, xi_f, T));
}

cplx exact_scs_amplitude(cplx xi_i, cplx xi_f, double T, double S) {
    require_finite(xi_i, "exact_scs_amplitude");
    require_finite(xi_f, "exact_scs_amplitude");
    int n = twice_spin(S);
    cplx r = std::conj(xi_f) * xi_i * std::exp(-I * T);
    cplx num = one_plus_pow(r, n) * std::exp(I * (S * T));
    return num / std::pow((1.0 + std::norm(xi_f)) * (1.0 + std::norm(xi_i)), S);
}

cplx exact_cs_exponent(cplx xi_i, cplx xi_f, double T) {
    return -0.5 * (std::norm(xi_f) + std::norm(xi_i)) + std::conj(xi_f) * xi_i * std::exp(-I * T);
}

cplx exact_scs_exponent(cplx xi_i, cplx xi_f, double T, double S) {
    require_finite(xi_i, "exact_scs_exponent");
    require_finite(xi_f, "exact_scs_exponent");
    cplx r = std::conj(xi_f) * xi_i * std::exp(-I * T);
    return 2.0 * S * std::log(1.0 + r) - S * std::log((1.0 + std::norm(xi_f)) * (1.0 + std::norm(xi_i))) +
           I * (S * T);
}

std::pair<cplx, cplx> ct_stationary_reference(double t, cplx xi_i, cplx xi_f, double T) {
    return {xi_i * std::exp(-I * t), std::conj(xi_f) * std::exp(I * (t - T))};
}

double exponent_distance(cplx a, cplx b) {
    cplx d = a - b;
    double im = std::remainder(d.imag(), 2.0 * std::numbers::pi);
    return std::abs(cplx(d.real(), im));
}

}  // namespace pathint
