#pragma once

#include <complex>
#include <functional>
#include <utility>

#include "pathint/linalg.hpp"

namespace pathint {

// Oscillator phase point; xi = (q + i p)/sqrt(2 hbar).
struct PhasePoint {
    double p = 0.0, q = 0.0, hbar = 1.0;

    cplx xi() const;
    static PhasePoint from_xi(cplx xi, double hbar = 1.0);
};

// Point on the sphere, theta in [0, pi), phi in [0, 2 pi). xi is the Riemann projection.
struct SpherePoint {
    double theta = 0.0, phi = 0.0;

    cplx xi() const;
    cplx zeta() const;
    static SpherePoint from_xi(cplx xi);
};

// Hamiltonian kernel H(xb, x) = <xb| H |x> / <xb|x> with its first and second partials.
// d1 is d/dxb, d2 is d/dx.
struct HamiltonianKernel {
    std::function<cplx(cplx, cplx)> value, d1, d2, d11, d12, d22;
    const char* name = "custom";
};

HamiltonianKernel ho_kernel(double hbar = 1.0);
HamiltonianKernel spin_kernel(double S, double hbar = 1.0);

// Largest relative disagreement between supplied partials and central differences.
double kernel_partials_error(const HamiltonianKernel& k, cplx xb, cplx x, double h = 1e-5);

enum class Model { ho, spin };

struct ModelParams {
    Model model = Model::ho;
    double hbar = 1.0;
    double spin_S = 0.5;

    HamiltonianKernel kernel() const;
    void validate() const;
};

// 2S as an integer; ValidationError unless S is a positive half-integer.
int twice_spin(double S);

// (1 + z)^{2S}; repeated multiplication up to 2S = 64, principal-branch exp/log above.
cplx one_plus_pow(cplx z, int two_s);

cplx cs_overlap(cplx xi, cplx xi_prime);
cplx scs_overlap(cplx xi, cplx xi_prime, double S);

cplx exact_cs_amplitude(cplx xi_i, cplx xi_f, double T, double hbar = 1.0);
cplx exact_scs_amplitude(cplx xi_i, cplx xi_f, double T, double S);

// Logs of the closed forms, exponent form, principal branch of each factor.
cplx exact_cs_exponent(cplx xi_i, cplx xi_f, double T);
cplx exact_scs_exponent(cplx xi_i, cplx xi_f, double T, double S);

// Continuous-time stationary curve (xi(t), xibar(t)).
std::pair<cplx, cplx> ct_stationary_reference(double t, cplx xi_i, cplx xi_f, double T);

// Distance between two exponents modulo 2 pi i.
double exponent_distance(cplx a, cplx b);

void require_finite(cplx xi, const char* what);

}  // namespace pathint
