#pragma once

#include <exception>
#include <optional>
#include <vector>

#include <omp.h>

#include "pathint/fluctuations.hpp"

namespace pathint {

// Central-difference gradient of the discrete exponent over the interior unknowns,
// interleaved (d/dxibar_1, d/dxi_1, ..., d/dxi_{N-1}). Only the terms touching each
// variable are re-evaluated, so both versions are O(N).
CVec numerical_gradient_serial(const DiscretePath& path, const DiscreteModel& m, double step = 1e-6);
CVec numerical_gradient(const DiscretePath& path, const DiscreteModel& m, double step = 1e-6, int jobs = 0);

// Brute-force Gaussian integral of a small form: realify, whiten by the Cholesky factor of the
// Hermitian part, rotate the remaining imaginary part to diagonal and integrate each mode with
// composite Gauss-Legendre on a truncated line, doubling panels until stable.
struct QuadratureK {
    cplx K{0.0};
    int order = 0;  // panels per mode
    bool converged = false;
    bool convergent_form = false;
};
QuadratureK gaussian_quadrature_K(const QuadraticForm& f, double tol = 1e-12, int max_panels = 1 << 20);
std::vector<QuadratureK> gaussian_quadrature_batch_serial(const std::vector<QuadraticForm>& forms);
std::vector<QuadratureK> gaussian_quadrature_batch(const std::vector<QuadraticForm>& forms, int jobs = 0);

// Runs f(0..n-1) on up to `jobs` threads (0 = OpenMP default) and returns results in index
// order; the first exception by index is rethrown after the loop.
template <class F>
auto parallel_map(int n, F f, int jobs = 0) {
    using R = decltype(f(0));
    std::vector<std::optional<R>> tmp(n);
    std::vector<std::exception_ptr> err(n);
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int i = 0; i < n; ++i) {
        try {
            tmp[i].emplace(f(i));
        } catch (...) {
            err[i] = std::current_exception();
        }
    }
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(n);
    for (auto& v : tmp) out.push_back(std::move(*v));
    return out;
}

}  // namespace pathint
