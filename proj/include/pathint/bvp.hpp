#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "pathint/linalg.hpp"

namespace pathint {

// y' = f(t, y) on [t0, t1] with Dirichlet conditions on selected components at each end.
struct BvpProblem {
    int m = 0;
    std::function<void(double, const cplx*, cplx*)> rhs;
    std::function<void(double, const cplx*, cplx*)> jacobian;  // m x m row-major df/dy
    std::vector<std::pair<int, cplx>> left, right;
};

// Hermite-Simpson (3-stage Lobatto IIIA) collocation solution on a mesh.
struct BvpSolution {
    std::vector<double> t;
    std::vector<CVec> y, f;
    int iterations = 0;
    double residual_inf = 0.0;

    // Cubic Hermite interpolant and its derivative; d2 (optional) is the second derivative.
    void eval(double t, cplx* y, cplx* dy, cplx* d2 = nullptr) const;
    int cell_of(double t) const;
};

struct BvpOptions {
    int max_iterations = 50;
    double tolerance = 1e-11;
    int max_halvings = 20;
};

BvpSolution solve_collocation(const BvpProblem& p, const std::vector<double>& mesh, const std::vector<CVec>& guess,
                              const BvpOptions& opt = {});

}  // namespace pathint
