#pragma once

#include <stdexcept>
#include <string>

namespace pathint {

// Base of every numerical or validation failure raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "Error"; }
};

#define PATHINT_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                           \
    public:                                                               \
        explicit Name(const std::string& what) : Error(what) {}           \
        const char* kind() const noexcept override { return #Name; }      \
    }

PATHINT_DEFINE_ERROR(ValidationError);
PATHINT_DEFINE_ERROR(PoleError);
PATHINT_DEFINE_ERROR(DimensionError);
PATHINT_DEFINE_ERROR(TruncationError);
PATHINT_DEFINE_ERROR(QuadratureError);
PATHINT_DEFINE_ERROR(ShapeError);
PATHINT_DEFINE_ERROR(BranchError);
PATHINT_DEFINE_ERROR(DegenerateError);
PATHINT_DEFINE_ERROR(SingularBVPError);
PATHINT_DEFINE_ERROR(IllConditionedError);
PATHINT_DEFINE_ERROR(MeshError);
PATHINT_DEFINE_ERROR(SingularMatrixError);

#undef PATHINT_DEFINE_ERROR

// Newton-type solvers give up with the best residual they reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_residual, int iterations)
        : Error(what), best_residual_(best_residual), iterations_(iterations) {}
    const char* kind() const noexcept override { return "ConvergenceError"; }
    double best_residual() const noexcept { return best_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double best_residual_;
    int iterations_;
};

// True for failures that come from the numerics rather than from bad input.
bool is_numerical_failure(const Error& e) noexcept;

}  // namespace pathint
