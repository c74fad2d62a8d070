#include "pathint/errors.hpp"

namespace pathint {

bool is_numerical_failure(const Error& e) noexcept {
    return dynamic_cast<const ValidationError*>(&e) == nullptr &&
           dynamic_cast<const ShapeError*>(&e) == nullptr;
}

}  // namespace pathint
