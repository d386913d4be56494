// errors.hpp — exception types shared across the library.
#pragma once

#include <stdexcept>

namespace ancova {

// Bad input: malformed CSV, JSON schema violations, invalid configuration.
// The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure: rank-deficient design, condition-number guard,
// singular covariance, degenerate arm split. CLI exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ancova
