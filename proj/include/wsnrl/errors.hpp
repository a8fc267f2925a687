#pragma once

#include <stdexcept>
#include <string>

namespace wsnrl {

// Invalid or inconsistent configuration (bad case size, violated bounds, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or missing input data (CSV parse failures, empty files, ...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Illegal operation for the current object state (stepping a finished episode).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure (covariance not positive-definite, non-finite loss).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/feature shape mismatch between components.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace wsnrl
