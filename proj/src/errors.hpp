#pragma once

#include <stdexcept>
#include <string>

namespace causalkit {

/// Input data that breaks the contract (bad Likert value, duplicate key, malformed cell).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A computation that cannot proceed (zero variance, singular design, unsatisfiable constraints).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inconsistent options or labels (unknown column, overlapping role sets).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem problems.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace causalkit
