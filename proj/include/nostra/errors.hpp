#pragma once

#include <stdexcept>
#include <string>

namespace nostra {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mismatched vector/matrix dimensions.
struct DimensionError : Error {
    using Error::Error;
};

/// Numerical conditioning failure (Cholesky breakdown, degenerate data).
struct ConditioningError : Error {
    using Error::Error;
};

/// Hyperparameter fit failed on every restart.
struct FitError : Error {
    using Error::Error;
};

/// Invalid clustering request (k out of range, empty cluster).
struct ClusteringError : Error {
    using Error::Error;
};

/// A frontier point lies beyond the hypervolume reference point.
struct ReferencePointError : Error {
    using Error::Error;
};

/// Input outside the design domain.
struct DomainError : Error {
    using Error::Error;
};

/// Invalid configuration value.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace nostra
