#pragma once

#include <stdexcept>
#include <string>

namespace ifcable {

/// Base class for all library failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A scalar parameter violates its domain (e.g. gamma <= 0).
struct InvalidParameterError : Error {
    using Error::Error;
};

/// A user-supplied grid (delta grid, spatial grid) is malformed.
struct InvalidGridError : Error {
    using Error::Error;
};

/// An operation was invoked outside its stated precondition.
struct PreconditionError : Error {
    using Error::Error;
};

/// A numeric routine failed to converge or bracket.
struct NumericError : Error {
    using Error::Error;
};

/// The simulated state became non-finite.  `time` is the step time stamp.
struct BlowUpError : Error {
    double time;
    explicit BlowUpError(const std::string& what, double t) : Error(what), time(t) {}
};

/// A run configuration is inconsistent (coverage, required fields, ranges).
struct ConfigError : Error {
    using Error::Error;
};

/// Quadrature refinement failed to meet its accuracy target.
struct AccuracyError : Error {
    using Error::Error;
};

/// Picard iterates stopped contracting.
struct ContractionError : Error {
    using Error::Error;
};

}  // namespace ifcable
