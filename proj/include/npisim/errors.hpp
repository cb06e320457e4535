#pragma once

#include <stdexcept>
#include <string>

namespace npisim {

/// Base class for all errors thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid argument values: out-of-range controls, non-finite states,
/// malformed parameters.
struct DomainError : Error {
    using Error::Error;
};

/// Shape mismatches: wrong vector lengths, region-count disagreements.
struct StructuralError : Error {
    using Error::Error;
};

/// The integrator produced a non-finite value.
struct DivergenceError : Error {
    DivergenceError(const std::string& msg, double day_)
        : Error(msg), day(day_) {}
    double day;
};

/// Surrogate estimation could not proceed (degenerate sample grid etc.).
struct EstimationError : Error {
    using Error::Error;
};

/// Parameter fitting failed to make any progress.
struct FitError : Error {
    using Error::Error;
};

/// Bad input data: unparseable files, degenerate mobility rows.
struct DataError : Error {
    using Error::Error;
};

} // namespace npisim
