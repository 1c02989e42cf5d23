#pragma once

#include <stdexcept>
#include <string>

namespace horizon {

/// A documented precondition of an operation was violated (e.g. a query point
/// inside the excluded disk).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A field produced NaN/inf, or a gradient vanished where it must not.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two independent computations of the same quantity disagree beyond tolerance.
class InconsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace horizon
