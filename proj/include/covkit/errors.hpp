#pragma once

#include <stdexcept>
#include <string>

namespace covkit {

/// Base class for all library errors. Message strings name the offending
/// quantity (dimension, eigenvalue, tolerance) so failures are diagnosable
/// from the what() text alone.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Incompatible or invalid matrix/model dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid argument value (non-positive duration, bad parameter range, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// Non-finite or out-of-range numeric values (NaN/Inf, overflow).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Singular or numerically unsolvable linear system, or an iteration that
/// failed to converge.
class SolveError : public Error {
public:
    using Error::Error;
};

/// Dynamics matrix is not Hurwitz where stability is required.
class StabilityError : public Error {
public:
    using Error::Error;
};

/// Nonzero feedthrough on a white-noise input path; the instantaneous
/// output variance would be unbounded.
class FeedthroughError : public Error {
public:
    using Error::Error;
};

/// Algebraic loop in an interconnection is singular (ill-posed).
class WellPosednessError : public Error {
public:
    using Error::Error;
};

/// An internal identity (balance equation, PSD repair bound) was violated
/// beyond tolerance; signals numerical breakdown, not user error.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Model file could not be parsed or fails schema/shape validation.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Filesystem read/write failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace covkit
