#pragma once

#include <stdexcept>
#include <string>

namespace waring {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numerical decision fell inside the ambiguity band of the active
/// tolerance profile. Raising the working precision usually resolves it.
struct IllConditioned : Error {
    using Error::Error;
};

/// A matrix required to be invertible is (numerically) singular.
struct Singular : Error {
    using Error::Error;
};

/// The root finder could not certify residuals at the working precision.
struct NonConvergence : Error {
    using Error::Error;
};

/// A matrix k-th root was requested for a matrix that is not a k-th power.
struct NotAPowerError : Error {
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
struct PreconditionViolated : Error {
    using Error::Error;
};

/// The requested operation only applies in a different (n, k, r0) regime.
struct OutOfRegime : Error {
    using Error::Error;
};

/// Jordan blocks were not in canonical order (nonzero blocks first,
/// zero blocks last with weakly decreasing sizes).
struct BadOrdering : Error {
    using Error::Error;
};

struct ParseError : Error {
    std::size_t line = 0;
    std::size_t column = 0;
    ParseError(const std::string& msg, std::size_t ln = 0, std::size_t col = 0)
        : Error(msg), line(ln), column(col) {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

/// An internal invariant failed; indicates a defect, not a user error.
struct InternalError : Error {
    using Error::Error;
};

} // namespace waring
