#pragma once

#include <stdexcept>
#include <string>

namespace filsim {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A field or surface function returned a non-finite value, or was evaluated
/// at a point where it is genuinely non-smooth (e.g. |.| at zero on jets).
struct EvaluationError : Error {
    using Error::Error;
};

/// A denominator that the theory requires to be nonzero fell below the
/// degeneracy tolerance (equal one-sided Lie derivatives, L2 equality on T, ...).
struct DegeneracyError : Error {
    using Error::Error;
};

/// An operation was called outside its stated domain (off-surface point,
/// wrong sign of the transversal coordinate, non-second-order system, ...).
struct PreconditionError : Error {
    using Error::Error;
};

/// Random search exhausted its evaluation budget without finding what it
/// needed (surface samples, root brackets, ...).
struct SamplingError : Error {
    using Error::Error;
};

/// A return-map integration ran past its budget without re-crossing the
/// surface; legitimate near tangency-region boundaries.
struct NoReturnError : Error {
    using Error::Error;
};

/// A fit or estimate was requested from fewer samples than it needs.
struct InsufficientDataError : Error {
    using Error::Error;
};

}  // namespace filsim
