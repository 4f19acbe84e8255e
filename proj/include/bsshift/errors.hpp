// errors.hpp: exception types shared by the bsshift modules

#pragma once

#include <stdexcept>
#include <string>

namespace bsshift {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Physical inputs violate their invariants (non-positive energies, n_ref < 1, ...).
struct ParameterError : Error {
    using Error::Error;
};

/// Caller broke an operation's precondition (basis mismatch, non-Hermitian input).
struct ContractError : Error {
    using Error::Error;
};

/// A scalar function is undefined somewhere on an operator's spectrum.
struct DomainError : Error {
    using Error::Error;
};

/// Grid/basis set-up cannot represent the requested states.
struct ConfigurationError : Error {
    using Error::Error;
};

/// Iterative numerics failed to reach the requested tolerance.
struct NumericError : Error {
    NumericError(const std::string& what, double achieved)
        : Error(what + " (achieved tolerance " + std::to_string(achieved) + ")")
        , achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

/// No Bloch-Siegert resonance of the requested order exists, or it lies outside the search range.
struct ResonanceError : Error {
    using Error::Error;
};

/// Overlap continuation lost track of a level.
struct TrackingError : Error {
    using Error::Error;
};

/// Eigenstates could not be matched to the requested (n, m) labels.
struct LabelingError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

/// Malformed or inconsistent run configuration.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace bsshift
