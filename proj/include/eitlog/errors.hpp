#ifndef EITLOG_ERRORS_HPP
#define EITLOG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eitlog {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Basis order too large for the boundary node count.
class AliasingError : public Error {
public:
    using Error::Error;
};

/// Stiffness system could not be factorized (inadmissible conductivity).
class SingularSystemError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be positive definite has an eigenvalue <= 0.
class DefinitenessError : public Error {
public:
    using Error::Error;
};

/// A spectral function was requested outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Contour cannot separate the spectrum from the branch cut.
class ContourError : public Error {
public:
    using Error::Error;
};

/// Quadrature refinement failed to reach the requested tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Derivative order above the supported cap.
class OrderCapError : public Error {
public:
    using Error::Error;
};

/// Conductivity pair violates the required pointwise ordering.
class InputOrderError : public Error {
public:
    using Error::Error;
};

/// Parameter grid extends into the unresolvable range.
class PlateauError : public Error {
public:
    using Error::Error;
};

/// Perturbation operator is not a contraction.
class ContractionError : public Error {
public:
    using Error::Error;
};

/// Finite-difference errors sit at the roundoff floor; no slope can be fitted.
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IOError : public Error {
public:
    using Error::Error;
};

} // namespace eitlog

#endif
