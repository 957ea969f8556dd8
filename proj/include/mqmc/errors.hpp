#pragma once

#include <stdexcept>
#include <string>

namespace mqmc {

/// Bad argument to a library call (wrong sizes, even k, mismatched modulus).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (e.g. p outside (0,1)).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

/// Request outside what an operation supports (brute-force limits, zeta near its pole).
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Weight function / density pair violating the integrability condition of the space.
class SpaceInvalidError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A quantity that must be nonnegative came out below the round-off threshold.
class NumericalConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mqmc
