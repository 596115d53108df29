#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vplab {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A size guard (enumeration budget, dimension mismatch) was exceeded.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// The Monte Carlo variance of Tr P(A o X) vanished, so Z_k cannot be formed.
/// Carries the raw traces, which are all equal up to rounding.
class StructuralZeroVariance : public std::runtime_error {
public:
    StructuralZeroVariance(const std::string& what, std::vector<double> raw)
        : std::runtime_error(what), raw_traces_(std::move(raw)) {}

    const std::vector<double>& raw_traces() const noexcept { return raw_traces_; }

private:
    std::vector<double> raw_traces_;
};

/// The cycle sum in the denominator of the TV bound is zero.
class BoundVacuous : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A theorem-facing operation was asked to run with a law that is not
/// symmetric with unit variance.
class NonCompliantLaw : public DomainError {
public:
    using DomainError::DomainError;
};

/// Malformed experiment configuration.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::string field = {}, long line = 0)
        : std::runtime_error(what), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    long line() const noexcept { return line_; }

private:
    std::string field_;
    long line_;
};

}  // namespace vplab
