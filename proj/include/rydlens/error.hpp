#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rydlens {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument is outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A target index cannot be realized with the given host material.
class UnrealizableIndexError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A spec/config object violates its own invariants.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A ray bundle is too small to define a focus.
class InsufficientBundleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// An observation point coincides with a source patch.
class SingularDistanceError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Fewer than two resolvable peaks in a spectrum; carries the single peak found.
class UnresolvedDoubletError : public Error {
public:
    UnresolvedDoubletError(const std::string& msg, double single_peak_hz)
        : Error(msg), single_peak_hz(single_peak_hz) {}
    double single_peak_hz;
};

/// A file could not be parsed; carries the 1-based offending line.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};

/// A file parsed but its content violates the schema contract.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace rydlens
