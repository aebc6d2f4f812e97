#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pathcalc {

/// Raised on malformed inputs (non-finite queries, bad grids, out-of-range times).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a covariance or regression system is numerically unusable.
class NumericalDegeneracy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a simulated state becomes non-finite.
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, std::size_t path)
        : std::runtime_error(what + " (path " + std::to_string(path) + ")"), path_index(path) {}
    std::size_t path_index;
};

/// Raised when a check needs information a functional does not provide.
class UnsupportedFunctional : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for unknown suites, fixtures or malformed configuration files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pathcalc
