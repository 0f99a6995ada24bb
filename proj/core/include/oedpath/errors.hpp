// Error taxonomy shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace oed {

// Invalid setup: bad sizes, unknown enum values, inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Queries outside the admissible domain (position outside the grid, time
// outside [0, T], zero noise variance, ...).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Linear algebra failures: non-SPD matrices, singular solves.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Objective evaluation failed mid-pipeline; carries the offending time index.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, int time_index)
        : std::runtime_error(what), time_index(time_index) {}
    int time_index = -1;
};

}  // namespace oed
