#pragma once

#include <stdexcept>
#include <string>

namespace biwave {

/// Argument outside the mathematical domain of a function (r < 0, x <= 0 for Y0/K0, NaN ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inconsistent or out-of-range experiment/configuration parameters.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Geometric precondition violated, e.g. a receiver inside the source domain.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Measurement table does not cover the (receiver, frequency) pairs a block needs.
class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A regularized block system could not be factored.
class LinearSolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing or unreadable input file.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace biwave
