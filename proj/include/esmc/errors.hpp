#pragma once

#include <stdexcept>
#include <string>

namespace esmc {

/// Invalid configuration or parameter: maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function (e.g. quantile of 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An invariant that should be unreachable was violated.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Adaptive quadrature ran out of budget. Carries the best estimate so far.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double best_estimate, double error_bound)
        : std::runtime_error(what), best_estimate_(best_estimate), error_bound_(error_bound) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double best_estimate_;
    double error_bound_;
};

}  // namespace esmc
