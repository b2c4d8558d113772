#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prepay {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Result not representable as a finite double.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// A model or configuration parameter violates its invariant.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double best_estimate, double error_estimate)
        : Error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    [[nodiscard]] double best_estimate() const noexcept { return best_estimate_; }
    [[nodiscard]] double error_estimate() const noexcept { return error_estimate_; }

private:
    double best_estimate_;
    double error_estimate_;
};

/// Root finder was handed an interval without a sign change.
class InvalidBracketError : public Error {
public:
    using Error::Error;
};

/// A scan for a sign change came up empty. Carries the sampled (z, F(z)) pairs.
class NoBracketError : public Error {
public:
    NoBracketError(const std::string& what, std::vector<std::pair<double, double>> samples)
        : Error(what), samples_(std::move(samples)) {}

    [[nodiscard]] const std::vector<std::pair<double, double>>& samples() const noexcept {
        return samples_;
    }

private:
    std::vector<std::pair<double, double>> samples_;
};

/// Iterative method stopped before meeting its tolerance. Carries the iterate history.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> trace)
        : Error(what), trace_(std::move(trace)) {}

    [[nodiscard]] const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

/// A basis function vanished where it is used as a divisor.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// ODE step size collapsed below the representable resolution.
class StepUnderflowError : public Error {
public:
    StepUnderflowError(const std::string& what, double location)
        : Error(what), location_(location) {}

    [[nodiscard]] double location() const noexcept { return location_; }

private:
    double location_;
};

}  // namespace prepay
