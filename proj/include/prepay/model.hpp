#pragma once

#include "prepay/specfun.hpp"

#include <limits>

namespace prepay {

/// CIR short-rate dynamics dx = k (theta - x) dt + sigma sqrt(x) dW. Rates in 1/year.
struct CirParams {
    double k;
    double theta;
    double sigma;

    /// 2 k theta >= sigma^2: the rate never reaches zero. Advisory only.
    [[nodiscard]] bool feller() const noexcept { return 2.0 * k * theta >= sigma * sigma; }
};

/// Mortgage terms: contract rate c (1/year), continuous payment m ($/year) and
/// duration T (years; infinity for the steady-state problem).
struct ContractParams {
    double c;
    double m;
    double duration = std::numeric_limits<double>::infinity();
};

/// Constants of the substitution V(x) = e^{lambda x} u(z), z = p x, which turns the
/// steady pricing ODE into Kummer's equation z u'' + (gamma - z) u' - alpha u = g(z).
struct DerivedConstants {
    double s;        ///< sqrt(k^2 + 2 sigma^2)
    double lambda;   ///< (k - s) / sigma^2, negative
    double p;        ///< 2 s / sigma^2
    double alpha;    ///< (k theta / sigma^2) (1 - k / s)
    double gamma;    ///< 2 k theta / sigma^2
    double a_exp;    ///< 1/2 - k / (2 s) = -lambda / p, in (0, 1/2)

    [[nodiscard]] specfun::HypergeometricParams hypergeometric() const noexcept {
        return {alpha, gamma};
    }
};

/// Throws ValidationError naming the first offending field.
void validate(const CirParams& cir);
void validate(const ContractParams& contract);

/// Throws ValidationError if the CIR parameters are invalid.
DerivedConstants derive_constants(const CirParams& cir);

/// Outstanding balance (m / c)(1 - e^{-c tau}) with tau the time to expiry (years).
double balance(const ContractParams& contract, double tau);

}  // namespace prepay
