#include "prepay/specfun.hpp"

#include "prepay/errors.hpp"
#include "prepay/numerics.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace prepay::specfun {

namespace {

constexpr double kLogMax = 709.782712893384;  // ln(DBL_MAX)
constexpr double kSeriesEps = 1e-17;
constexpr int kMaxSeriesTerms = 200000;
constexpr int kMaxAsymptoticTerms = 400;
// Relative tolerance of the U quadrature. The roundoff floor of the Kronrod rule sits
// near 1e-14, so this is as tight as the panels can reliably be driven.
constexpr double kUQuadTol = 5e-14;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

double checked_exp(double log_value, const char* what) {
    if (log_value > kLogMax) {
        throw OverflowError(std::string(what) + ": result exceeds double range (log = " +
                            std::to_string(log_value) + ")");
    }
    return std::exp(log_value);
}

// ln of sum_n (a)_n / (b)_n z^n / n! for a >= 0, b > 0, z >= 0, where every term is
// nonnegative. The running sum is rescaled so arbitrarily large z cannot overflow.
double log_positive_series(double a, double b, double z) {
    constexpr double kRescale = 1e250;
    const double log_rescale = std::log(kRescale);
    double sum = 1.0;
    double term = 1.0;
    double log_scale = 0.0;
    for (int n = 0; n < kMaxSeriesTerms; ++n) {
        term *= (a + n) * z / ((b + n) * (n + 1.0));
        sum += term;
        if (term == 0.0) break;
        if (sum > kRescale) {
            sum /= kRescale;
            term /= kRescale;
            log_scale += log_rescale;
        }
        // Every later ratio is bounded by rb; stop once the geometric tail is negligible.
        const double rb = z / (n + 2.0) * std::max(1.0, (a + n + 1.0) / (b + n + 1.0));
        if (rb < 1.0 && term * rb / (1.0 - rb) <= kSeriesEps * sum) break;
    }
    return std::log(sum) + log_scale;
}

// Plain Taylor series with signed terms; used only where the magnitudes stay modest.
double signed_series(double a, double b, double z) {
    double sum = 1.0;
    double term = 1.0;
    for (int n = 0; n < kMaxSeriesTerms; ++n) {
        term *= (a + n) * z / ((b + n) * (n + 1.0));
        sum += term;
        if (!std::isfinite(sum)) throw OverflowError("kummer_m: series overflow");
        if (term == 0.0) break;
        const double rb = std::abs(z) / (n + 2.0) *
                          std::max(1.0, std::abs((a + n + 1.0) / (b + n + 1.0)));
        if (rb < 1.0 && std::abs(term) * rb / (1.0 - rb) <= kSeriesEps * std::abs(sum)) break;
    }
    return sum;
}

// Large-z expansion ln M ~ ln(Gamma(b)/Gamma(a)) + z + (a-b) ln z + ln sum_n
// (b-a)_n (1-a)_n / (n! z^n). Returns false when the series does not settle to
// double precision or the recessive e^{-z} branch is not negligible.
bool log_kummer_asymptotic(double a, double b, double z, double& out) {
    if (!(a > 0.0 && b > a && z >= 50.0)) return false;
    const double recessive = log_gamma(a) - log_gamma(b - a) + (b - 2.0 * a) * std::log(z) - z;
    if (recessive > std::log(kSeriesEps)) return false;
    double sum = 1.0;
    double term = 1.0;
    double previous = std::numeric_limits<double>::infinity();
    for (int n = 0; n < kMaxAsymptoticTerms; ++n) {
        term *= (b - a + n) * (1.0 - a + n) / ((n + 1.0) * z);
        sum += term;
        if (std::abs(term) <= kSeriesEps * std::abs(sum)) {
            out = log_gamma(b) - log_gamma(a) + z + (a - b) * std::log(z) + std::log(sum);
            return true;
        }
        if (std::abs(term) > previous) return false;
        previous = std::abs(term);
    }
    return false;
}

// U ~ z^-a sum_n (a)_n (a-b+1)_n / n! (-1/z)^n. Exact when a-b+1 is a nonpositive
// integer (the series terminates); otherwise only accepted for z >= 25 and only if
// it converges to double precision before the terms start to grow.
bool tricomi_asymptotic(double a, double b, double z, double& out) {
    const double c = a - b + 1.0;
    const bool terminates = is_nonpositive_integer(c) || is_nonpositive_integer(a);
    if (!terminates && z < 25.0) return false;
    double sum = 1.0;
    double term = 1.0;
    double previous = std::numeric_limits<double>::infinity();
    for (int n = 0; n < kMaxAsymptoticTerms; ++n) {
        term *= -(a + n) * (c + n) / ((n + 1.0) * z);
        sum += term;
        if (term == 0.0 || std::abs(term) <= kSeriesEps * std::abs(sum)) {
            out = std::pow(z, -a) * sum;
            return true;
        }
        if (!terminates && std::abs(term) > previous) return false;
        previous = std::abs(term);
    }
    return false;
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("log_gamma: argument must be positive and finite, got " +
                          std::to_string(x));
    }
    return boost::math::lgamma(x);
}

double log_kummer_m(HypergeometricParams params, double z) {
    const double a = params.alpha;
    const double b = params.gamma;
    if (!(a >= 0.0 && b > 0.0 && z >= 0.0) || !std::isfinite(z)) {
        throw DomainError("log_kummer_m: requires alpha >= 0, gamma > 0, z >= 0");
    }
    if (a == 0.0 || z == 0.0) return 0.0;
    double asymptotic = 0.0;
    if (log_kummer_asymptotic(a, b, z, asymptotic)) return asymptotic;
    return log_positive_series(a, b, z);
}

double kummer_m(HypergeometricParams params, double z) {
    const double a = params.alpha;
    const double b = params.gamma;
    if (is_nonpositive_integer(b)) {
        throw DomainError("kummer_m: gamma must not be zero or a negative integer");
    }
    if (!std::isfinite(z)) throw DomainError("kummer_m: z must be finite");
    if (z == 0.0 || a == 0.0) return 1.0;
    if (a > 0.0 && b > 0.0 && z > 0.0) {
        return checked_exp(log_kummer_m(params, z), "kummer_m");
    }
    if (z < 0.0 && b > 0.0 && b - a >= 0.0) {
        return checked_exp(z + log_positive_series(b - a, b, -z), "kummer_m");
    }
    if (z < 0.0 && b > 0.0) {
        return std::exp(z) * signed_series(b - a, b, -z);
    }
    return signed_series(a, b, z);
}

double kummer_m_prime(HypergeometricParams params, double z) {
    if (params.alpha == 0.0) return 0.0;
    return params.alpha / params.gamma * kummer_m({params.alpha + 1.0, params.gamma + 1.0}, z);
}

double tricomi_u_integral(HypergeometricParams params, double z) {
    const double a = params.alpha;
    const double b = params.gamma;
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DomainError("tricomi_u: z must be positive and finite");
    }
    if (!(a > 0.0)) throw DomainError("tricomi_u_integral: requires alpha > 0");
    // U = z^-a / Gamma(a) * A,  A = int_0^inf e^-s s^(a-1) (1 + s/z)^(b-a-1) ds.
    const double beta = b - a - 1.0;
    const numerics::QuadratureOptions opts{kUQuadTol, 0.0, 400};

    double head = 0.0;
    double log_prefactor = -a * std::log(z) - log_gamma(a);
    if (a < 1.0) {
        // s = v^(1/a) removes the s^(a-1) endpoint singularity on [0, 1].
        const double inv_a = 1.0 / a;
        auto f = [&](double v) {
            const double s = std::pow(v, inv_a);
            return std::exp(-s + beta * std::log1p(s / z));
        };
        head = numerics::integrate_adaptive(f, 0.0, 1.0, opts).value * inv_a;
    } else {
        auto f = [&](double s) {
            return std::exp(-s + (a - 1.0) * std::log(s) + beta * std::log1p(s / z));
        };
        head = numerics::integrate_adaptive(f, 0.0, 1.0, opts).value;
    }

    auto log_tail_integrand = [&](double s) {
        return -s + (a - 1.0) * std::log(s) + beta * std::log1p(s / z);
    };
    auto tail_integrand = [&](double s) { return std::exp(log_tail_integrand(s)); };
    // Bound on int_X^inf e^g with g' <= -delta on [X, inf).
    auto tail_bound = [&](double x) {
        const double delta =
            1.0 - std::max(0.0, (a - 1.0) / x) - std::max(0.0, beta / (z + x));
        if (delta <= 0.0) return std::numeric_limits<double>::infinity();
        return std::exp(log_tail_integrand(x)) / delta;
    };
    const double panel = std::max(8.0, 2.0 * std::sqrt(std::abs(beta) + 1.0));
    const double tail =
        numerics::integrate_to_infinity(tail_integrand, 1.0, panel, tail_bound, kSeriesEps, opts)
            .value;

    const double total = head + tail;
    return checked_exp(log_prefactor + std::log(total), "tricomi_u");
}

double tricomi_u(HypergeometricParams params, double z) {
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DomainError("tricomi_u: z must be positive and finite, got " + std::to_string(z));
    }
    if (params.alpha == 0.0) return 1.0;
    double asymptotic = 0.0;
    if (tricomi_asymptotic(params.alpha, params.gamma, z, asymptotic)) return asymptotic;
    if (!(params.alpha > 0.0)) {
        throw DomainError("tricomi_u: negative alpha is outside the supported range");
    }
    return tricomi_u_integral(params, z);
}

double tricomi_u_prime(HypergeometricParams params, double z) {
    if (params.alpha == 0.0) {
        if (!(z > 0.0)) throw DomainError("tricomi_u_prime: z must be positive");
        return 0.0;
    }
    return -params.alpha * tricomi_u({params.alpha + 1.0, params.gamma + 1.0}, z);
}

double wronskian_mu(HypergeometricParams params, double z) {
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DomainError("wronskian_mu: z must be positive and finite");
    }
    if (params.alpha == 0.0) return 0.0;  // 1 / Gamma(0) = 0
    if (!(params.alpha > 0.0 && params.gamma > 0.0)) {
        throw DomainError("wronskian_mu: requires alpha > 0 and gamma > 0");
    }
    const double log_mag =
        log_gamma(params.gamma) - log_gamma(params.alpha) - params.gamma * std::log(z) + z;
    return -checked_exp(log_mag, "wronskian_mu");
}

}  // namespace prepay::specfun
