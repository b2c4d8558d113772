#include "prepay/closed_form.hpp"

#include "prepay/errors.hpp"
#include "prepay/numerics.hpp"
#include "prepay/specfun.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace prepay::closed_form {

namespace {

constexpr double kTailTol = 1e-16;
constexpr int kScanPoints = 64;

double log_kappa(const DerivedConstants& consts, const ContractParams& contract) {
    return specfun::log_gamma(consts.alpha) - specfun::log_gamma(consts.gamma) +
           std::log(contract.c / consts.s);
}

// Everything needed at one point z, scaled so nothing overflows for large z:
//   m  = e^{-z} M(z),     mp = e^{-z} M'(z),
//   ju = e^{(1-a) z} I_U(z),
//   jm = e^{-a z} I_M(z; z_ref),
// so that e^{-a z} u_p = m ju + U jm and e^{-a z} u_p' = mp ju + U' jm.
struct ScaledPoint {
    double m;
    double mp;
    double u;
    double up;
    double ju;
    double jm;
};

// Nested form: adaptive quadrature of U(xi) K(xi) on (z, Xi) with a certified tail.
double scaled_tail_integral_nested(const DerivedConstants& consts, double log_k, double z,
                                   double qtol) {
    const specfun::HypergeometricParams hp = consts.hypergeometric();
    const double decay = 1.0 - consts.a_exp;
    auto log_weight = [&](double xi) {
        return log_k + (consts.gamma - 1.0) * std::log(xi) - decay * (xi - z);
    };
    auto integrand = [&](double xi) {
        return specfun::tricomi_u(hp, xi) * std::exp(log_weight(xi));
    };
    // U is decreasing, so U(X) K(X) / delta bounds the tail once xi^{gamma-1} e^{-(1-a) xi}
    // decays at rate delta > 0 on [X, inf).
    auto tail_bound = [&](double x) {
        const double delta = decay - std::max(0.0, (consts.gamma - 1.0) / x);
        if (delta <= 0.0) return std::numeric_limits<double>::infinity();
        return specfun::tricomi_u(hp, x) * std::exp(log_weight(x)) / delta;
    };
    const double panel = 8.0 + 0.25 * std::max(0.0, consts.gamma - 1.0) / decay;
    const numerics::QuadratureOptions opts{qtol, 0.0, 400};
    return numerics::integrate_to_infinity(integrand, z, panel, tail_bound, kTailTol, opts).value;
}

// Same quantity with the order of integration swapped. Inserting the integral
// representation of U and integrating over xi first leaves
//   (kappa / Gamma(alpha)) int_0^inf t^{alpha-1} (1+t)^{gamma-alpha-1} (q+t)^{-gamma}
//       e^{q z} Gamma(gamma, (q+t) z) dt,      q = 1 - a,
// a single quadrature over an upper incomplete gamma instead of one U quadrature per
// outer node. Gamma(gamma, y) underflows for y beyond ~700, which limits z.
double scaled_tail_integral_swapped(const DerivedConstants& consts, double log_k, double z,
                                    double qtol) {
    const double a = consts.alpha;
    const double g = consts.gamma;
    const double beta = g - a - 1.0;
    const double q = 1.0 - consts.a_exp;
    const double log_prefactor = log_k - specfun::log_gamma(a);
    // Everything except the t^{alpha-1} factor.
    auto log_smooth = [&](double t) {
        const double upper = boost::math::tgamma(g, (q + t) * z);
        if (!(upper > 0.0)) return -std::numeric_limits<double>::infinity();
        return beta * std::log1p(t) - g * std::log(q + t) + q * z + std::log(upper);
    };
    const numerics::QuadratureOptions opts{qtol, 0.0, 400};

    double head = 0.0;
    if (a < 1.0) {
        const double inv_a = 1.0 / a;
        auto f = [&](double v) { return std::exp(log_smooth(std::pow(v, inv_a))); };
        head = numerics::integrate_adaptive(f, 0.0, 1.0, opts).value * inv_a;
    } else {
        auto f = [&](double t) { return std::exp((a - 1.0) * std::log(t) + log_smooth(t)); };
        head = numerics::integrate_adaptive(f, 0.0, 1.0, opts).value;
    }

    // Tail over t = e^w, w >= 0. For t >= t0 the log-integrand falls at least at rate
    //   z (1 - (gamma-1)/y0) - max(0, alpha-1)/t0 - max(0, beta)/(1+t0),
    // using Gamma(g, y) <= y^{g-1} e^{-y} / (1 - (g-1)/y) for y > g - 1.
    auto log_tail = [&](double t) { return (a - 1.0) * std::log(t) + log_smooth(t); };
    auto tail_bound_t = [&](double t0) {
        const double y0 = (q + t0) * z;
        if (y0 <= std::max(0.0, g - 1.0)) return std::numeric_limits<double>::infinity();
        const double rate = z * (1.0 - std::max(0.0, (g - 1.0) / y0)) -
                            std::max(0.0, a - 1.0) / t0 - std::max(0.0, beta) / (1.0 + t0);
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return std::exp(log_tail(t0)) / rate;
    };
    double w_end = 1.0;
    while (!(tail_bound_t(std::exp(w_end)) <= kTailTol * head) && w_end < 60.0) w_end += 0.5;
    auto fw = [&](double w) {
        const double t = std::exp(w);
        return std::exp(log_tail(t) + w);
    };
    double tail = numerics::integrate_adaptive(fw, 0.0, w_end, opts).value;
    // The stopping rule used the head as reference; confirm against the full total.
    while (!(tail_bound_t(std::exp(w_end)) <= kTailTol * (head + tail)) && w_end < 60.0) {
        tail += numerics::integrate_adaptive(fw, w_end, w_end + 1.0, opts).value;
        w_end += 1.0;
    }
    return std::exp(log_prefactor) * (head + tail);
}

constexpr double kSwappedTailMaxZ = 200.0;

double scaled_tail_integral(const DerivedConstants& consts, double log_k, double z, double qtol) {
    if (z <= kSwappedTailMaxZ) return scaled_tail_integral_swapped(consts, log_k, z, qtol);
    return scaled_tail_integral_nested(consts, log_k, z, qtol);
}

double scaled_growing_integral(const DerivedConstants& consts, double log_k, double z,
                               double z_ref, double qtol) {
    if (z == z_ref) return 0.0;
    const specfun::HypergeometricParams hp = consts.hypergeometric();
    auto integrand = [&](double xi) {
        return std::exp(specfun::log_kummer_m(hp, xi) - xi + log_k +
                        (consts.gamma - 1.0) * std::log(xi) + consts.a_exp * (xi - z));
    };
    const numerics::QuadratureOptions opts{qtol, 0.0, 400};
    if (z < z_ref) return -numerics::integrate_adaptive(integrand, z, z_ref, opts).value;
    return numerics::integrate_adaptive(integrand, z_ref, z, opts).value;
}

ScaledPoint evaluate_scaled(const DerivedConstants& consts, const ContractParams& contract,
                            double z, double z_ref, double qtol = kDefaultQuadTol) {
    const specfun::HypergeometricParams hp = consts.hypergeometric();
    const double log_k = log_kappa(consts, contract);
    ScaledPoint pt{};
    pt.m = std::exp(specfun::log_kummer_m(hp, z) - z);
    pt.mp = consts.alpha / consts.gamma *
            std::exp(specfun::log_kummer_m({consts.alpha + 1.0, consts.gamma + 1.0}, z) - z);
    pt.u = specfun::tricomi_u(hp, z);
    pt.up = specfun::tricomi_u_prime(hp, z);
    pt.ju = scaled_tail_integral(consts, log_k, z, qtol);
    pt.jm = scaled_growing_integral(consts, log_k, z, z_ref, qtol);
    return pt;
}

// e^{-a z} F(z) with z_ref = z.
double scaled_boundary_residual(const DerivedConstants& consts, const ContractParams& contract,
                                double z, double qtol = kDefaultQuadTol) {
    const ScaledPoint pt = evaluate_scaled(consts, contract, z, z, qtol);
    if (pt.u == 0.0 || !std::isfinite(pt.u)) {
        throw SingularityError("boundary_residual: U(alpha, gamma, z) is not usable at z = " +
                               std::to_string(z));
    }
    const double c2_scaled = (1.0 - pt.m * pt.ju) / pt.u;
    return c2_scaled * pt.up + pt.mp * pt.ju - consts.a_exp;
}

void check_contract(const ContractParams& contract) {
    validate(contract);
    if (contract.m != contract.c) {
        throw ValidationError("m", "the steady-state solver is normalized to m = c; "
                                   "scale the value by m / c instead");
    }
}

}  // namespace

double source_term(const DerivedConstants& consts, const ContractParams& contract, double z) {
    return -(contract.c / consts.s) * std::exp(consts.a_exp * z);
}

double kernel_weight(const DerivedConstants& consts, const ContractParams& contract, double xi) {
    if (!(xi > 0.0)) throw DomainError("kernel_weight: xi must be positive");
    return std::exp(log_kappa(consts, contract) + (consts.gamma - 1.0) * std::log(xi) -
                    (1.0 - consts.a_exp) * xi);
}

ParticularSolution particular_solution(const DerivedConstants& consts,
                                       const ContractParams& contract, double z, double z_ref) {
    if (!(z_ref > 0.0 && z >= z_ref)) {
        throw DomainError("particular_solution: requires z >= z_ref > 0");
    }
    if (contract.c == 0.0) return {0.0, 0.0};
    const ScaledPoint pt = evaluate_scaled(consts, contract, z, z_ref);
    const double grow = consts.a_exp * z;
    if (grow > 709.0) throw OverflowError("particular_solution: e^{a z} overflows");
    const double scale = std::exp(grow);
    return {scale * (pt.m * pt.ju + pt.u * pt.jm), scale * (pt.mp * pt.ju + pt.up * pt.jm)};
}

double tail_integral_scaled(const DerivedConstants& consts, const ContractParams& contract,
                            double z, TailMethod method, double quad_tol) {
    if (!(z > 0.0)) throw DomainError("tail_integral_scaled: z must be positive");
    const double log_k = log_kappa(consts, contract);
    switch (method) {
        case TailMethod::swapped_order:
            return scaled_tail_integral_swapped(consts, log_k, z, quad_tol);
        case TailMethod::nested:
            return scaled_tail_integral_nested(consts, log_k, z, quad_tol);
        default:
            return scaled_tail_integral(consts, log_k, z, quad_tol);
    }
}

double boundary_residual(const DerivedConstants& consts, const ContractParams& contract,
                         double z) {
    if (!(z > 0.0)) throw DomainError("boundary_residual: z must be positive");
    return std::exp(consts.a_exp * z) * scaled_boundary_residual(consts, contract, z);
}

double ratio_form_residual(const DerivedConstants& consts, const ContractParams& contract,
                           double z) {
    if (!(z > 0.0)) throw DomainError("ratio_form_residual: z must be positive");
    const specfun::HypergeometricParams shifted{consts.alpha + 1.0, consts.gamma + 1.0};
    const ParticularSolution up = particular_solution(consts, contract, z, z);
    const double e = std::exp(consts.a_exp * z);
    // u(z) = e and u'(z) = a e with U' = -alpha U(a+1, g+1, z) give
    //   U(a, g, z) / U(a+1, g+1, z) = -alpha (e - u_p) / (a e - u_p').
    const double lhs = specfun::tricomi_u(consts.hypergeometric(), z) / specfun::tricomi_u(shifted, z);
    const double rhs = -consts.alpha * (e - up.u_p) / (consts.a_exp * e - up.u_p_prime);
    return lhs - rhs;
}

SteadyStateSolution solve_boundary(const CirParams& cir, const ContractParams& contract,
                                   double tol, double quad_tol) {
    check_contract(contract);
    if (!(tol >= 1e-12) || !std::isfinite(tol)) {
        throw ValidationError("tol", "root tolerance must be >= 1e-12");
    }
    if (!(quad_tol >= kDefaultQuadTol && quad_tol <= 1e-6)) {
        throw ValidationError("tol_quad", "quadrature tolerance must lie in [1e-13, 1e-6]");
    }
    const DerivedConstants consts = derive_constants(cir);
    auto f = [&](double z) { return scaled_boundary_residual(consts, contract, z, quad_tol); };

    const double z_lo = 1e-4 * consts.p * cir.theta;
    const double z_hi = 10.0 * consts.p * std::max(cir.theta, contract.c);
    const double ratio = std::pow(z_hi / z_lo, 1.0 / (kScanPoints - 1));
    std::vector<std::pair<double, double>> samples;
    samples.reserve(kScanPoints);
    double prev_z = z_lo;
    double prev_f = f(z_lo);
    samples.emplace_back(prev_z, prev_f);
    bool found = prev_f == 0.0;
    double lo = z_lo;
    double hi = z_lo;
    for (int i = 1; i < kScanPoints && !found; ++i) {
        const double z = i == kScanPoints - 1 ? z_hi : z_lo * std::pow(ratio, i);
        const double fz = f(z);
        samples.emplace_back(z, fz);
        if ((fz < 0.0) != (prev_f < 0.0) || fz == 0.0) {
            lo = prev_z;
            hi = z;
            found = true;
        }
        prev_z = z;
        prev_f = fz;
    }
    if (!found) {
        throw NoBracketError("solve_boundary: smooth-pasting residual has no sign change on [" +
                                 std::to_string(z_lo) + ", " + std::to_string(z_hi) +
                                 "]; prepayment is never optimal for these parameters",
                             samples);
    }

    std::vector<double> trace;
    const double z_star = lo == hi ? lo : numerics::find_root_bracketed(f, lo, hi, tol, 0.0, &trace);

    SteadyStateSolution sol;
    sol.cir = cir;
    sol.contract = contract;
    sol.consts = consts;
    sol.z_star = z_star;
    sol.x_star = z_star / consts.p;
    sol.tol = tol;
    sol.quad_tol = quad_tol;
    sol.iterations = static_cast<int>(trace.size());
    sol.bracket = {lo, hi};

    const ScaledPoint pt = evaluate_scaled(consts, contract, z_star, z_star, quad_tol);
    sol.c2_scaled = (1.0 - pt.m * pt.ju) / pt.u;
    sol.c2 = sol.c2_scaled * std::exp(consts.a_exp * z_star);
    sol.c1 = 0.0;

    const auto [v, dv] = continuation_value(sol, sol.x_star);
    sol.diagnostics.value_residual = v - 1.0;
    sol.diagnostics.derivative_residual = dv;
    sol.diagnostics.boundary_residual =
        std::exp(consts.a_exp * z_star) * scaled_boundary_residual(consts, contract, z_star, quad_tol);
    return sol;
}

std::pair<double, double> continuation_value(const SteadyStateSolution& solution, double x) {
    const DerivedConstants& k = solution.consts;
    const double z = k.p * x;
    if (!(z > 0.0)) throw DomainError("continuation_value: x must be positive");
    const ScaledPoint pt = evaluate_scaled(k, solution.contract, z, solution.z_star, solution.quad_tol);
    // c2 e^{-a z} = c2_scaled e^{-a (z - z*)}
    const double homogeneous = solution.c2_scaled * std::exp(-k.a_exp * (z - solution.z_star));
    const double v = homogeneous * pt.u + pt.m * pt.ju + pt.u * pt.jm;
    const double u_prime_scaled = homogeneous * pt.up + pt.mp * pt.ju + pt.up * pt.jm;
    return {v, k.p * (u_prime_scaled - k.a_exp * v)};
}

double value(const SteadyStateSolution& solution, double x) {
    if (!(x >= 0.0)) throw DomainError("value: x must be nonnegative");
    if (x <= solution.x_star) return 1.0;
    return continuation_value(solution, x).first;
}

double value_derivative(const SteadyStateSolution& solution, double x) {
    if (!(x >= 0.0)) throw DomainError("value_derivative: x must be nonnegative");
    if (x <= solution.x_star) return 0.0;
    return continuation_value(solution, x).second;
}

double ode_residual(const SteadyStateSolution& solution, double x) {
    const CirParams& cir = solution.cir;
    const double c = solution.contract.c;
    if (x < solution.x_star) {
        // Stopped region: V = 1, V' = V'' = 0.
        return -x + c;
    }
    const double h = 1e-5 * x;
    const auto [v, dv] = continuation_value(solution, x);
    const double d2v =
        (continuation_value(solution, x + h).second - continuation_value(solution, x - h).second) /
        (2.0 * h);
    return 0.5 * cir.sigma * cir.sigma * x * d2v + cir.k * (cir.theta - x) * dv - x * v + c;
}

ValueCurve sample_curve(const SteadyStateSolution& solution, double x_lo, double x_hi,
                        int points) {
    if (points < 2) throw ValidationError("points", "need at least 2 points");
    if (!(x_lo >= 0.0 && x_hi > x_lo)) throw ValidationError("x-range", "need 0 <= x_min < x_max");
    ValueCurve curve;
    curve.points.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double x = i == points - 1 ? x_hi : x_lo + (x_hi - x_lo) * i / (points - 1);
        const double v = value(solution, x);
        const double r = x > 0.0 ? ode_residual(solution, x) : solution.contract.c;
        curve.points.push_back({x, v, r});
    }
    return curve;
}

}  // namespace prepay::closed_form
