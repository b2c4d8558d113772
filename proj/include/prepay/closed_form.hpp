#pragma once

// Analytical steady-state solution of the prepayment problem.
//
// With V(x) = e^{lambda x} u(z), z = p x, the continuation region satisfies
//   z u'' + (gamma - z) u' - alpha u = g(z),   g(z) = -(c/s) e^{a z},
// whose decaying solutions are c2 U(alpha, gamma, z) + u_p(z). The free boundary z*
// is the root of the smooth-pasting residual after c2 has been eliminated.

#include "prepay/model.hpp"

#include <utility>
#include <vector>

namespace prepay::closed_form {

/// Relative tolerance of the inner quadratures unless a solve asks for a looser one.
inline constexpr double kDefaultQuadTol = 1e-13;

struct SmoothPastingDiagnostics {
    double value_residual = 0.0;       ///< V(x*) - 1, from the continuation formula
    double derivative_residual = 0.0;  ///< V'(x*+)
    double boundary_residual = 0.0;    ///< F(z*)
};

struct SteadyStateSolution {
    CirParams cir;
    ContractParams contract;
    DerivedConstants consts;
    double z_star = 0.0;
    double x_star = 0.0;  ///< z_star / p
    double c1 = 0.0;      ///< coefficient of M; always zero for a decaying solution
    double c2 = 0.0;      ///< coefficient of U
    double c2_scaled = 0.0;  ///< c2 e^{-a z*}, the form used for evaluation
    double tol = 0.0;
    double quad_tol = kDefaultQuadTol;
    int iterations = 0;
    std::pair<double, double> bracket{0.0, 0.0};
    SmoothPastingDiagnostics diagnostics;
};

struct ParticularSolution {
    double u_p;
    double u_p_prime;
};

struct ValuePoint {
    double x;
    double v;
    double ode_residual;
};

struct ValueCurve {
    std::vector<ValuePoint> points;
};

/// g(z) = -(c/s) e^{a z}.
double source_term(const DerivedConstants& consts, const ContractParams& contract, double z);

/// Variation-of-parameters weight (g(xi)/xi) / W(M,U)(xi)
///   = (Gamma(alpha)/Gamma(gamma)) (c/s) xi^{gamma-1} e^{-(1-a) xi}, positive.
/// Throws DomainError for xi <= 0.
double kernel_weight(const DerivedConstants& consts, const ContractParams& contract, double xi);

/// u_p(z) = M(z) I_U(z) + U(z) I_M(z) and its derivative, where
///   I_U(z) = int_z^inf U K,   I_M(z) = int_{z_ref}^z M K,   K = kernel_weight.
/// Requires z >= z_ref > 0. Throws OverflowError if u_p itself is not representable
/// (value() works in scaled form and has no such limit).
ParticularSolution particular_solution(const DerivedConstants& consts,
                                       const ContractParams& contract, double z, double z_ref);

enum class TailMethod { automatic, swapped_order, nested };

/// e^{(1-a) z} I_U(z). The swapped-order route integrates an incomplete gamma once and is
/// the default up to z = 200; the nested route integrates U K directly. Exposed so the
/// two can be checked against each other.
double tail_integral_scaled(const DerivedConstants& consts, const ContractParams& contract,
                            double z, TailMethod method = TailMethod::automatic,
                            double quad_tol = kDefaultQuadTol);

/// Smooth-pasting residual F(z) = c2(z) U'(z) + u_p'(z) - a e^{a z}, with
/// c2(z) = (e^{a z} - u_p(z)) / U(z) and z_ref = z. Its root is z*.
double boundary_residual(const DerivedConstants& consts, const ContractParams& contract, double z);

/// The same condition written as the ratio U(a,g,z) / U(a+1,g+1,z) equated to the
/// ratio of the two pasting conditions. Independent algebraic route to the same root.
double ratio_form_residual(const DerivedConstants& consts, const ContractParams& contract,
                           double z);

/// Locates z* by a 64-point geometric scan over (1e-4 p theta, 10 p max(theta, c)) and
/// Brent refinement to |dz| <= tol z. Requires m == c, tol >= 1e-12 and quad_tol in
/// [1e-13, 1e-6]; quad_tol is kept in the solution and reused by value().
/// Throws NoBracketError (no sign change) or ConvergenceError.
SteadyStateSolution solve_boundary(const CirParams& cir, const ContractParams& contract,
                                   double tol = 1e-12, double quad_tol = kDefaultQuadTol);

/// V(x): exactly 1 for x <= x*, e^{lambda x}(c2 U(p x) + u_p(p x)) beyond.
double value(const SteadyStateSolution& solution, double x);

/// dV/dx: 0 for x <= x*.
double value_derivative(const SteadyStateSolution& solution, double x);

/// V and V' from the continuation formula, also for x <= x* (no clamping to the
/// stopped region). Used for diagnostics at and around the boundary.
std::pair<double, double> continuation_value(const SteadyStateSolution& solution, double x);

/// (sigma^2/2) x V'' + k (theta - x) V' - x V + c at x, with V'' a central difference of
/// V' (step 1e-5 x). For x >= x* the continuation formula is differentiated.
double ode_residual(const SteadyStateSolution& solution, double x);

/// Samples `points` equally spaced x in [x_lo, x_hi] with residuals.
ValueCurve sample_curve(const SteadyStateSolution& solution, double x_lo, double x_hi,
                        int points);

}  // namespace prepay::closed_form
