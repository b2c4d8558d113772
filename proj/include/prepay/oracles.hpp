#pragma once

// Independent numerical routes to the steady-state boundary and value:
//   - shooting on the steady ODE with bisection on the boundary candidate,
//   - an implicit finite-difference obstacle solver (PSOR) for the time-dependent
//     problem in time to expiry, marched to steady state,
//   - Monte Carlo valuation of a threshold prepayment policy with exact CIR sampling.
// None of them touch the hypergeometric machinery.

#include "prepay/model.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace prepay::oracles {

// ---------------------------------------------------------------------------
// Shooting

/// How a trajectory started at a boundary candidate with V = 1, V' = 0 leaves the
/// band between 0 and max(1, 2c/x). A candidate below the true boundary falls through 0
/// (decayed); one at or above it is carried off by the growing homogeneous mode.
enum class ShotOutcome { diverged_up, decayed };

const char* to_string(ShotOutcome outcome);

struct ShotRecord {
    double candidate;
    ShotOutcome outcome;
};

struct ShootingReport {
    double r_star = 0.0;
    int iterations = 0;
    double bracket_width = 0.0;
    std::vector<ShotRecord> classification_trace;
};

/// Integrates (sigma^2/2) x V'' + k (theta - x) V' - x V + c = 0 from x = r_candidate with
/// V = 1, V' = 0 towards x_max and classifies the exit.
ShotOutcome shoot_classify(const CirParams& cir, const ContractParams& contract,
                           double r_candidate, double x_max, double ode_tol = 1e-12);

/// Bisection on shoot_classify until the bracket is narrower than tol * r_star.
/// Throws NoBracketError if both ends of the search interval classify alike, and Error
/// if the trace is not monotone in the candidate.
ShootingReport shoot_solve(const CirParams& cir, const ContractParams& contract, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Finite differences

struct FdConfig {
    int nodes = 2000;
    double x_max = 0.0;        ///< 0 selects 50 theta
    double dtau = 1e-5;        ///< first time step (years)
    double dtau_growth = 1.1;  ///< geometric growth of the time step
    double dtau_max = 2.0;     ///< cap on the time step (years)
    double tau_max = 0.0;      ///< 0 selects 200 / k
    double omega = 0.0;        ///< over-relaxation factor; 0 picks it from a Jacobi radius bound, capped at 1.88
    double psor_tol = 1e-12;
    int psor_max_iter = 100000;
    double steady_tol = 1e-10;  ///< max-norm change per step that counts as steady
};

struct FdReport {
    std::vector<double> grid;
    std::vector<double> v_steady;
    std::vector<std::pair<double, double>> h_trace;  ///< (tau, boundary) per step
    int steps_to_steady = 0;
    double tau_final = 0.0;
    double boundary = 0.0;  ///< last node in the contact set at steady state
    double dx = 0.0;
    bool reached_steady = false;
    bool cfl_warning = false;  ///< first step's advective Courant number dtau |b| / dx exceeds 1
    long long psor_iterations = 0;
};

/// Backward-Euler march of V_tau = (sigma^2/2) x V_xx + k (theta - x) V_x - x V + m with
/// V <= (m/c)(1 - e^{-c tau}), V(x, 0) = 0, solved per step by projected SOR.
/// Throws ConvergenceError if PSOR misses its tolerance.
FdReport fd_steady_state(const CirParams& cir, const ContractParams& contract,
                         const FdConfig& config = {});

/// Contact-set boundary at the first recorded step with time to expiry >= tau.
double fd_boundary_at(const FdReport& report, double tau);

/// Steady FD value at x by cubic Lagrange interpolation on the grid.
double fd_interpolate(const FdReport& report, double x);

struct FdProbe {
    double x;
    double fine;
    double coarse;
    double grid_error;  ///< Richardson estimate |fine - coarse| / (r^2 - 1), r = dx ratio
};

/// Second-order Richardson estimate of the fine solution's grid error at each x.
std::vector<FdProbe> fd_richardson(const FdReport& fine, const FdReport& coarse,
                                   const std::vector<double>& xs);

// ---------------------------------------------------------------------------
// Monte Carlo

struct McConfig {
    int paths = 100000;
    double dt = 1.0 / 252.0;    ///< step used near the boundary
    double max_step = 1.0 / 12.0;  ///< step used far above it
    double horizon = 1000.0;    ///< hard cap on simulated time (years)
    double discount_floor = 1e-8;  ///< a path is truncated once its discount factor drops below
    std::uint64_t seed = 20240601;
    int workers = 0;            ///< 0 selects hardware concurrency
};

struct McReport {
    double x0 = 0.0;
    double boundary_used = 0.0;
    double value_estimate = 0.0;
    double std_error = 0.0;
    int paths = 0;
    double dt = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    long long truncated_paths = 0;
};

/// Value of "pay m per unit time until the rate first reaches `boundary`, then repay the
/// balance m/c", discounted along exactly sampled CIR paths.
McReport mc_value(const CirParams& cir, const ContractParams& contract, double x0,
                  double boundary, const McConfig& config = {});

struct OptimalityProbe {
    McReport minus;
    McReport center;
    McReport plus;
    double diff_minus_se = 0.0;  ///< standard error of (minus - center), common random numbers
    double diff_plus_se = 0.0;   ///< standard error of (plus - center)
};

/// Values the threshold policy at boundary - delta, boundary and boundary + delta on the
/// same simulated paths.
OptimalityProbe mc_optimality_probe(const CirParams& cir, const ContractParams& contract,
                                    double x0, double boundary, double delta,
                                    const McConfig& config = {});

}  // namespace prepay::oracles
