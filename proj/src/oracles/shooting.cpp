#include "prepay/errors.hpp"
#include "prepay/numerics.hpp"
#include "prepay/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace prepay::oracles {

namespace {

constexpr int kMaxBisections = 400;

double default_x_max(const CirParams& cir, const ContractParams& contract) {
    return 50.0 * std::max(cir.theta, contract.c);
}

}  // namespace

const char* to_string(ShotOutcome outcome) {
    return outcome == ShotOutcome::diverged_up ? "diverged_up" : "decayed";
}

ShotOutcome shoot_classify(const CirParams& cir, const ContractParams& contract,
                           double r_candidate, double x_max, double ode_tol) {
    validate(cir);
    validate(contract);
    if (!(r_candidate > 0.0)) {
        throw StepUnderflowError("shoot_classify: the steady ODE is degenerate at x = 0; "
                                 "candidate must be positive",
                                 r_candidate);
    }
    if (!(x_max > r_candidate)) {
        throw DomainError("shoot_classify: x_max must exceed the candidate");
    }
    const double k = cir.k;
    const double theta = cir.theta;
    const double half_var = 0.5 * cir.sigma * cir.sigma;
    const double c = contract.c;

    auto rhs = [&](double x, const numerics::OdeState<2>& y) {
        return numerics::OdeState<2>{y[1], (x * y[0] - c - k * (theta - x) * y[1]) / (half_var * x)};
    };
    ShotOutcome outcome = ShotOutcome::decayed;
    bool exited = false;
    auto stop = [&](double x, const numerics::OdeState<2>& y) {
        if (y[0] < 0.0) {
            outcome = ShotOutcome::decayed;
            exited = true;
        } else if (y[0] > std::max(1.0, 2.0 * c / x)) {
            outcome = ShotOutcome::diverged_up;
            exited = true;
        }
        return exited;
    };
    numerics::OdeOptions opts;
    opts.tol = ode_tol;
    opts.initial_step = 1e-3 * r_candidate;
    opts.record_steps = false;
    const auto traj = numerics::ode_integrate<2>(rhs, r_candidate, {1.0, 0.0}, x_max, opts, stop);
    if (exited) return outcome;
    return traj.y_end()[0] > c / x_max ? ShotOutcome::diverged_up : ShotOutcome::decayed;
}

ShootingReport shoot_solve(const CirParams& cir, const ContractParams& contract, double tol) {
    validate(cir);
    validate(contract);
    if (!(tol >= 1e-10)) throw ValidationError("tol", "shoot_solve: tol must be >= 1e-10");

    const double x_max = default_x_max(cir, contract);
    // Any candidate at or above c starts with V'' >= 0 and leaves upwards at once.
    double lo = 1e-6 * std::max(cir.theta, contract.c);
    double hi = std::min(2.0 * contract.c, 0.5 * x_max);

    ShootingReport report;
    auto classify = [&](double r) {
        const ShotOutcome o = shoot_classify(cir, contract, r, x_max);
        report.classification_trace.push_back({r, o});
        return o;
    };

    const ShotOutcome at_lo = classify(lo);
    const ShotOutcome at_hi = classify(hi);
    if (at_lo == at_hi || at_lo != ShotOutcome::decayed) {
        std::vector<std::pair<double, double>> samples;
        for (const auto& rec : report.classification_trace) {
            samples.emplace_back(rec.candidate, rec.outcome == ShotOutcome::decayed ? -1.0 : 1.0);
        }
        throw NoBracketError("shoot_solve: every candidate classifies as " +
                                 std::string(to_string(at_hi)) +
                                 "; prepayment is never optimal for these parameters",
                             std::move(samples));
    }

    while (hi - lo > tol * lo) {
        if (report.iterations >= kMaxBisections) {
            std::vector<double> trace;
            for (const auto& rec : report.classification_trace) trace.push_back(rec.candidate);
            throw ConvergenceError("shoot_solve: bisection did not converge", std::move(trace));
        }
        // Geometric midpoints while the bracket spans decades, arithmetic afterwards.
        const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (classify(mid) == ShotOutcome::decayed) {
            lo = mid;
        } else {
            hi = mid;
        }
        ++report.iterations;
    }
    report.r_star = 0.5 * (lo + hi);
    report.bracket_width = hi - lo;

    auto sorted = report.classification_trace;
    std::sort(sorted.begin(), sorted.end(),
              [](const ShotRecord& a, const ShotRecord& b) { return a.candidate < b.candidate; });
    bool seen_up = false;
    for (const auto& rec : sorted) {
        if (rec.outcome == ShotOutcome::diverged_up) {
            seen_up = true;
        } else if (seen_up) {
            throw Error("shoot_solve: classification is not monotone in the candidate (decayed at " +
                        std::to_string(rec.candidate) + " above a diverged_up candidate)");
        }
    }
    return report;
}

}  // namespace prepay::oracles
