#include "prepay/errors.hpp"
#include "prepay/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace prepay::oracles {

namespace {

// Above this the projected iteration can settle into a limit cycle just short of
// psor_tol around the contact node.
constexpr double kOmegaCap = 1.88;
constexpr int kStallWindow = 256;

struct Tridiagonal {
    std::vector<double> lower, diag, upper;
};

// Spatial operator L V = (sigma^2/2) x V'' + k (theta - x) V' - x V on the grid, central
// differences where the cell Peclet number allows, upwind otherwise. Row 0 carries the
// degenerate boundary k theta V_x with a forward difference; the last row is Dirichlet.
Tridiagonal spatial_operator(const CirParams& cir, const std::vector<double>& x, double dx) {
    const std::size_t n = x.size();
    Tridiagonal op{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                   std::vector<double>(n, 0.0)};
    const double half_var = 0.5 * cir.sigma * cir.sigma;
    op.diag[0] = -cir.k * cir.theta / dx;
    op.upper[0] = cir.k * cir.theta / dx;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d = half_var * x[i] / (dx * dx);
        const double b = cir.k * (cir.theta - x[i]);
        if (std::abs(b) * dx <= 2.0 * d) {
            op.lower[i] = d - b / (2.0 * dx);
            op.upper[i] = d + b / (2.0 * dx);
            op.diag[i] = -2.0 * d - x[i];
        } else if (b > 0.0) {
            op.lower[i] = d;
            op.upper[i] = d + b / dx;
            op.diag[i] = -2.0 * d - b / dx - x[i];
        } else {
            op.lower[i] = d - b / dx;
            op.upper[i] = d;
            op.diag[i] = -2.0 * d + b / dx - x[i];
        }
    }
    return op;
}

// Length of the contact set {V = obstacle} that starts at x = 0, as a boundary location.
double contact_boundary(const std::vector<double>& v, const std::vector<double>& x, double obstacle) {
    std::size_t i = 0;
    const double slack = 1e-12 * std::max(1.0, obstacle);
    while (i + 1 < v.size() && v[i] >= obstacle - slack) ++i;
    return i == 0 ? 0.0 : x[i - 1];
}

}  // namespace

FdReport fd_steady_state(const CirParams& cir, const ContractParams& contract,
                         const FdConfig& config) {
    validate(cir);
    validate(contract);
    if (config.nodes < 8) throw ValidationError("fd_nodes", "fd_steady_state: need at least 8 nodes");
    if (!(config.dtau > 0.0)) throw ValidationError("dtau", "fd_steady_state: dtau must be positive");
    if (!(config.dtau_growth >= 1.0) || !(config.dtau_max >= config.dtau)) {
        throw ValidationError("dtau", "fd_steady_state: need growth >= 1 and dtau_max >= dtau");
    }
    const double x_max = config.x_max > 0.0 ? config.x_max : 50.0 * cir.theta;
    const double tau_max = config.tau_max > 0.0 ? config.tau_max : 200.0 / cir.k;
    const int n = config.nodes;
    const double dx = x_max / (n - 1);

    FdReport report;
    report.dx = dx;
    report.grid.resize(n);
    for (int i = 0; i < n; ++i) report.grid[i] = dx * i;
    const auto& x = report.grid;
    const Tridiagonal op = spatial_operator(cir, x, dx);

    double max_advection = 0.0;
    for (double xi : x) max_advection = std::max(max_advection, std::abs(cir.k * (cir.theta - xi)));
    report.cfl_warning = config.dtau * max_advection / dx > 1.0;

    std::vector<double> v(n, 0.0), prev(n, 0.0), rhs(n, 0.0), a_lo(n), a_di(n), a_up(n);
    const double m = contract.m;
    const double far_value = m / x_max;

    double tau = 0.0;
    double dtau = config.dtau;
    for (int step = 1;; ++step) {
        dtau = std::min(dtau, tau_max - tau);
        tau += dtau;
        const double obstacle = balance(contract, tau);

        double radius = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            a_lo[i] = -dtau * op.lower[i];
            a_up[i] = -dtau * op.upper[i];
            a_di[i] = 1.0 - dtau * op.diag[i];
            rhs[i] = prev[i] + dtau * m;
            radius = std::max(radius, (std::abs(a_lo[i]) + std::abs(a_up[i])) / a_di[i]);
        }
        radius = std::min(radius, 1.0 - 1e-12);
        double omega = config.omega > 0.0
                           ? config.omega
                           : std::min(kOmegaCap, 2.0 / (1.0 + std::sqrt(1.0 - radius * radius)));
        v[n - 1] = std::min(far_value, obstacle);

        bool converged = false;
        std::vector<double> history;
        double window_best = HUGE_VAL, last_window_best = HUGE_VAL;
        for (int it = 0; it < config.psor_max_iter; ++it) {
            double change = 0.0;
            for (int i = 0; i + 1 < n; ++i) {
                const double left = i > 0 ? a_lo[i] * v[i - 1] : 0.0;
                const double gs = (rhs[i] - left - a_up[i] * v[i + 1]) / a_di[i];
                const double updated = std::min(obstacle, v[i] + omega * (gs - v[i]));
                change = std::max(change, std::abs(updated - v[i]));
                v[i] = updated;
            }
            ++report.psor_iterations;
            if (it % 64 == 0) history.push_back(change);
            if (change <= config.psor_tol) {
                converged = true;
                break;
            }
            // Stalled over-relaxation falls back towards projected Gauss-Seidel.
            window_best = std::min(window_best, change);
            if (it % kStallWindow == kStallWindow - 1) {
                if (window_best > 0.5 * last_window_best && omega > 1.0) omega = 1.0 + 0.5 * (omega - 1.0);
                last_window_best = window_best;
                window_best = HUGE_VAL;
            }
        }
        if (!converged) {
            throw ConvergenceError("fd_steady_state: PSOR did not reach " +
                                       std::to_string(config.psor_tol) + " at tau = " +
                                       std::to_string(tau),
                                   std::move(history));
        }

        double step_change = 0.0;
        for (int i = 0; i < n; ++i) step_change = std::max(step_change, std::abs(v[i] - prev[i]));
        report.h_trace.emplace_back(tau, contact_boundary(v, x, obstacle));
        prev = v;
        report.steps_to_steady = step;
        report.tau_final = tau;
        if (step_change <= config.steady_tol) {
            report.reached_steady = true;
            break;
        }
        if (tau >= tau_max) break;
        dtau = std::min(dtau * config.dtau_growth, config.dtau_max);
    }
    report.v_steady = v;
    report.boundary = report.h_trace.back().second;
    return report;
}

double fd_boundary_at(const FdReport& report, double tau) {
    const auto it = std::find_if(report.h_trace.begin(), report.h_trace.end(),
                                 [tau](const auto& e) { return e.first >= tau; });
    if (it == report.h_trace.end()) throw DomainError("fd_boundary_at: tau beyond the march");
    return it->second;
}

double fd_interpolate(const FdReport& report, double x) {
    const auto& g = report.grid;
    const auto& v = report.v_steady;
    const int n = static_cast<int>(g.size());
    if (n < 4 || x < g.front() || x > g.back()) {
        throw DomainError("fd_interpolate: x outside the grid");
    }
    int i = static_cast<int>(std::floor((x - g.front()) / report.dx));
    const int first = std::clamp(i - 1, 0, n - 4);
    double out = 0.0;
    for (int j = first; j < first + 4; ++j) {
        double w = 1.0;
        for (int l = first; l < first + 4; ++l) {
            if (l != j) w *= (x - g[l]) / (g[j] - g[l]);
        }
        out += w * v[j];
    }
    return out;
}

std::vector<FdProbe> fd_richardson(const FdReport& fine, const FdReport& coarse,
                                   const std::vector<double>& xs) {
    const double r = coarse.dx / fine.dx;
    if (!(r > 1.0)) throw DomainError("fd_richardson: coarse grid must be coarser than fine grid");
    std::vector<FdProbe> out;
    out.reserve(xs.size());
    for (double x : xs) {
        const double f = fd_interpolate(fine, x);
        const double c = fd_interpolate(coarse, x);
        out.push_back({x, f, c, std::abs(f - c) / (r * r - 1.0)});
    }
    return out;
}

}  // namespace prepay::oracles
