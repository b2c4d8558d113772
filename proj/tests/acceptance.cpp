// Acceptance criteria, one per invocation: `acceptance <n> <path-to-prepay>`.
// Prints a single PASS/FAIL line and exits nonzero on FAIL.

#include "prepay/closed_form.hpp"
#include "prepay/errors.hpp"
#include "prepay/oracles.hpp"
#include "prepay/specfun.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace prepay;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct GridSet {
    CirParams cir;
    ContractParams contract;
    std::optional<closed_form::SteadyStateSolution> solution;  // empty: no interior boundary
};

const CirParams kPrimaryCir{0.25, 0.06, 0.1};
const ContractParams kPrimaryContract{0.05, 0.05};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string describe(const GridSet& s) {
    std::ostringstream o;
    o << "(k=" << s.cir.k << ", theta=" << s.cir.theta << ", sigma=" << s.cir.sigma
      << ", c=" << s.contract.c << ")";
    return o.str();
}

std::vector<GridSet> solve_grid() {
    std::vector<GridSet> out;
    for (double k : {0.1, 0.25, 0.5}) {
        for (double theta : {0.03, 0.06, 0.1}) {
            for (double sigma : {0.05, 0.1, 0.2}) {
                for (double c : {0.03, 0.05, 0.08}) {
                    GridSet s{{k, theta, sigma}, {c, c}, std::nullopt};
                    try {
                        s.solution = closed_form::solve_boundary(s.cir, s.contract);
                    } catch (const NoBracketError&) {
                    }
                    out.push_back(std::move(s));
                }
            }
        }
    }
    return out;
}

std::size_t solved_count(const std::vector<GridSet>& grid) {
    return static_cast<std::size_t>(
        std::count_if(grid.begin(), grid.end(), [](const GridSet& s) { return s.solution.has_value(); }));
}

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Special-function identities and the Wronskian.
Outcome criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    double identity = 0.0;
    identity = std::max(identity, rel(specfun::kummer_m({1, 2}, 1), std::numbers::e - 1.0));
    for (double a : {0.1, 0.5, 1.0, 2.5}) {
        for (double z : {0.1, 1.0, 10.0, 50.0}) {
            identity = std::max(identity, rel(specfun::tricomi_u({a, a + 1}, z), std::pow(z, -a)));
        }
    }
    for (double a : {0.1, 0.19441758, 2.0}) {
        for (double g : {0.5, 3.0, 10.0}) {
            identity = std::max(identity, std::abs(specfun::kummer_m({a, g}, 0.0) - 1.0));
        }
    }
    identity = std::max(identity, rel(std::exp(specfun::log_gamma(0.5)), std::sqrt(std::numbers::pi)));

    const std::array<specfun::HypergeometricParams, 9> pairs{{{0.1, 0.5},
                                                              {0.19441758, 3.0},
                                                              {0.5, 1.0},
                                                              {1.0, 2.0},
                                                              {0.3, 10.0},
                                                              {2.0, 2.5},
                                                              {0.05, 0.2},
                                                              {1.5, 6.0},
                                                              {0.9, 1.1}}};
    double wronskian = 0.0;
    for (const auto& hp : pairs) {
        for (int i = 0; i < 50; ++i) {
            const double z = 0.1 * std::pow(500.0, i / 49.0);
            const double w = specfun::kummer_m(hp, z) * specfun::tricomi_u_prime(hp, z) -
                             specfun::kummer_m_prime(hp, z) * specfun::tricomi_u(hp, z);
            wronskian = std::max(wronskian, rel(w, specfun::wronskian_mu(hp, z)));
        }
    }
    const double runtime = seconds_since(t0);
    const bool pass = identity <= 1e-10 && wronskian <= 1e-8 && runtime < 5.0;
    return {pass, "identities max rel err " + fmt("%.2e", identity) + " (tol 1e-10), Wronskian max rel err " +
                      fmt("%.2e", wronskian) + " (tol 1e-8) on 9 pairs x 50 z in [0.1, 50], runtime " +
                      fmt("%.2f", runtime) + " s (limit 5 s)"};
}

// 2. Smooth pasting over the 81-set grid.
Outcome criterion2() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto grid = solve_grid();
    double worst_v = 0.0;
    double worst_dv = 0.0;
    std::string where;
    for (const auto& s : grid) {
        if (!s.solution) continue;
        const auto [v, dv] = closed_form::continuation_value(*s.solution, s.solution->x_star);
        if (std::abs(v - 1.0) > worst_v) worst_v = std::abs(v - 1.0);
        if (std::abs(dv) > worst_dv) {
            worst_dv = std::abs(dv);
            where = describe(s);
        }
    }
    const double runtime = seconds_since(t0);
    const bool pass = worst_v <= 1e-8 && worst_dv <= 1e-6 && runtime < 60.0;
    return {pass, std::to_string(solved_count(grid)) + " of 81 sets have an interior boundary; max |V(x*)-1| " +
                      fmt("%.2e", worst_v) + " (tol 1e-8), max |V'(x*+)| " + fmt("%.2e", worst_dv) +
                      " (tol 1e-6) at " + where + ", runtime " + fmt("%.1f", runtime) + " s (limit 60 s)"};
}

// 3. ODE residual at 100 log-spaced points per solved set.
Outcome criterion3() {
    const auto grid = solve_grid();
    double worst = 0.0;
    std::string where;
    for (const auto& s : grid) {
        if (!s.solution) continue;
        const auto& sol = *s.solution;
        const double c = s.contract.c;
        const double hi = 10.0 * std::max({s.cir.theta, c, sol.x_star});
        for (int i = 1; i <= 100; ++i) {
            const double x = sol.x_star * std::pow(hi / sol.x_star, i / 100.0);
            const double r = std::abs(closed_form::ode_residual(sol, x)) / c;
            if (r > worst) {
                worst = r;
                where = describe(s) + " x=" + fmt("%.4g", x);
            }
        }
    }
    return {worst <= 1e-6, "max |residual|/c " + fmt("%.2e", worst) + " (tol 1e-6) over " +
                               std::to_string(solved_count(grid)) + " sets x 100 points, worst at " + where};
}

// 4. Closed form against shooting on all 81 sets.
Outcome criterion4() {
    const auto grid = solve_grid();
    double worst = 0.0;
    int agree_none = 0;
    std::vector<std::string> mismatches;
    for (const auto& s : grid) {
        std::optional<double> r_star;
        try {
            r_star = oracles::shoot_solve(s.cir, s.contract, 1e-10).r_star;
        } catch (const NoBracketError&) {
        }
        if (s.solution.has_value() != r_star.has_value()) {
            mismatches.push_back(describe(s));
            continue;
        }
        if (!r_star) {
            ++agree_none;
            continue;
        }
        worst = std::max(worst, rel(s.solution->x_star, *r_star));
    }
    std::string detail = "max |x*_cf - x*_shoot|/x* " + fmt("%.2e", worst) + " (tol 1e-6) on " +
                         std::to_string(solved_count(grid)) + " sets; both methods find no interior boundary on " +
                         std::to_string(agree_none) + " sets";
    for (const auto& m : mismatches) detail += "; existence mismatch at " + m;
    return {worst <= 1e-6 && mismatches.empty(), detail};
}

// 5. Closed form against finite differences on the primary fixture.
Outcome criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = closed_form::solve_boundary(kPrimaryCir, kPrimaryContract);
    oracles::FdConfig fine_cfg;
    fine_cfg.nodes = 2000;
    fine_cfg.x_max = 50.0 * kPrimaryCir.theta;
    oracles::FdConfig coarse_cfg = fine_cfg;
    coarse_cfg.nodes = 1000;
    const auto fine = oracles::fd_steady_state(kPrimaryCir, kPrimaryContract, fine_cfg);
    const auto coarse = oracles::fd_steady_state(kPrimaryCir, kPrimaryContract, coarse_cfg);

    const double cells = std::abs(fine.boundary - sol.x_star) / fine.dx;
    std::vector<double> xs;
    for (int j = 1; j <= 20; ++j) xs.push_back(sol.x_star * (1.0 + j / 20.0));
    double err = 0.0;
    double grid_error = 0.0;
    for (const auto& p : oracles::fd_richardson(fine, coarse, xs)) {
        err = std::max(err, std::abs(p.fine - closed_form::value(sol, p.x)));
        grid_error = std::max(grid_error, p.grid_error);
    }
    const double runtime = seconds_since(t0);
    const bool pass = fine.reached_steady && cells <= 2.0 && err <= 5.0 * grid_error && runtime < 60.0;
    return {pass, "boundary off by " + fmt("%.2f", cells) + " cells (limit 2); max profile error " +
                      fmt("%.2e", err) + " vs 5 x Richardson grid error " + fmt("%.2e", 5.0 * grid_error) +
                      " at 20 probes in (x*, 2x*]; runtime " + fmt("%.1f", runtime) + " s (limit 60 s)"};
}

// 6. Monte Carlo value and optimality probe on the primary fixture.
Outcome criterion6() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = closed_form::solve_boundary(kPrimaryCir, kPrimaryContract);
    oracles::McConfig cfg;
    cfg.paths = 100000;
    cfg.dt = 1.0 / 252.0;
    const double x0 = kPrimaryCir.theta;
    const auto mc = oracles::mc_value(kPrimaryCir, kPrimaryContract, x0, sol.x_star, cfg);
    const double v = closed_form::value(sol, x0);
    const double dev = std::abs(mc.value_estimate - v);
    const auto probe =
        oracles::mc_optimality_probe(kPrimaryCir, kPrimaryContract, x0, sol.x_star, 0.1 * sol.x_star, cfg);
    // The borrower minimizes V: neither neighbour may undercut the centre by more than 3 s.e.
    const double gain_minus = probe.center.value_estimate - probe.minus.value_estimate;
    const double gain_plus = probe.center.value_estimate - probe.plus.value_estimate;
    const double runtime = seconds_since(t0);
    const bool pass = dev <= 3.0 * mc.std_error && gain_minus <= 3.0 * probe.diff_minus_se &&
                      gain_plus <= 3.0 * probe.diff_plus_se && runtime < 120.0;
    return {pass, "MC " + fmt("%.6f", mc.value_estimate) + " vs V(theta) " + fmt("%.6f", v) + ", |diff| " +
                      fmt("%.2e", dev) + " (3 s.e. = " + fmt("%.2e", 3.0 * mc.std_error) +
                      "); probe undercut at x*-10% " + fmt("%.2e", gain_minus) + " (3 s.e. " +
                      fmt("%.2e", 3.0 * probe.diff_minus_se) + "), at x*+10% " + fmt("%.2e", gain_plus) +
                      " (3 s.e. " + fmt("%.2e", 3.0 * probe.diff_plus_se) + "); runtime " +
                      fmt("%.1f", runtime) + " s (limit 120 s)"};
}

// 7. Tail behaviour x V(x) -> c at x = 50 max(theta, c, x*).
Outcome criterion7() {
    const auto grid = solve_grid();
    double worst = 0.0;
    double best = INFINITY;
    std::string where;
    for (const auto& s : grid) {
        if (!s.solution) continue;
        const double c = s.contract.c;
        const double x = 50.0 * std::max({s.cir.theta, c, s.solution->x_star});
        const double r = std::abs(x * closed_form::value(*s.solution, x) - c) / c;
        best = std::min(best, r);
        if (r > worst) {
            worst = r;
            where = describe(s);
        }
    }
    return {worst <= 1e-3, "|x V(x) - c|/c ranges " + fmt("%.2e", best) + " .. " + fmt("%.2e", worst) +
                               " (tol 1e-3) over " + std::to_string(solved_count(grid)) +
                               " sets, worst at " + where};
}

// 8. Bounds and strict monotonicity on every solved curve.
Outcome criterion8() {
    const auto grid = solve_grid();
    int violations = 0;
    std::string where;
    for (const auto& s : grid) {
        if (!s.solution) continue;
        const auto& sol = *s.solution;
        const double hi = 10.0 * std::max({s.cir.theta, s.contract.c, sol.x_star});
        const auto curve = closed_form::sample_curve(sol, sol.x_star, hi, 101);
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
            const double v = curve.points[i].v;
            const bool ok = v > 0.0 && v <= 1.0 && (i == 0 || v < curve.points[i - 1].v);
            if (!ok) {
                ++violations;
                where = describe(s);
            }
        }
    }
    return {violations == 0, std::to_string(violations) + " violations of 0 < V <= 1 and strict decrease over " +
                                 std::to_string(solved_count(grid)) + " curves x 101 points on [x*, 10 max(theta, c, x*)]" +
                                 (where.empty() ? "" : ", last at " + where)};
}

std::pair<int, std::string> capture(const std::string& command) {
    std::string out;
    FILE* pipe = popen(command.c_str(), "r");
    if (pipe == nullptr) return {-1, ""};
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    return {status, out};
}

// 9. Byte-identical output across separate processes.
Outcome criterion9(const std::string& tool) {
    const std::string params = " --k 0.25 --theta 0.06 --sigma 0.1 --c 0.05 --seed 12345";
    const std::string solve = tool + " solve" + params + " 2>&1";
    const std::string verify = tool + " verify" + params + " --mc-paths 5000 --fd-nodes 400 2>&1";
    const auto s1 = capture(solve);
    const auto s2 = capture(solve);
    const auto v1 = capture(verify);
    const auto v2 = capture(verify);
    const bool pass = s1 == s2 && v1 == v2 && !s1.second.empty() && !v1.second.empty() && s1.first == 0;
    return {pass, "solve: " + std::to_string(s1.second.size()) + " bytes, identical " +
                      (s1 == s2 ? "yes" : "no") + "; verify (seed 12345): " + std::to_string(v1.second.size()) +
                      " bytes, identical " + (v1 == v2 ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1-9> [path-to-prepay]\n");
        return 2;
    }
    const int n = std::atoi(argv[1]);
    const std::string tool = argc > 2 ? argv[2] : "prepay";
    static const char* names[] = {"",
                                  "special-function identities",
                                  "smooth pasting",
                                  "ODE residual",
                                  "closed form vs shooting",
                                  "closed form vs finite differences",
                                  "Monte Carlo consistency",
                                  "tail behaviour",
                                  "monotonicity and bounds",
                                  "determinism"};
    if (n < 1 || n > 9) {
        std::fprintf(stderr, "unknown criterion %d\n", n);
        return 2;
    }
    const std::function<Outcome()> criteria[] = {
        criterion1, criterion2, criterion3, criterion4, criterion5,
        criterion6, criterion7, criterion8, [&] { return criterion9(tool); }};
    Outcome o;
    try {
        o = criteria[n - 1]();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s | %s\n", n, o.pass ? "PASS" : "FAIL", names[n], o.detail.c_str());
    return o.pass ? 0 : 1;
}
