#include "prepay/cli.hpp"

#include "prepay/closed_form.hpp"
#include "prepay/errors.hpp"
#include "prepay/json_writer.hpp"
#include "prepay/oracles.hpp"
#include "prepay/specfun.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

namespace prepay::cli {

namespace {

constexpr double kCorruption = 1e-3;

OutputFormat format_for(const RunConfig& config, OutputFormat fallback) {
    return config.output.value_or(fallback);
}

Json parameters_json(const RunConfig& config) {
    Json j;
    j["k"] = config.cir.k;
    j["theta"] = config.cir.theta;
    j["sigma"] = config.cir.sigma;
    j["c"] = config.contract.c;
    j["m"] = config.contract.m;
    return j;
}

Json constants_json(const DerivedConstants& k) {
    Json j;
    j["s"] = k.s;
    j["lambda"] = k.lambda;
    j["p"] = k.p;
    j["alpha"] = k.alpha;
    j["gamma"] = k.gamma;
    j["a"] = k.a_exp;
    return j;
}

// Validates the configuration and solves the normalized (m = c) problem.
closed_form::SteadyStateSolution solve(const RunConfig& config) {
    validate(config.cir);
    validate(config.contract);
    const ContractParams normalized{config.contract.c, config.contract.c};
    auto sol = closed_form::solve_boundary(config.cir, normalized, config.tol_root, config.tol_quad);
    if (!config.corrupt.empty()) {
        DerivedConstants& k = sol.consts;
        const double f = 1.0 + kCorruption;
        if (config.corrupt == "s") k.s *= f;
        else if (config.corrupt == "lambda") k.lambda *= f;
        else if (config.corrupt == "p") k.p *= f;
        else if (config.corrupt == "alpha") k.alpha *= f;
        else if (config.corrupt == "gamma") k.gamma *= f;
        else if (config.corrupt == "a") k.a_exp *= f;
        else throw ValidationError("corrupt", "unknown constant '" + config.corrupt + "'");
    }
    return sol;
}

double value_scale(const RunConfig& config) { return config.contract.m / config.contract.c; }

int report_error(const std::exception& e, std::ostream& err) {
    Json body;
    int code = kExitConvergence;
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
        code = kExitValidation;
        body["type"] = "validation";
        body["field"] = v->field();
    } else if (const auto* nb = dynamic_cast<const NoBracketError*>(&e)) {
        code = kExitNoBracket;
        body["type"] = "no_bracket";
        body["samples"] = nb->samples().size();
    } else if (const auto* ce = dynamic_cast<const ConvergenceError*>(&e)) {
        body["type"] = "convergence";
        body["iterations"] = ce->trace().size();
    } else if (const auto* q = dynamic_cast<const QuadratureError*>(&e)) {
        body["type"] = "quadrature";
        body["error_estimate"] = q->error_estimate();
    } else if (dynamic_cast<const Error*>(&e) != nullptr) {
        body["type"] = "numerical";
    } else {
        body["type"] = "internal";
    }
    body["message"] = e.what();
    Json j;
    j["error"] = body;
    err << to_json_text(j, 0);
    return code;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const std::exception& e) {
        return report_error(e, err);
    }
}

// ---------------------------------------------------------------------------
// verify

struct Check {
    std::string name;
    std::string status;  // pass | fail | skipped
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

class CheckList {
public:
    void add(std::string name, double value, double tolerance, std::string detail = {}) {
        const bool ok = std::isfinite(value) && value <= tolerance;
        checks_.push_back({std::move(name), ok ? "pass" : "fail", value, tolerance, std::move(detail)});
    }

    // Runs `body`, which adds its own checks; an exception fails `name`.
    void guard(const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            checks_.push_back({name, "fail", std::nan(""), 0.0, e.what()});
        }
    }

    void skip(std::string name, std::string why) {
        checks_.push_back({std::move(name), "skipped", std::nan(""), 0.0, std::move(why)});
    }

    [[nodiscard]] bool all_passed() const {
        return std::none_of(checks_.begin(), checks_.end(),
                            [](const Check& c) { return c.status == "fail"; });
    }

    [[nodiscard]] Json to_json() const {
        Json arr = Json::array();
        for (const auto& c : checks_) {
            Json j;
            j["name"] = c.name;
            j["status"] = c.status;
            j["value"] = c.value;
            j["tolerance"] = c.tolerance;
            j["margin"] = c.tolerance - c.value;
            if (!c.detail.empty()) j["detail"] = c.detail;
            arr.push_back(j);
        }
        return arr;
    }

    [[nodiscard]] const std::vector<Check>& checks() const { return checks_; }

private:
    std::vector<Check> checks_;
};

double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<double> fd_probe_points(double x_star) {
    std::vector<double> xs;
    for (int j = 1; j <= 20; ++j) xs.push_back(x_star * (1.0 + j / 20.0));
    return xs;
}

void specfun_checks(CheckList& list, const DerivedConstants& k) {
    using specfun::HypergeometricParams;
    list.guard("specfun.identities", [&] {
        list.add("specfun.m_1_2_1", rel_diff(specfun::kummer_m({1.0, 2.0}, 1.0), std::exp(1.0) - 1.0),
                 1e-10, "M(1,2,1) = e - 1");
        const double z = 1.7;
        list.add("specfun.u_a_a1", rel_diff(specfun::tricomi_u({k.alpha, k.alpha + 1.0}, z),
                                            std::pow(z, -k.alpha)),
                 1e-10, "U(a,a+1,z) = z^-a at a = alpha");
        list.add("specfun.m_at_zero", std::abs(specfun::kummer_m(k.hypergeometric(), 0.0) - 1.0), 1e-10,
                 "M(alpha,gamma,0) = 1");
        list.add("specfun.gamma_half",
                 rel_diff(std::exp(specfun::log_gamma(0.5)), std::sqrt(std::numbers::pi)), 1e-10,
                 "Gamma(1/2) = sqrt(pi)");
    });
    list.guard("specfun.wronskian", [&] {
        const HypergeometricParams hp = k.hypergeometric();
        double worst = 0.0;
        for (int i = 0; i < 25; ++i) {
            const double z = 0.1 * std::pow(500.0, i / 24.0);
            const double w = specfun::kummer_m(hp, z) * specfun::tricomi_u_prime(hp, z) -
                             specfun::kummer_m_prime(hp, z) * specfun::tricomi_u(hp, z);
            worst = std::max(worst, rel_diff(w, specfun::wronskian_mu(hp, z)));
        }
        list.add("specfun.wronskian", worst, 1e-8, "max relative error on 25 points in [0.1, 50]");
    });
}

void model_checks(CheckList& list, const CirParams& cir, const DerivedConstants& k) {
    const double var = cir.sigma * cir.sigma;
    list.add("model.lambda_characteristic",
             std::abs(0.5 * var * k.lambda * k.lambda - cir.k * k.lambda - 1.0), 1e-12,
             "sigma^2 lambda^2 / 2 - k lambda - 1 = 0");
    list.add("model.s_definition", rel_diff(k.s * k.s, cir.k * cir.k + 2.0 * var), 1e-12);
    list.add("model.p_definition", rel_diff(k.p, 2.0 * k.s / var), 1e-12);
    list.add("model.gamma_definition", rel_diff(k.gamma, 2.0 * cir.k * cir.theta / var), 1e-12);
    list.add("model.alpha_definition",
             rel_diff(k.alpha, cir.k * cir.theta / var * (1.0 - cir.k / k.s)), 1e-12);
    list.add("model.a_definition", rel_diff(k.a_exp, -k.lambda / k.p), 1e-12);
}

void closed_form_checks(CheckList& list, const closed_form::SteadyStateSolution& sol) {
    const double c = sol.contract.c;
    const double x_star = sol.x_star;
    list.guard("closed_form.smooth_pasting", [&] {
        const auto [v, dv] = closed_form::continuation_value(sol, x_star);
        list.add("closed_form.value_at_boundary", std::abs(v - 1.0), 1e-8, "|V(x*) - 1|");
        list.add("closed_form.derivative_at_boundary", std::abs(dv), 1e-6, "|V'(x*+)|");
    });
    const double x_hi = 10.0 * std::max({sol.cir.theta, c, x_star});
    list.guard("closed_form.ode_residual", [&] {
        double worst = 0.0;
        for (int i = 1; i <= 100; ++i) {
            const double x = x_star * std::pow(x_hi / x_star, i / 100.0);
            worst = std::max(worst, std::abs(closed_form::ode_residual(sol, x)));
        }
        list.add("closed_form.ode_residual", worst, 1e-6 * c,
                 "max |L V + c| at 100 log-spaced x in (x*, 10 max(theta, c, x*)]");
    });
    list.guard("closed_form.bounds_monotone", [&] {
        int violations = 0;
        double prev = closed_form::value(sol, x_star);
        for (int i = 1; i <= 100; ++i) {
            const double x = x_star * std::pow(x_hi / x_star, i / 100.0);
            const double v = closed_form::value(sol, x);
            if (!(v > 0.0 && v <= 1.0 && v < prev)) ++violations;
            prev = v;
        }
        list.add("closed_form.bounds_monotone", violations, 0.0,
                 "points violating 0 < V <= 1 or strict decrease");
    });
}

void shooting_checks(CheckList& list, const RunConfig& config,
                     const closed_form::SteadyStateSolution& sol) {
    list.guard("oracles.shooting_boundary", [&] {
        const auto report = oracles::shoot_solve(config.cir, sol.contract, 1e-10);
        list.add("oracles.shooting_boundary", rel_diff(sol.x_star, report.r_star), 1e-6,
                 "|x*_cf - r*_shoot| / r*");
    });
}

void fd_checks(CheckList& list, const RunConfig& config, const closed_form::SteadyStateSolution& sol) {
    list.guard("oracles.fd", [&] {
        oracles::FdConfig fine_cfg;
        fine_cfg.nodes = config.fd_nodes;
        oracles::FdConfig coarse_cfg = fine_cfg;
        coarse_cfg.nodes = config.fd_nodes / 2;
        const auto fine = oracles::fd_steady_state(config.cir, sol.contract, fine_cfg);
        const auto coarse = oracles::fd_steady_state(config.cir, sol.contract, coarse_cfg);

        list.add("oracles.fd_steady", fine.reached_steady ? 0.0 : 1.0, 0.0,
                 "max-norm change per step reached 1e-10 before tau_max");
        list.add("oracles.fd_boundary_cells", std::abs(fine.boundary - sol.x_star) / fine.dx, 2.0,
                 "|h_fd - x*| in grid cells");

        const auto probes = oracles::fd_richardson(fine, coarse, fd_probe_points(sol.x_star));
        double err_fine = 0.0;
        double err_coarse = 0.0;
        double grid_error = 0.0;
        for (const auto& p : probes) {
            const double v = closed_form::value(sol, p.x);
            err_fine = std::max(err_fine, std::abs(p.fine - v));
            err_coarse = std::max(err_coarse, std::abs(p.coarse - v));
            grid_error = std::max(grid_error, p.grid_error);
        }
        list.add("oracles.fd_profile", err_fine, 5.0 * grid_error,
                 "max |V_fd - V| over 20 probes in (x*, 2x*] vs 5x Richardson grid error");
        const double order = err_coarse / err_fine;
        list.add("oracles.fd_refinement_order", std::abs(order - 4.25), 1.75,
                 "coarse/fine error ratio " + csv_number(order) + " must lie in [2.5, 6]");

        int violations = 0;
        const double obstacle = balance(sol.contract, fine.tau_final);
        for (std::size_t i = 0; i < fine.v_steady.size(); ++i) {
            const double v = fine.v_steady[i];
            if (v < 0.0 || v > obstacle) ++violations;
            if (i > 0 && v > fine.v_steady[i - 1] + 1e-12) ++violations;
        }
        list.add("oracles.fd_comparison_principle", violations, 0.0,
                 "nodes violating 0 <= V <= obstacle or monotone decrease");
        const double h0 = oracles::fd_boundary_at(fine, 0.01 / config.cir.k);
        list.add("oracles.fd_initial_boundary", std::abs(h0 - sol.contract.c) / sol.contract.c, 0.2,
                 "relative distance of h at tau = 0.01/k from c");
    });
}

void mc_checks(CheckList& list, const RunConfig& config, const closed_form::SteadyStateSolution& sol) {
    list.guard("oracles.mc", [&] {
        oracles::McConfig mc;
        mc.paths = config.mc_paths;
        mc.dt = config.mc_dt;
        mc.max_step = std::max(mc.max_step, mc.dt);
        mc.seed = config.seed;
        const double x0 = config.cir.theta;
        const auto r = oracles::mc_value(config.cir, sol.contract, x0, sol.x_star, mc);
        const double v = closed_form::value(sol, x0);
        list.add("oracles.mc_value", std::abs(r.value_estimate - v), 3.0 * r.std_error,
                 "|V_mc(theta) - V(theta)| vs 3 standard errors");
        const auto probe =
            oracles::mc_optimality_probe(config.cir, sol.contract, x0, sol.x_star, 0.1 * sol.x_star, mc);
        // The borrower minimizes V; a perturbed boundary must not come out cheaper.
        list.add("oracles.mc_optimality_minus", probe.center.value_estimate - probe.minus.value_estimate,
                 3.0 * probe.diff_minus_se, "V(x* - 0.1x*) may undercut V(x*) by at most 3 s.e.");
        list.add("oracles.mc_optimality_plus", probe.center.value_estimate - probe.plus.value_estimate,
                 3.0 * probe.diff_plus_se, "V(x* + 0.1x*) may undercut V(x*) by at most 3 s.e.");
    });
}

void check_skip_names(const RunConfig& config) {
    for (const auto& s : config.skip) {
        if (s != "shooting" && s != "fd" && s != "mc") {
            throw ValidationError("skip", "unknown oracle '" + s + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// compare

struct Row {
    std::string method;
    std::string quantity;
    double x;
    double estimate;
    double reference;
    double tolerance;
    std::string status;
};

}  // namespace

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(
        [&] {
            const auto sol = solve(config);
            Json j;
            j["command"] = "solve";
            j["parameters"] = parameters_json(config);
            j["feller"] = config.cir.feller();
            j["constants"] = constants_json(sol.consts);
            j["z_star"] = sol.z_star;
            j["x_star"] = sol.x_star;
            j["c1"] = sol.c1;
            j["c2"] = sol.c2;
            j["c2_scaled"] = sol.c2_scaled;
            j["value_scale"] = value_scale(config);
            Json root;
            root["tol"] = sol.tol;
            root["tol_quad"] = sol.quad_tol;
            root["iterations"] = sol.iterations;
            root["bracket_z"] = Json::array({sol.bracket.first, sol.bracket.second});
            j["root"] = root;
            Json diag;
            diag["value_residual"] = sol.diagnostics.value_residual;
            diag["derivative_residual"] = sol.diagnostics.derivative_residual;
            diag["boundary_residual"] = sol.diagnostics.boundary_residual;
            j["diagnostics"] = diag;
            if (format_for(config, OutputFormat::json) == OutputFormat::json) {
                out << to_json_text(j);
            } else {
                out << "field,value\n";
                for (const char* key : {"z_star", "x_star", "c1", "c2", "c2_scaled", "value_scale"}) {
                    out << key << ',' << csv_number(j[key].get<double>()) << '\n';
                }
            }
            return static_cast<int>(kExitOk);
        },
        err);
}

int cmd_curve(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(
        [&] {
            const auto sol = solve(config);
            const double lo = config.x_min.value_or(sol.x_star);
            const double hi =
                config.x_max.value_or(10.0 * std::max({config.cir.theta, config.contract.c, sol.x_star}));
            const auto curve = closed_form::sample_curve(sol, lo, hi, config.points);
            const double scale = value_scale(config);
            if (format_for(config, OutputFormat::csv) == OutputFormat::csv) {
                out << "x,v,ode_residual\n";
                for (const auto& p : curve.points) {
                    out << csv_number(p.x) << ',' << csv_number(scale * p.v) << ','
                        << csv_number(scale * p.ode_residual) << '\n';
                }
            } else {
                Json j;
                j["command"] = "curve";
                j["parameters"] = parameters_json(config);
                j["x_star"] = sol.x_star;
                Json rows = Json::array();
                for (const auto& p : curve.points) {
                    Json r;
                    r["x"] = p.x;
                    r["v"] = scale * p.v;
                    r["ode_residual"] = scale * p.ode_residual;
                    rows.push_back(r);
                }
                j["points"] = rows;
                out << to_json_text(j);
            }
            return static_cast<int>(kExitOk);
        },
        err);
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(
        [&] {
            check_skip_names(config);
            const auto sol = solve(config);
            CheckList list;
            specfun_checks(list, sol.consts);
            model_checks(list, config.cir, sol.consts);
            closed_form_checks(list, sol);
            if (config.skip.count("shooting")) {
                list.skip("oracles.shooting_boundary", "skipped by --skip shooting");
            } else {
                shooting_checks(list, config, sol);
            }
            if (config.skip.count("fd")) {
                list.skip("oracles.fd", "skipped by --skip fd");
            } else {
                fd_checks(list, config, sol);
            }
            if (config.skip.count("mc")) {
                list.skip("oracles.mc", "skipped by --skip mc");
            } else {
                mc_checks(list, config, sol);
            }

            Json j;
            j["command"] = "verify";
            j["parameters"] = parameters_json(config);
            j["x_star"] = sol.x_star;
            j["seed"] = config.seed;
            j["passed"] = list.all_passed();
            Json failed = Json::array();
            for (const auto& c : list.checks()) {
                if (c.status == "fail") failed.push_back(c.name);
            }
            j["failed"] = failed;
            j["checks"] = list.to_json();
            if (format_for(config, OutputFormat::json) == OutputFormat::json) {
                out << to_json_text(j);
            } else {
                out << "name,status,value,tolerance,margin\n";
                for (const auto& c : list.checks()) {
                    out << c.name << ',' << c.status << ',' << csv_number(c.value) << ','
                        << csv_number(c.tolerance) << ',' << csv_number(c.tolerance - c.value) << '\n';
                }
            }
            return static_cast<int>(list.all_passed() ? kExitOk : kExitCheckFailed);
        },
        err);
}

int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(
        [&] {
            check_skip_names(config);
            const auto sol = solve(config);
            const double scale = value_scale(config);
            std::vector<Row> rows;
            auto judged = [](std::string method, std::string quantity, double x, double est,
                             double ref, double tol) {
                const bool ok = std::abs(est - ref) <= tol;
                return Row{std::move(method), std::move(quantity), x, est, ref, tol, ok ? "PASS" : "FAIL"};
            };
            rows.push_back({"closed_form", "boundary", sol.x_star, sol.x_star, sol.x_star, 0.0, "REFERENCE"});

            if (!config.skip.count("shooting")) {
                const auto sh = oracles::shoot_solve(config.cir, sol.contract, 1e-10);
                rows.push_back(judged("shooting", "boundary", sh.r_star, sh.r_star, sol.x_star,
                                      1e-6 * sh.r_star));
            }
            const std::vector<double> value_probes{1.25 * sol.x_star, 1.5 * sol.x_star, 2.0 * sol.x_star,
                                                   config.cir.theta};
            if (!config.skip.count("fd")) {
                oracles::FdConfig fine_cfg;
                fine_cfg.nodes = config.fd_nodes;
                oracles::FdConfig coarse_cfg = fine_cfg;
                coarse_cfg.nodes = config.fd_nodes / 2;
                const auto fine = oracles::fd_steady_state(config.cir, sol.contract, fine_cfg);
                const auto coarse = oracles::fd_steady_state(config.cir, sol.contract, coarse_cfg);
                rows.push_back(judged("finite_difference", "boundary", fine.boundary, fine.boundary,
                                      sol.x_star, 2.0 * fine.dx));
                const auto probes = oracles::fd_richardson(fine, coarse, value_probes);
                double grid_error = 0.0;
                for (const auto& p : probes) grid_error = std::max(grid_error, p.grid_error);
                for (const auto& p : probes) {
                    rows.push_back(judged("finite_difference", "value", p.x, scale * p.fine,
                                          scale * closed_form::value(sol, p.x), scale * 5.0 * grid_error));
                }
            }
            if (!config.skip.count("mc")) {
                oracles::McConfig mc;
                mc.paths = config.mc_paths;
                mc.dt = config.mc_dt;
                mc.max_step = std::max(mc.max_step, mc.dt);
                mc.seed = config.seed;
                const double x0 = config.cir.theta;
                const auto r = oracles::mc_value(config.cir, sol.contract, x0, sol.x_star, mc);
                rows.push_back(judged("monte_carlo", "value", x0, scale * r.value_estimate,
                                      scale * closed_form::value(sol, x0), scale * 3.0 * r.std_error));
            }

            const bool ok = std::none_of(rows.begin(), rows.end(),
                                         [](const Row& r) { return r.status == "FAIL"; });
            if (format_for(config, OutputFormat::json) == OutputFormat::json) {
                Json j;
                j["command"] = "compare";
                j["parameters"] = parameters_json(config);
                j["seed"] = config.seed;
                Json arr = Json::array();
                for (const auto& r : rows) {
                    Json e;
                    e["method"] = r.method;
                    e["quantity"] = r.quantity;
                    e["x"] = r.x;
                    e["estimate"] = r.estimate;
                    e["reference"] = r.reference;
                    e["difference"] = r.estimate - r.reference;
                    e["tolerance"] = r.tolerance;
                    e["status"] = r.status;
                    arr.push_back(e);
                }
                j["rows"] = arr;
                j["agree"] = ok;
                out << to_json_text(j);
            } else {
                out << "method,quantity,x,estimate,reference,difference,tolerance,status\n";
                for (const auto& r : rows) {
                    out << r.method << ',' << r.quantity << ',' << csv_number(r.x) << ','
                        << csv_number(r.estimate) << ',' << csv_number(r.reference) << ','
                        << csv_number(r.estimate - r.reference) << ',' << csv_number(r.tolerance) << ','
                        << r.status << '\n';
                }
            }
            return static_cast<int>(ok ? kExitOk : kExitCheckFailed);
        },
        err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Steady-state mortgage prepayment boundary under CIR rates", "prepay"};
    app.require_subcommand(1);

    RunConfig config;
    std::optional<double> m;
    std::string output;
    std::vector<std::string> skip;

    auto add_options = [&](CLI::App* sub) {
        sub->add_option("--k", config.cir.k, "mean-reversion speed (1/year)")->required();
        sub->add_option("--theta", config.cir.theta, "long-run rate (1/year)")->required();
        sub->add_option("--sigma", config.cir.sigma, "rate volatility")->required();
        sub->add_option("--c", config.contract.c, "contract rate (1/year)")->required();
        sub->add_option("--m", m, "payment rate; defaults to c");
        sub->add_option("--tol-root", config.tol_root, "relative root tolerance")->capture_default_str();
        sub->add_option("--tol-quad", config.tol_quad, "relative quadrature tolerance")->capture_default_str();
        sub->add_option("--x-min", config.x_min, "curve start");
        sub->add_option("--x-max", config.x_max, "curve end");
        sub->add_option("--points", config.points, "curve points")->capture_default_str();
        sub->add_option("--fd-nodes", config.fd_nodes, "finite-difference nodes")->capture_default_str();
        sub->add_option("--mc-paths", config.mc_paths, "Monte Carlo paths")->capture_default_str();
        sub->add_option("--mc-dt", config.mc_dt, "Monte Carlo step near the boundary (years)")
            ->capture_default_str();
        sub->add_option("--seed", config.seed, "Monte Carlo seed")->capture_default_str();
        sub->add_option("--output", output, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--skip", skip, "oracle to skip: shooting, fd or mc")
            ->check(CLI::IsMember({"shooting", "fd", "mc"}));
        sub->add_option("--corrupt-constant", config.corrupt)
            ->check(CLI::IsMember({"s", "lambda", "p", "alpha", "gamma", "a"}))
            ->group("");
    };
    CLI::App* solve_cmd = app.add_subcommand("solve", "free boundary and diagnostics as JSON");
    CLI::App* curve_cmd = app.add_subcommand("curve", "value curve as CSV");
    CLI::App* verify_cmd = app.add_subcommand("verify", "run every invariant check");
    CLI::App* compare_cmd = app.add_subcommand("compare", "closed form against the oracles");
    for (CLI::App* sub : {solve_cmd, curve_cmd, verify_cmd, compare_cmd}) add_options(sub);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        Json body;
        body["type"] = "validation";
        body["field"] = "arguments";
        body["message"] = e.what();
        Json j;
        j["error"] = body;
        err << to_json_text(j, 0);
        return kExitValidation;
    }

    config.contract.m = m.value_or(config.contract.c);
    if (!output.empty()) config.output = output == "csv" ? OutputFormat::csv : OutputFormat::json;
    config.skip.insert(skip.begin(), skip.end());

    auto check_ranges = [&] {
        if (config.points < 2) throw ValidationError("points", "need at least 2 points");
        if (config.fd_nodes < 16) throw ValidationError("fd_nodes", "need at least 16 nodes");
        if (config.mc_paths < 2) throw ValidationError("mc_paths", "need at least 2 paths");
        if (!(config.mc_dt > 0.0)) throw ValidationError("mc_dt", "dt must be positive");
        return static_cast<int>(kExitOk);
    };
    if (const int rc = guarded(check_ranges, err); rc != kExitOk) return rc;

    if (solve_cmd->parsed()) return cmd_solve(config, out, err);
    if (curve_cmd->parsed()) return cmd_curve(config, out, err);
    if (verify_cmd->parsed()) return cmd_verify(config, out, err);
    return cmd_compare(config, out, err);
}

}  // namespace prepay::cli
