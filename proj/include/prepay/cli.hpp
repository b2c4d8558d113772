#pragma once

#include "prepay/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace prepay::cli {

enum class OutputFormat { json, csv };

/// Exit codes of every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitNoBracket = 3,
    kExitConvergence = 4,
    kExitCheckFailed = 5,
};

struct RunConfig {
    CirParams cir{0.0, 0.0, 0.0};
    ContractParams contract{0.0, 0.0};
    double tol_root = 1e-12;
    double tol_quad = 1e-13;
    std::optional<double> x_min;  ///< curve range; defaults to [x*, 10 max(theta, c, x*)]
    std::optional<double> x_max;
    int points = 101;
    int fd_nodes = 2000;
    int mc_paths = 100000;
    double mc_dt = 1.0 / 252.0;
    std::uint64_t seed = 20240601;
    std::optional<OutputFormat> output;  ///< csv for curve, json otherwise
    std::set<std::string> skip;          ///< subset of {shooting, fd, mc}
    std::string corrupt;                 ///< test hook: derived constant to perturb after solving
};

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_curve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses `args` (without the program name) and dispatches to a subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prepay::cli
