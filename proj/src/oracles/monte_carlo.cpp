#include "prepay/errors.hpp"
#include "prepay/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <thread>

namespace prepay::oracles {

namespace {

// Standard deviations of one step's rate move that must separate the rate from the
// highest tracked boundary before the step may grow beyond dt.
constexpr double kStepMargin = 6.0;
constexpr std::size_t kMaxBoundaries = 3;

// Exact draw from the CIR transition density over a step of length h.
class CirSampler {
public:
    explicit CirSampler(const CirParams& cir) : cir_(cir), dof_(4.0 * cir.k * cir.theta / (cir.sigma * cir.sigma)) {}

    template <typename Rng>
    double draw(double x, double h, Rng& rng) {
        const double decay = std::exp(-cir_.k * h);
        const double scale = cir_.sigma * cir_.sigma * (-std::expm1(-cir_.k * h)) / (4.0 * cir_.k);
        const double nc = x * decay / scale;
        if (dof_ > 1.0) {
            // chi'^2_d(nc) = (Z + sqrt(nc))^2 + chi^2_{d-1}
            const double z = normal_(rng) + std::sqrt(nc);
            return scale * (z * z + 2.0 * central_(rng));
        }
        std::poisson_distribution<long long> poisson(0.5 * nc);
        const long long j = nc > 0.0 ? poisson(rng) : 0;
        std::gamma_distribution<double> g(0.5 * dof_ + static_cast<double>(j), 1.0);
        return scale * 2.0 * g(rng);
    }

private:
    CirParams cir_;
    double dof_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::gamma_distribution<double> central_{0.5 * std::max(dof_ - 1.0, 1e-300), 1.0};
};

struct PathResult {
    std::array<double, kMaxBoundaries> value{};
    bool truncated = false;
};

struct Simulation {
    std::vector<std::array<double, kMaxBoundaries>> values;
    long long truncated = 0;
};

void check_config(const McConfig& config, double x0) {
    if (!(x0 > 0.0)) throw ValidationError("x0", "mc_value: x0 must be positive");
    if (config.paths < 1) throw ValidationError("mc_paths", "mc_value: need at least one path");
    if (!(config.dt > 0.0)) throw ValidationError("mc_dt", "mc_value: dt must be positive");
    if (!(config.horizon >= config.dt)) {
        throw ValidationError("horizon", "mc_value: horizon must be at least dt");
    }
    if (!(config.max_step >= config.dt)) {
        throw ValidationError("max_step", "mc_value: max_step must be at least dt");
    }
}

PathResult simulate_path(const CirParams& cir, const ContractParams& contract, double x0,
                         const std::array<double, kMaxBoundaries>& boundaries, std::size_t nb,
                         const McConfig& config, std::uint64_t path_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32)};
    std::mt19937_64 rng(seq);
    CirSampler sampler(cir);

    const double payoff = contract.m / contract.c;
    PathResult out;
    std::array<bool, kMaxBoundaries> alive{};
    std::size_t n_alive = 0;
    for (std::size_t j = 0; j < nb; ++j) {
        alive[j] = x0 > boundaries[j];
        if (alive[j]) {
            ++n_alive;
        } else {
            out.value[j] = payoff;
        }
    }

    double x = x0;
    double discount = 1.0;
    double paid = 0.0;
    double t = 0.0;
    const double noise = kStepMargin * cir.sigma;
    while (n_alive > 0) {
        double b_hi = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            if (alive[j]) b_hi = std::max(b_hi, boundaries[j]);
        }
        const double gap = (x - b_hi) / (noise * std::sqrt(x));
        double h = std::clamp(gap * gap, config.dt, config.max_step);
        h = std::min(h, config.horizon - t);

        const double x1 = sampler.draw(x, h, rng);
        const double d1 = discount * std::exp(-0.5 * (x + x1) * h);
        paid += contract.m * 0.5 * (discount + d1) * h;
        t += h;
        for (std::size_t j = 0; j < nb; ++j) {
            if (alive[j] && x1 <= boundaries[j]) {
                out.value[j] = paid + d1 * payoff;
                alive[j] = false;
                --n_alive;
            }
        }
        x = x1;
        discount = d1;
        if (n_alive > 0 && (discount < config.discount_floor || t >= config.horizon)) {
            for (std::size_t j = 0; j < nb; ++j) {
                if (alive[j]) out.value[j] = paid;
            }
            out.truncated = true;
            break;
        }
    }
    return out;
}

Simulation simulate(const CirParams& cir, const ContractParams& contract, double x0,
                    const std::array<double, kMaxBoundaries>& boundaries, std::size_t nb,
                    const McConfig& config) {
    Simulation sim;
    sim.values.resize(static_cast<std::size_t>(config.paths));
    std::vector<char> truncated(sim.values.size(), 0);

    unsigned workers = config.workers > 0 ? static_cast<unsigned>(config.workers)
                                          : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(config.paths));
    auto run = [&](unsigned w) {
        for (std::size_t i = w; i < sim.values.size(); i += workers) {
            const PathResult r = simulate_path(cir, contract, x0, boundaries, nb, config, i);
            sim.values[i] = r.value;
            truncated[i] = r.truncated ? 1 : 0;
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& th : pool) th.join();
    }
    for (char c : truncated) sim.truncated += c;
    return sim;
}

McReport summarize(const Simulation& sim, std::size_t j, double x0, double boundary,
                   const McConfig& config) {
    const double n = static_cast<double>(sim.values.size());
    double mean = 0.0;
    for (const auto& v : sim.values) mean += v[j];
    mean /= n;
    double ss = 0.0;
    for (const auto& v : sim.values) ss += (v[j] - mean) * (v[j] - mean);
    McReport r;
    r.x0 = x0;
    r.boundary_used = boundary;
    r.value_estimate = mean;
    r.std_error = sim.values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    r.paths = static_cast<int>(sim.values.size());
    r.dt = config.dt;
    r.horizon = config.horizon;
    r.seed = config.seed;
    r.truncated_paths = sim.truncated;
    return r;
}

double difference_std_error(const Simulation& sim, std::size_t i, std::size_t j) {
    const double n = static_cast<double>(sim.values.size());
    if (sim.values.size() < 2) return 0.0;
    double mean = 0.0;
    for (const auto& v : sim.values) mean += v[i] - v[j];
    mean /= n;
    double ss = 0.0;
    for (const auto& v : sim.values) ss += (v[i] - v[j] - mean) * (v[i] - v[j] - mean);
    return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

McReport mc_value(const CirParams& cir, const ContractParams& contract, double x0,
                  double boundary, const McConfig& config) {
    validate(cir);
    validate(contract);
    check_config(config, x0);
    if (!(boundary >= 0.0)) throw ValidationError("boundary", "mc_value: boundary must be nonnegative");
    const Simulation sim = simulate(cir, contract, x0, {boundary, 0.0, 0.0}, 1, config);
    return summarize(sim, 0, x0, boundary, config);
}

OptimalityProbe mc_optimality_probe(const CirParams& cir, const ContractParams& contract,
                                    double x0, double boundary, double delta,
                                    const McConfig& config) {
    validate(cir);
    validate(contract);
    check_config(config, x0);
    if (!(delta >= 0.0) || !(boundary - delta > 0.0)) {
        throw ValidationError("delta", "mc_optimality_probe: need 0 <= delta < boundary");
    }
    const std::array<double, kMaxBoundaries> b{boundary - delta, boundary, boundary + delta};
    const Simulation sim = simulate(cir, contract, x0, b, 3, config);
    OptimalityProbe probe;
    probe.minus = summarize(sim, 0, x0, b[0], config);
    probe.center = summarize(sim, 1, x0, b[1], config);
    probe.plus = summarize(sim, 2, x0, b[2], config);
    probe.diff_minus_se = difference_std_error(sim, 0, 1);
    probe.diff_plus_se = difference_std_error(sim, 2, 1);
    return probe;
}

}  // namespace prepay::oracles
