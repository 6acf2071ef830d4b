// This file is part of tcavar, a C++ library for computing risk-averse
// policies of transient total-cost Markov decision processes.
//
// MIT License
//
// Permission is hereby granted, free of charge, to any person obtaining a copy
// of this software and associated documentation files (the "Software"), to deal
// in the Software without restriction, including without limitation the rights
// to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
// copies of the Software, and to permit persons to whom the Software is
// furnished to do so, subject to the following conditions:
//
// The above copyright notice and this permission notice shall be included in
// all copies or substantial portions of the Software.
//
// THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
// IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
// FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
// AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
// LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
// OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
// SOFTWARE.

#pragma once

// Command implementations behind the tcavar executable. Each command writes
// its report to `out` and returns the process exit code.

#include "tcavar/io.hpp"
#include "tcavar/tcavar.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tcavar::cli {

enum ExitCode : int {
    kOk = 0,
    kUnexpected = 1,
    kInvalidInput = 2,
    kAssumptionViolated = 3,
    kLpFailure = 4,
    kPolicyCoverage = 5,
};

struct RunConfig {
    std::string command;
    std::string input;
    double tau = 0.95;
    std::optional<double> epsilon;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> levels; // N'
    std::size_t stride = 1;
    std::size_t runs = 1000;
    std::uint64_t seed = 1;
    std::optional<double> deadline;
    std::string out = "tcavar";
    std::string policy;
    std::vector<double> taus;
    std::optional<std::string> gamma_method; // "exact" or "safe"
    unsigned threads = 0;
};

/// Thrown for bad command-line combinations; reported as invalid input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using io::format_number;

struct Checked {
    Mdp mdp;
    CostBounds bounds;
    GammaEstimate gamma;
};

inline GammaMethod gamma_method(const RunConfig& cfg, const Mdp& mdp) {
    if (!cfg.gamma_method) return default_gamma_method(mdp);
    if (*cfg.gamma_method == "exact") return GammaMethod::ExactEnumeration;
    if (*cfg.gamma_method == "safe") return GammaMethod::SafeLowerBound;
    throw ConfigError("--gamma must be 'exact' or 'safe'");
}

/// Validation shared by every command. Returns an exit code on failure.
inline std::optional<int> check_model(const RunConfig& cfg, const Mdp& mdp, std::ostream& out, Checked& result,
                                      bool verbose) {
    const auto violations = validate(mdp);
    if (!violations.empty()) {
        bool structural = false;
        for (const auto& v : violations) {
            out << "violation [" << to_string(v.kind) << "]: " << v.message << '\n';
            structural = structural || !is_assumption_violation(v);
        }
        return structural ? kInvalidInput : kAssumptionViolated;
    }
    const auto reach = check_reachability(mdp);
    if (!reach.satisfied) {
        out << "violation [reachability]: the absorbing state can be avoided forever from";
        for (auto x : reach.avoid_set) out << ' ' << mdp.state_names[x];
        out << '\n';
        return kAssumptionViolated;
    }
    result.mdp = mdp;
    result.bounds = cost_bounds(mdp);
    result.gamma = compute_gamma(mdp, gamma_method(cfg, mdp));
    if (verbose) {
        out << "states: " << mdp.size() << " (absorbing " << mdp.state_names[mdp.absorbing] << ")\n";
        out << "cost bounds: k_lower=" << format_number(result.bounds.k_lower)
            << " k_upper=" << format_number(result.bounds.k_upper) << '\n';
        out << "reachability: satisfied\n";
    }
    return std::nullopt;
}

inline std::size_t resolve_horizon(const RunConfig& cfg, const Checked& c) {
    if (cfg.epsilon.has_value() == cfg.horizon.has_value())
        throw ConfigError("give exactly one of --epsilon and --horizon");
    if (cfg.horizon) return *cfg.horizon;
    return choose_horizon(c.bounds, c.mdp.size(), c.gamma.value, cfg.tau, *cfg.epsilon);
}

inline std::size_t resolve_levels(const RunConfig& cfg, const CostBounds& b, std::size_t d) {
    if (cfg.levels) {
        if (*cfg.levels == 0) throw ConfigError("--levels must be positive");
        return *cfg.levels;
    }
    // the largest admissible step: ζ = K̲
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tcavar::detail::snap(d * b.k_upper / b.k_lower))));
}

struct Solved {
    std::size_t d = 0;
    Discretization disc;
    OccupancySolution solution;
    AugmentedPolicy policy;
    double gap = 0.0;
    std::size_t augmented_states = 0;
};

inline Solved solve_model(const RunConfig& cfg, const Checked& c, double tau) {
    require_level(tau);
    Solved s;
    RunConfig at = cfg;
    at.tau = tau;
    s.d = resolve_horizon(at, c);
    s.disc = discretization_step(c.bounds, s.d, resolve_levels(cfg, c.bounds, s.d));
    const auto aug = build_augmented(c.mdp, s.disc);
    s.augmented_states = aug.size();
    const auto lp = build_lp(aug);
    s.solution = search_s(lp, tau, cfg.stride);
    s.policy = extract_policy(lp, s.solution.rho_star);
    s.gap = suboptimality_gap(c.mdp.size(), c.bounds.k_upper, c.gamma.value, tau, s.d);
    return s;
}

inline void report_batch(std::ostream& out, const std::string& label, const RolloutBatch& b, double tau,
                         std::optional<double> deadline) {
    out << label << ": runs=" << b.runs() << " mean=" << format_number(b.mean())
        << " var=" << format_number(b.var(tau)) << " avar=" << format_number(b.avar(tau))
        << " timeouts=" << b.timeouts();
    if (deadline) out << " exceed(>=" << format_number(*deadline) << ")=" << b.exceedances(*deadline);
    out << '\n';
}

inline std::string path(const RunConfig& cfg, const std::string& suffix) { return cfg.out + suffix; }

} // namespace detail

inline int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    detail::Checked c;
    const auto mdp = io::load_model(cfg.input);
    if (auto code = detail::check_model(cfg, mdp, out, c, true)) return *code;
    out << "gamma: " << detail::format_number(c.gamma.value) << " (" << to_string(c.gamma.method) << ")\n";
    out << "gap table (tau=" << detail::format_number(cfg.tau) << "):\n";
    const auto n = mdp.size();
    std::vector<std::size_t> ds;
    for (std::size_t k = 1; k <= 10; ++k) ds.push_back(k * n);
    if (cfg.epsilon) ds.push_back(choose_horizon(c.bounds, n, c.gamma.value, cfg.tau, *cfg.epsilon));
    if (cfg.horizon) ds.push_back(*cfg.horizon);
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    for (auto d : ds)
        out << "  d=" << d << " gap=" << detail::format_number(suboptimality_gap(n, c.bounds.k_upper, c.gamma.value, cfg.tau, d))
            << '\n';
    if (cfg.epsilon)
        out << "horizon for epsilon=" << detail::format_number(*cfg.epsilon) << ": d="
            << choose_horizon(c.bounds, n, c.gamma.value, cfg.tau, *cfg.epsilon) << '\n';
    out << "valid\n";
    return kOk;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    detail::Checked c;
    const auto mdp = io::load_model(cfg.input);
    if (auto code = detail::check_model(cfg, mdp, out, c, false)) return *code;
    const auto s = detail::solve_model(cfg, c, cfg.tau);
    if (s.d == 0) out << "warning: horizon d=0, the surrogate cost is identically 0\n";

    io::SolutionSummary sum{cfg.tau, s.d, s.disc.zeta, s.disc.n_levels, s.solution.s_star, s.solution.objective, s.gap};
    auto j = io::solution_to_json(mdp, sum, s.solution.theta_star, s.policy);
    j["grid_slack"] = s.solution.grid_slack;
    j["gamma"] = c.gamma.value;
    j["gamma_method"] = to_string(c.gamma.method);
    io::write_text_file(detail::path(cfg, ".solution.json"), j.dump(2) + "\n");
    io::write_text_file(detail::path(cfg, ".theta.csv"), io::distribution_csv(s.solution.theta_star));

    out << "objective=" << detail::format_number(s.solution.objective) << " s*=" << detail::format_number(s.solution.s_star)
        << " d=" << s.d << " zeta=" << detail::format_number(s.disc.zeta) << " N=" << s.disc.n_levels
        << " gap_bound=" << detail::format_number(s.gap) << '\n';
    out << "augmented states=" << s.augmented_states << " lp solves=" << s.solution.lp_solves;
    if (s.solution.grid_slack > 0.0) out << " grid slack=" << detail::format_number(s.solution.grid_slack);
    out << '\n';
    out << "wrote " << detail::path(cfg, ".solution.json") << " and " << detail::path(cfg, ".theta.csv") << '\n';
    return kOk;
}

inline int cmd_baseline(const RunConfig& cfg, std::ostream& out) {
    detail::Checked c;
    const auto mdp = io::load_model(cfg.input);
    if (auto code = detail::check_model(cfg, mdp, out, c, false)) return *code;
    const auto vi = value_iteration(mdp);
    io::json extra;
    extra["expected_cost"] = vi.expected_cost(mdp);
    io::write_text_file(detail::path(cfg, ".baseline.json"), io::stationary_to_json(mdp, vi.policy(mdp), extra).dump(2) + "\n");
    out << "expected cost=" << detail::format_number(vi.expected_cost(mdp)) << " iterations=" << vi.iterations << '\n';
    out << "wrote " << detail::path(cfg, ".baseline.json") << '\n';
    return kOk;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    detail::Checked c;
    const auto mdp = io::load_model(cfg.input);
    if (auto code = detail::check_model(cfg, mdp, out, c, false)) return *code;
    if (cfg.policy.empty()) throw ConfigError("simulate needs --policy");
    if (cfg.runs == 0) throw ConfigError("--runs must be at least 1");
    const auto loaded = io::policy_from_json(io::read_json_file(cfg.policy), mdp);

    std::size_t d = 0;
    if (cfg.horizon)
        d = *cfg.horizon;
    else if (loaded.d)
        d = *loaded.d;
    else
        throw ConfigError("a stationary policy needs --horizon");
    if (loaded.d && d > *loaded.d) throw ConfigError("--horizon exceeds the horizon the policy was solved for");

    const auto batch = std::visit(
        [&](const auto& pol) { return monte_carlo(mdp, pol, d, cfg.runs, cfg.seed, cfg.threads); }, loaded.policy);
    io::write_text_file(detail::path(cfg, ".batch.csv"), io::batch_csv(batch));
    io::write_text_file(detail::path(cfg, ".histogram.csv"), io::histogram_csv(batch));
    detail::report_batch(out, "policy", batch, cfg.tau, cfg.deadline);
    out << "wrote " << detail::path(cfg, ".batch.csv") << " and " << detail::path(cfg, ".histogram.csv") << '\n';
    return kOk;
}

inline int cmd_compare(const RunConfig& cfg, std::ostream& out) {
    detail::Checked c;
    const auto mdp = io::load_model(cfg.input);
    if (auto code = detail::check_model(cfg, mdp, out, c, false)) return *code;
    if (cfg.runs == 0) throw ConfigError("--runs must be at least 1");

    const auto vi = value_iteration(mdp);
    const auto baseline = vi.policy(mdp);
    const auto s = detail::solve_model(cfg, c, cfg.tau);
    const double deadline = cfg.deadline ? *cfg.deadline : 1.25 * vi.expected_cost(mdp);

    // shared root seed: run i of both batches uses the same stream
    const auto base_batch = monte_carlo(mdp, baseline, s.d, cfg.runs, cfg.seed, cfg.threads);
    const auto ra_batch = monte_carlo(mdp, s.policy, s.d, cfg.runs, cfg.seed, cfg.threads);

    out << "d=" << s.d << " zeta=" << detail::format_number(s.disc.zeta) << " tau=" << detail::format_number(cfg.tau)
        << " deadline=" << detail::format_number(deadline) << '\n';
    out << "baseline expected cost=" << detail::format_number(vi.expected_cost(mdp)) << '\n';
    out << "risk-averse objective=" << detail::format_number(s.solution.objective)
        << " s*=" << detail::format_number(s.solution.s_star) << '\n';
    detail::report_batch(out, "baseline", base_batch, cfg.tau, deadline);
    detail::report_batch(out, "risk-averse", ra_batch, cfg.tau, deadline);
    io::write_text_file(detail::path(cfg, ".baseline.histogram.csv"), io::histogram_csv(base_batch));
    io::write_text_file(detail::path(cfg, ".risk-averse.histogram.csv"), io::histogram_csv(ra_batch));

    for (double t : cfg.taus) {
        const auto st = detail::solve_model(cfg, c, t);
        const auto file = detail::path(cfg, ".tau-" + detail::format_number(t) + ".csv");
        io::write_text_file(file, io::distribution_csv(st.solution.theta_star));
        out << "tau=" << detail::format_number(t) << " d=" << st.d << " objective=" << detail::format_number(st.solution.objective)
            << " -> " << file << '\n';
    }
    return kOk;
}

/// Dispatches a command and maps exceptions onto exit codes.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command == "validate") return cmd_validate(cfg, out);
        if (cfg.command == "solve") return cmd_solve(cfg, out);
        if (cfg.command == "simulate") return cmd_simulate(cfg, out);
        if (cfg.command == "compare") return cmd_compare(cfg, out);
        if (cfg.command == "baseline") return cmd_baseline(cfg, out);
        err << "error: unknown command '" << cfg.command << "'\n";
        return kInvalidInput;
    } catch (const io::InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const LpError& e) {
        err << "error: " << e.what() << '\n';
        return kLpFailure;
    } catch (const PolicyCoverageError& e) {
        err << "error: " << e.what() << '\n';
        return kPolicyCoverage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUnexpected;
    }
}

} // namespace tcavar::cli
