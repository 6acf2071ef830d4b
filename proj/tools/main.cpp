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

#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using tcavar::cli::RunConfig;
    CLI::App app{"Risk-averse (AVaR) policies for transient total-cost MDPs"};
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");
    app.require_subcommand(1);

    RunConfig cfg;
    double epsilon = 0.0, deadline = 0.0;
    std::size_t horizon = 0, levels = 0;
    std::string gamma;

    auto common = [&](CLI::App* sub, bool solver, bool sim) {
        sub->add_option("input", cfg.input, "MDP or deployment-graph JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--tau", cfg.tau, "risk level in (0,1)")->capture_default_str();
        sub->add_option("--gamma", gamma, "gamma method: exact or safe (default: exact for n <= 12)");
        auto* eps = sub->add_option("--epsilon", epsilon, "target suboptimality gap; picks the horizon");
        auto* hor = sub->add_option("--horizon,-d", horizon, "explicit surrogate horizon d");
        if (solver) {
            eps->excludes(hor);
            sub->add_option("--levels", levels, "requested level count N' (default: makes zeta = smallest cost)");
            sub->add_option("--stride", cfg.stride, "solve every stride-th breakpoint of the s grid")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
        }
        if (sim) {
            sub->add_option("--runs", cfg.runs, "Monte Carlo runs")->check(CLI::PositiveNumber)->capture_default_str();
            sub->add_option("--seed", cfg.seed, "root seed")->capture_default_str();
            sub->add_option("--deadline,-T", deadline, "count runs with cost >= deadline");
            sub->add_option("--threads", cfg.threads, "worker threads (0: hardware)");
        }
        sub->add_option("--out,-o", cfg.out, "output path prefix")->capture_default_str();
    };

    auto* validate = app.add_subcommand("validate", "check assumptions, gamma and the gap table");
    common(validate, false, false);
    auto* solve = app.add_subcommand("solve", "compute the AVaR-optimal policy");
    common(solve, true, false);
    auto* baseline = app.add_subcommand("baseline", "risk-neutral value iteration");
    common(baseline, false, false);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation of a saved policy");
    common(simulate, false, true);
    simulate->add_option("--policy", cfg.policy, "solution or baseline JSON")->required()->check(CLI::ExistingFile);
    auto* compare = app.add_subcommand("compare", "risk-neutral baseline against the AVaR policy");
    common(compare, true, true);
    compare->add_option("--taus", cfg.taus, "extra risk levels for per-tau distribution CSVs")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : tcavar::cli::kInvalidInput;
    }

    auto* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    if (sub->count("--epsilon")) cfg.epsilon = epsilon;
    if (sub->count("--horizon")) cfg.horizon = horizon;
    if (sub->get_option_no_throw("--levels") && sub->count("--levels")) cfg.levels = levels;
    if (sub->get_option_no_throw("--deadline") && sub->count("--deadline")) cfg.deadline = deadline;
    if (sub->count("--gamma")) cfg.gamma_method = gamma;
    return tcavar::cli::run(cfg, std::cout, std::cerr);
}
