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

#include "tcavar/mdp.hpp"
#include "tcavar/risk.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace tcavar {

struct ReachabilityReport {
    bool satisfied = false;
    std::vector<StateId> avoid_set; // sorted; empty iff satisfied
};

/**
 * Checks that x_M is reachable from every transient state under every
 * stationary action selection.
 *
 * Computes the greatest set S of transient states in which every member has
 * an action whose support stays inside S. Starting from all transient
 * states, states whose every action may leave S are removed until stable.
 */
inline ReachabilityReport check_reachability(const Mdp& mdp) {
    const auto n = mdp.size();
    std::vector<char> in_set(n, 0);
    for (StateId x = 0; x < n; ++x) in_set[x] = !mdp.is_absorbing(x);

    auto stays_inside = [&](const Action& a) {
        for (const auto& t : a.next)
            if (t.prob > 0.0 && !in_set[t.to]) return false;
        return true;
    };

    for (bool changed = true; changed;) {
        changed = false;
        for (StateId x = 0; x < n; ++x) {
            if (!in_set[x]) continue;
            bool keep = false;
            for (const auto& a : mdp.actions[x])
                if (stays_inside(a)) {
                    keep = true;
                    break;
                }
            if (!keep) {
                in_set[x] = 0;
                changed = true;
            }
        }
    }

    ReachabilityReport r;
    for (StateId x = 0; x < n; ++x)
        if (in_set[x]) r.avoid_set.push_back(x);
    r.satisfied = r.avoid_set.empty();
    return r;
}

enum class GammaMethod { ExactEnumeration, SafeLowerBound };

inline const char* to_string(GammaMethod m) {
    return m == GammaMethod::ExactEnumeration ? "exact" : "safe-lower-bound";
}

/// Exact path enumeration is exponential; above this many states the
/// safe lower bound is the default.
inline constexpr std::size_t kExactGammaMaxStates = 12;

inline GammaMethod default_gamma_method(const Mdp& mdp) {
    return mdp.size() <= kExactGammaMaxStates ? GammaMethod::ExactEnumeration : GammaMethod::SafeLowerBound;
}

struct GammaEstimate {
    double value;
    GammaMethod method;
};

namespace detail {

// w(a, b) = smallest positive Pr(b | a, u) over u in U(a); 0 if no edge.
inline std::vector<std::vector<double>> min_edge_weights(const Mdp& mdp) {
    const auto n = mdp.size();
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (StateId a = 0; a < n; ++a)
        for (const auto& act : mdp.actions[a])
            for (StateId b = 0; b < n; ++b) {
                const double p = act.prob_to(b);
                if (p > 0.0 && (w[a][b] == 0.0 || p < w[a][b])) w[a][b] = p;
            }
    return w;
}

inline void min_simple_path(const std::vector<std::vector<double>>& w, StateId target, StateId at,
                            double prob, std::vector<char>& on_path, double& best) {
    if (at == target) {
        best = std::min(best, prob);
        return;
    }
    on_path[at] = 1;
    for (StateId next = 0; next < w.size(); ++next)
        if (w[at][next] > 0.0 && !on_path[next])
            min_simple_path(w, target, next, prob * w[at][next], on_path, best);
    on_path[at] = 0;
}

} // namespace detail

/**
 * Lower bound gamma on the probability of absorption within n steps.
 *
 * Exact enumeration takes, over all transient x and all simple paths
 * x -> x_M, the minimum product of per-edge weights, each edge weighted by
 * its smallest positive probability among the actions at its tail. A
 * simple path visits each state once, so the per-state minimizing actions
 * form one admissible selection.
 *
 * The safe lower bound is p_min^(n-1), p_min the smallest positive
 * transition probability of the model.
 */
inline GammaEstimate compute_gamma(const Mdp& mdp, GammaMethod method) {
    const auto n = mdp.size();
    if (method == GammaMethod::SafeLowerBound) {
        double p_min = 1.0;
        for (const auto& acts : mdp.actions)
            for (const auto& a : acts)
                for (const auto& t : a.next)
                    if (t.prob > 0.0) p_min = std::min(p_min, t.prob);
        return {std::pow(p_min, static_cast<double>(n - 1)), method};
    }

    const auto w = detail::min_edge_weights(mdp);
    double gamma = 1.0;
    std::vector<char> on_path(n, 0);
    for (StateId x = 0; x < n; ++x) {
        if (mdp.is_absorbing(x)) continue;
        double best = std::numeric_limits<double>::infinity();
        detail::min_simple_path(w, mdp.absorbing, x, 1.0, on_path, best);
        if (!std::isfinite(best))
            throw ModelError("no positive-probability path from " + mdp.state_names[x] + " to the absorbing state");
        gamma = std::min(gamma, best);
    }
    return {gamma, method};
}

/**
 * Smallest d >= 1 whose suboptimality gap is at most epsilon. With
 * gamma = 1 the gap vanishes and d = n.
 */
inline std::size_t choose_horizon(const CostBounds& bounds, std::size_t n, double gamma, double tau, double epsilon) {
    require_level(tau);
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ModelError("gamma must lie in (0,1]");
    if (!(epsilon > 0.0)) throw ModelError("epsilon must be positive");

    // gap(d) = C (1-gamma)^k with k = floor((d+1)/n); find the least k first.
    const double c = static_cast<double>(n) * bounds.k_upper / ((1.0 - tau) * gamma);
    double k = 0.0;
    if (c > epsilon) k = std::max(0.0, std::floor(std::log(epsilon / c) / std::log1p(-gamma)) - 1.0);
    if (k * static_cast<double>(n) > 1e15) throw BudgetError("horizon too large for the requested epsilon");

    auto gap_ok = [&](std::size_t d) { return suboptimality_gap(n, bounds.k_upper, gamma, tau, d) <= epsilon; };
    // d with floor((d+1)/n) = k starts at k*n - 1
    auto d = static_cast<std::size_t>(std::max(1.0, k * static_cast<double>(n) - 1.0));
    while (!gap_ok(d)) d += 1;
    while (d > 1 && gap_ok(d - 1)) d -= 1;
    return d;
}

} // namespace tcavar
