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

#include "tcavar/error.hpp"
#include "tcavar/mdp.hpp"
#include "tcavar/policy.hpp"
#include "tcavar/risk.hpp"
#include "tcavar/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace tcavar {

struct RolloutResult {
    double cost = 0.0;                 // truncated total cost c^[d]
    std::optional<std::size_t> t_star; // absorption time, empty on timeout
};

/**
 * Samples x0 ~ β and then actions and successors for at most d steps.
 * Every categorical draw (initial state, action, successor) consumes exactly
 * one value from `uniform`, including degenerate ones.
 */
template <Policy P, class U>
RolloutResult rollout(const Mdp& mdp, const P& policy, std::size_t d, U& uniform) {
    RolloutResult r;
    StateId x = sample_index(std::span<const double>(mdp.initial), uniform);
    std::size_t y = 0;
    std::vector<double> probs;
    for (std::size_t t = 0; t < d; ++t) {
        if (mdp.is_absorbing(x)) {
            r.t_star = t;
            return r;
        }
        const ActionId u = sample_index(policy.probabilities(x, y, t), uniform);
        const auto& a = mdp.actions[x][u];
        r.cost += a.cost;
        y = policy.next_level(x, u, y);
        probs.clear();
        for (const auto& tr : a.next) probs.push_back(tr.prob);
        x = a.next[sample_index(std::span<const double>(probs), uniform)].to;
    }
    if (mdp.is_absorbing(x)) r.t_star = d;
    return r;
}

template <Policy P>
RolloutResult rollout(const Mdp& mdp, const P& policy, std::size_t d, std::uint64_t seed) {
    Uniform01 u(seed);
    return rollout(mdp, policy, d, u);
}

/// Per-run outcomes of a Monte Carlo batch and their empirical statistics.
class RolloutBatch {
public:
    RolloutBatch() = default;
    RolloutBatch(std::vector<double> costs, std::vector<std::optional<std::size_t>> t_star)
        : costs_(std::move(costs)), t_star_(std::move(t_star)) {}

    std::size_t runs() const { return costs_.size(); }
    const std::vector<double>& costs() const { return costs_; }
    const std::vector<std::optional<std::size_t>>& absorption_times() const { return t_star_; }

    /// Empirical law: counts / runs.
    CostDistribution empirical() const {
        std::map<double, std::size_t> counts;
        for (double c : costs_) ++counts[c];
        std::vector<CostDistribution::Atom> atoms;
        for (const auto& [c, k] : counts) atoms.push_back({c, static_cast<double>(k) / static_cast<double>(runs())});
        return CostDistribution::from_atoms(std::move(atoms));
    }

    double mean() const {
        double s = 0.0;
        for (double c : costs_) s += c;
        return s / static_cast<double>(runs());
    }
    double var(double tau) const { return tcavar::var(empirical(), tau); }
    double avar(double tau) const { return tcavar::avar(empirical(), tau); }

    /// Runs whose cost reaches the deadline (cost >= deadline).
    std::size_t exceedances(double deadline) const {
        const double thr = deadline - 1e-9 * std::max(1.0, std::abs(deadline));
        return static_cast<std::size_t>(std::count_if(costs_.begin(), costs_.end(), [&](double c) { return c >= thr; }));
    }

    std::size_t timeouts() const {
        return static_cast<std::size_t>(std::count_if(t_star_.begin(), t_star_.end(), [](const auto& t) { return !t; }));
    }

    /// Fraction of runs not absorbed by step k (timeouts count as not absorbed).
    double fraction_alive_at(std::size_t k) const {
        std::size_t alive = 0;
        for (const auto& t : t_star_)
            if (!t || *t > k) ++alive;
        return static_cast<double>(alive) / static_cast<double>(runs());
    }

private:
    std::vector<double> costs_;
    std::vector<std::optional<std::size_t>> t_star_;
};

/**
 * Independent rollouts; run i uses the stream derive_seed(seed, i), so the
 * batch does not depend on the thread count.
 */
template <Policy P>
RolloutBatch monte_carlo(const Mdp& mdp, const P& policy, std::size_t d, std::size_t runs, std::uint64_t seed,
                         unsigned threads = 0) {
    if (runs == 0) throw ModelError("runs must be at least 1");
    std::vector<double> costs(runs);
    std::vector<std::optional<std::size_t>> times(runs);
    auto work = [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            auto r = rollout(mdp, policy, d, derive_seed(seed, i));
            costs[i] = r.cost;
            times[i] = r.t_star;
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, (runs + 255) / 256));
    if (threads <= 1) {
        work(0, runs);
    } else {
        std::vector<std::jthread> pool;
        std::exception_ptr failure;
        std::mutex m;
        const std::size_t chunk = (runs + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    work(t * chunk, std::min(runs, (t + 1) * chunk));
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!failure) failure = std::current_exception();
                }
            });
        pool.clear();
        if (failure) std::rethrow_exception(failure);
    }
    return RolloutBatch(std::move(costs), std::move(times));
}

/**
 * Exact law of the truncated cost c^[d] by depth-first enumeration of every
 * (action, successor) branch with positive probability.
 */
template <Policy P>
CostDistribution enumerate_trajectories(const Mdp& mdp, const P& policy, std::size_t d,
                                        std::size_t leaf_budget = 10'000'000) {
    std::map<double, double> law;
    std::size_t leaves = 0;
    auto visit = [&](auto&& self, StateId x, std::size_t y, std::size_t z, double cost, double prob) -> void {
        if (z == d || mdp.is_absorbing(x)) {
            if (++leaves > leaf_budget) throw BudgetError("trajectory enumeration exceeded its leaf budget");
            law[cost] += prob;
            return;
        }
        const auto probs = policy.probabilities(x, y, z);
        for (ActionId u = 0; u < probs.size(); ++u) {
            if (probs[u] <= 0.0) continue;
            const auto& a = mdp.actions[x][u];
            const auto y2 = policy.next_level(x, u, y);
            for (const auto& t : a.next)
                if (t.prob > 0.0) self(self, t.to, y2, z + 1, cost + a.cost, prob * probs[u] * t.prob);
        }
    };
    for (StateId x = 0; x < mdp.size(); ++x)
        if (mdp.initial[x] > 0.0) visit(visit, x, 0, 0, 0.0, mdp.initial[x]);

    std::vector<CostDistribution::Atom> atoms;
    for (const auto& [c, p] : law) atoms.push_back({c, p});
    return CostDistribution::from_atoms(std::move(atoms));
}

} // namespace tcavar
