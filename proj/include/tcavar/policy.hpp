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

#include "tcavar/augment.hpp"
#include "tcavar/mdp.hpp"

#include <concepts>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace tcavar {

/**
 * A (possibly randomized) policy queried at the augmented coordinates of a
 * trajectory: base state x, discretized accumulated cost y and stage z.
 * next_level() advances y after action u; policies that ignore y return 0.
 */
template <class P>
concept Policy = requires(const P& p, StateId x, std::size_t y, std::size_t z, ActionId u) {
    { p.probabilities(x, y, z) } -> std::convertible_to<std::span<const double>>;
    { p.next_level(x, u, y) } -> std::convertible_to<std::size_t>;
};

/// Markov stationary policy over base states.
class StationaryPolicy {
public:
    StationaryPolicy() = default;
    explicit StationaryPolicy(std::vector<std::vector<double>> probs) : probs_(std::move(probs)) {}

    /// Deterministic policy choosing `choice[x]` at every state.
    static StationaryPolicy deterministic(const Mdp& mdp, const std::vector<ActionId>& choice) {
        std::vector<std::vector<double>> p(mdp.size());
        for (StateId x = 0; x < mdp.size(); ++x) {
            p[x].assign(mdp.actions[x].size(), 0.0);
            p[x].at(choice.at(x)) = 1.0;
        }
        return StationaryPolicy(std::move(p));
    }

    /// The same action index at every state (clamped to the state's last action).
    static StationaryPolicy constant(const Mdp& mdp, ActionId u) {
        std::vector<ActionId> c(mdp.size());
        for (StateId x = 0; x < mdp.size(); ++x) c[x] = std::min<ActionId>(u, mdp.actions[x].size() - 1);
        return deterministic(mdp, c);
    }

    std::span<const double> probabilities(StateId x, std::size_t, std::size_t) const {
        if (x >= probs_.size()) throw PolicyCoverageError("policy does not cover state");
        return probs_[x];
    }
    std::size_t next_level(StateId, ActionId, std::size_t) const { return 0; }

    std::size_t size() const { return probs_.size(); }
    const std::vector<std::vector<double>>& table() const { return probs_; }

private:
    std::vector<std::vector<double>> probs_;
};

/// Randomized policy over materialized augmented states (x, y, z).
class AugmentedPolicy {
public:
    AugmentedPolicy() = default;

    AugmentedPolicy(const Mdp& base, const Discretization& disc) : disc_(disc), n_base_(base.size()) {
        increments_.resize(base.size());
        for (StateId x = 0; x < base.size(); ++x)
            for (const auto& a : base.actions[x]) increments_[x].push_back(level_increment(a.cost, disc.zeta));
    }

    void set(const AugmentedState& s, std::vector<double> probs) {
        auto [it, inserted] = index_.try_emplace(key(s), states_.size());
        if (inserted) {
            states_.push_back(s);
            probs_.push_back(std::move(probs));
        } else {
            probs_[it->second] = std::move(probs);
        }
    }

    std::span<const double> probabilities(StateId x, std::size_t y, std::size_t z) const {
        auto it = index_.find(key({x, y, z}));
        if (it == index_.end()) throw PolicyCoverageError("policy does not cover the reached augmented state");
        return probs_[it->second];
    }

    bool covers(const AugmentedState& s) const { return index_.contains(key(s)); }

    std::size_t next_level(StateId x, ActionId u, std::size_t y) const {
        return std::min(y + increments_[x][u], disc_.n_levels);
    }

    const Discretization& discretization() const { return disc_; }
    std::size_t size() const { return states_.size(); }
    const AugmentedState& state(std::size_t i) const { return states_[i]; }
    std::span<const double> probabilities_at(std::size_t i) const { return probs_[i]; }

private:
    std::uint64_t key(const AugmentedState& s) const {
        return (static_cast<std::uint64_t>(s.z) * (disc_.n_levels + 1) + s.y) * n_base_ + s.x;
    }

    Discretization disc_;
    std::size_t n_base_ = 0;
    std::vector<std::vector<std::size_t>> increments_;
    std::vector<AugmentedState> states_;
    std::vector<std::vector<double>> probs_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

static_assert(Policy<StationaryPolicy>);
static_assert(Policy<AugmentedPolicy>);

} // namespace tcavar
