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

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

namespace tcavar {

struct Discretization {
    double zeta = 0.0;         // ζ, cost per level
    std::size_t n_levels = 0;  // N, largest level index
    std::size_t d = 0;         // surrogate horizon
    std::size_t n_prime = 0;   // requested level count N'
};

namespace detail {

// Rounds r to the nearest integer when it is one up to binary noise.
inline double snap(double r) {
    const double n = std::round(r);
    return std::abs(r - n) <= 1e-9 * std::max(1.0, std::abs(r)) ? n : r;
}

} // namespace detail

/// floor(cost / zeta), exact for costs that are multiples of zeta.
inline std::size_t level_increment(double cost, double zeta) {
    return static_cast<std::size_t>(std::floor(detail::snap(cost / zeta)));
}

/**
 * ζ = min{K̲, d K̄ / N'} and N = ceil(d K̄ / ζ).
 *
 * N may exceed N' when K̲ is the binding term. A zero horizon yields the
 * degenerate ζ = K̲, N = 0.
 */
inline Discretization discretization_step(const CostBounds& bounds, std::size_t d, std::size_t n_prime) {
    if (!(bounds.k_lower > 0.0)) throw ModelError("smallest transient cost must be positive");
    if (n_prime == 0) throw ModelError("requested level count must be positive");
    if (d == 0) return {bounds.k_lower, 0, 0, n_prime};
    const double span = static_cast<double>(d) * bounds.k_upper;
    const double zeta = std::min(bounds.k_lower, span / static_cast<double>(n_prime));
    const auto levels = static_cast<std::size_t>(std::ceil(detail::snap(span / zeta)));
    return {zeta, levels, d, n_prime};
}

struct AugmentedState {
    StateId x;
    std::size_t y; // discretized accumulated cost
    std::size_t z; // stage

    friend bool operator==(const AugmentedState&, const AugmentedState&) = default;
};

struct AugmentedTransition {
    std::size_t to; // index into AugmentedMdp::states()
    double prob;
};

/**
 * The stage- and cost-augmented surrogate MDP over triples (x, y, z).
 *
 * Only states reachable from the support of β' are materialized, in
 * breadth-first order, so states are sorted by stage. From a state with
 * z < d, action u moves to (x', y + ⌊c(x,u)/ζ⌋, z + 1) with probability
 * Pr(x' | x, u). States with z = d are terminal: they exit with zero cost
 * to a trap that is not materialized.
 */
class AugmentedMdp {
public:
    const Mdp& base() const { return base_; }
    const Discretization& discretization() const { return disc_; }
    std::size_t size() const { return states_.size(); }
    const std::vector<AugmentedState>& states() const { return states_; }
    const AugmentedState& state(std::size_t i) const { return states_[i]; }

    /// Range [first, last) of state indices in stage z.
    std::pair<std::size_t, std::size_t> layer(std::size_t z) const { return {layer_start_[z], layer_start_[z + 1]}; }
    std::size_t layer_size(std::size_t z) const { return layer_start_[z + 1] - layer_start_[z]; }
    bool is_terminal(std::size_t i) const { return states_[i].z == disc_.d; }

    std::size_t action_count(std::size_t i) const { return base_.actions[states_[i].x].size(); }

    /// Successors of state i under action u; empty for terminal states.
    const std::vector<AugmentedTransition>& successors(std::size_t i, ActionId u) const {
        return successors_[action_offset_[i] + u];
    }

    std::optional<std::size_t> find(const AugmentedState& s) const {
        auto it = index_.find(key(s));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// y-increment of base action (x, u).
    std::size_t increment(StateId x, ActionId u) const { return increments_[x][u]; }

    /// Number of transitions whose level had to be clamped to N.
    std::size_t clamp_count() const { return clamp_count_; }

    friend AugmentedMdp build_augmented(const Mdp& mdp, const Discretization& disc);

private:
    std::uint64_t key(const AugmentedState& s) const {
        return (static_cast<std::uint64_t>(s.z) * (disc_.n_levels + 1) + s.y) * base_.size() + s.x;
    }

    Mdp base_;
    Discretization disc_;
    std::vector<AugmentedState> states_;
    std::vector<std::size_t> layer_start_;
    std::vector<std::size_t> action_offset_;
    std::vector<std::vector<AugmentedTransition>> successors_;
    std::vector<std::vector<std::size_t>> increments_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::size_t clamp_count_ = 0;
};

/**
 * Breadth-first forward construction of the reachable augmented MDP from
 * (x, 0, 0) for every x in the support of β.
 */
inline AugmentedMdp build_augmented(const Mdp& mdp, const Discretization& disc) {
    if (!(disc.zeta > 0.0)) throw ModelError("zeta must be positive");
    if (mdp.absorbing >= mdp.size()) throw ModelError("absorbing state index out of range");
    if (mdp.initial.size() != mdp.size() || mdp.initial[mdp.absorbing] > 0.0)
        throw ModelError("initial distribution must be defined and put no mass on the absorbing state");

    AugmentedMdp aug;
    aug.base_ = mdp;
    aug.disc_ = disc;

    aug.increments_.resize(mdp.size());
    for (StateId x = 0; x < mdp.size(); ++x)
        for (const auto& a : mdp.actions[x]) {
            const auto inc = level_increment(a.cost, disc.zeta);
            if (inc == 0 && !mdp.is_absorbing(x))
                throw ModelError("zero level increment at (" + mdp.state_names[x] + ", " + a.name +
                                 "); zeta exceeds the smallest cost");
            aug.increments_[x].push_back(inc);
        }

    auto add = [&](const AugmentedState& s) -> std::size_t {
        auto [it, inserted] = aug.index_.try_emplace(aug.key(s), aug.states_.size());
        if (inserted) aug.states_.push_back(s);
        return it->second;
    };

    aug.layer_start_.push_back(0);
    for (StateId x = 0; x < mdp.size(); ++x)
        if (mdp.initial[x] > 0.0) add({x, 0, 0});

    for (std::size_t z = 0; z <= disc.d; ++z) {
        const std::size_t first = aug.layer_start_.back();
        const std::size_t last = aug.states_.size();
        aug.layer_start_.push_back(last);
        for (std::size_t i = first; i < last; ++i) {
            const auto s = aug.states_[i]; // copy: add() may reallocate
            aug.action_offset_.push_back(aug.successors_.size());
            for (ActionId u = 0; u < mdp.actions[s.x].size(); ++u) {
                std::vector<AugmentedTransition> succ;
                if (z < disc.d) {
                    std::size_t y = s.y + aug.increments_[s.x][u];
                    if (y > disc.n_levels) {
                        y = disc.n_levels;
                        ++aug.clamp_count_;
                    }
                    for (const auto& t : mdp.actions[s.x][u].next)
                        if (t.prob > 0.0) {
                            const auto j = add({t.to, y, z + 1});
                            auto dup = std::find_if(succ.begin(), succ.end(), [&](const auto& e) { return e.to == j; });
                            if (dup != succ.end())
                                dup->prob += t.prob;
                            else
                                succ.push_back({j, t.prob});
                        }
                }
                aug.successors_.push_back(std::move(succ));
            }
        }
    }
    return aug;
}

/// β'(x, 0, 0) = β(x), indexed like aug.states().
inline std::vector<double> augmented_initial(const Mdp& mdp, const AugmentedMdp& aug) {
    std::vector<double> beta(aug.size(), 0.0);
    for (StateId x = 0; x < mdp.size(); ++x) {
        if (mdp.initial[x] == 0.0) continue;
        auto i = aug.find({x, 0, 0});
        if (!i) throw ModelError("initial state " + mdp.state_names[x] + " is not materialized");
        beta[*i] = mdp.initial[x];
    }
    return beta;
}

} // namespace tcavar
