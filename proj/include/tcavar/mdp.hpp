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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace tcavar {

using StateId = std::size_t;
using ActionId = std::size_t;

/// Absolute tolerance for row sums and probability masses.
inline constexpr double kMassTolerance = 1e-12;

struct Transition {
    StateId to;
    double prob;
};

struct Action {
    std::string name;
    double cost = 0.0;
    std::vector<Transition> next;

    /// Probability of moving to `to`; duplicate entries are summed.
    double prob_to(StateId to) const {
        double p = 0.0;
        for (const auto& t : next)
            if (t.to == to) p += t.prob;
        return p;
    }
};

/**
 * A finite transient total-cost MDP with a single absorbing state.
 *
 * The value may hold invalid data (e.g. rows that do not sum to one); use
 * validate() to list the violated requirements. Every algorithm that needs
 * a valid model states so as a precondition.
 */
struct Mdp {
    std::vector<std::string> state_names;
    std::vector<std::vector<Action>> actions; // actions[x] = U(x)
    std::vector<double> initial;              // β
    StateId absorbing = 0;                    // x_M

    std::size_t size() const { return state_names.size(); }
    bool is_absorbing(StateId x) const { return x == absorbing; }

    StateId add_state(std::string name) {
        state_names.push_back(std::move(name));
        actions.emplace_back();
        initial.push_back(0.0);
        return state_names.size() - 1;
    }

    ActionId add_action(StateId x, std::string name, double cost, std::vector<Transition> next) {
        actions.at(x).push_back(Action{std::move(name), cost, std::move(next)});
        return actions[x].size() - 1;
    }

    std::optional<StateId> find_state(const std::string& name) const {
        auto it = std::find(state_names.begin(), state_names.end(), name);
        if (it == state_names.end()) return std::nullopt;
        return static_cast<StateId>(it - state_names.begin());
    }

    std::optional<ActionId> find_action(StateId x, const std::string& name) const {
        const auto& acts = actions.at(x);
        for (ActionId u = 0; u < acts.size(); ++u)
            if (acts[u].name == name) return u;
        return std::nullopt;
    }

    std::size_t transient_count() const { return size() - (size() > 0 ? 1 : 0); }
};

enum class ViolationKind {
    EmptyModel,
    BadAbsorbingIndex,
    EmptyActionSet,
    BadTarget,
    NegativeProbability,
    RowSum,
    AbsorbingActionCount,
    AbsorbingSelfLoop,
    AbsorbingCost,
    InitialSize,
    NegativeInitial,
    InitialOnAbsorbing,
    InitialMass,
    NonPositiveCost,
};

struct Violation {
    ViolationKind kind;
    std::optional<StateId> state;
    std::optional<ActionId> action;
    std::string message;
};

inline const char* to_string(ViolationKind k) {
    switch (k) {
    case ViolationKind::EmptyModel: return "empty-model";
    case ViolationKind::BadAbsorbingIndex: return "bad-absorbing-index";
    case ViolationKind::EmptyActionSet: return "empty-action-set";
    case ViolationKind::BadTarget: return "bad-target";
    case ViolationKind::NegativeProbability: return "negative-probability";
    case ViolationKind::RowSum: return "row-sum";
    case ViolationKind::AbsorbingActionCount: return "absorbing-action-count";
    case ViolationKind::AbsorbingSelfLoop: return "absorbing-self-loop";
    case ViolationKind::AbsorbingCost: return "absorbing-cost";
    case ViolationKind::InitialSize: return "initial-size";
    case ViolationKind::NegativeInitial: return "negative-initial";
    case ViolationKind::InitialOnAbsorbing: return "initial-on-absorbing";
    case ViolationKind::InitialMass: return "initial-mass";
    case ViolationKind::NonPositiveCost: return "positive-cost";
    }
    return "unknown";
}

/// True for violations of the positivity assumption (as opposed to
/// malformed model data).
inline bool is_assumption_violation(const Violation& v) {
    return v.kind == ViolationKind::NonPositiveCost;
}

/**
 * Lists every violated structural requirement of the MDP: row-stochasticity,
 * the absorbing self-loop with zero cost, β(x_M) = 0 with unit total mass,
 * and strictly positive costs on transient state-action pairs.
 *
 * Violations are data; this never throws.
 */
inline std::vector<Violation> validate(const Mdp& mdp) {
    std::vector<Violation> out;
    const auto n = mdp.size();
    auto label = [&](StateId x, std::optional<ActionId> u = std::nullopt) {
        std::ostringstream s;
        s << "(" << mdp.state_names[x];
        if (u) s << ", " << mdp.actions[x][*u].name;
        s << ")";
        return s.str();
    };

    if (n == 0) {
        out.push_back({ViolationKind::EmptyModel, {}, {}, "model has no states"});
        return out;
    }
    if (mdp.actions.size() != n) {
        out.push_back({ViolationKind::EmptyModel, {}, {}, "action table size differs from state count"});
        return out;
    }
    const bool absorbing_ok = mdp.absorbing < n;
    if (!absorbing_ok)
        out.push_back({ViolationKind::BadAbsorbingIndex, {}, {}, "absorbing state index out of range"});

    for (StateId x = 0; x < n; ++x) {
        const auto& acts = mdp.actions[x];
        if (acts.empty()) {
            out.push_back({ViolationKind::EmptyActionSet, x, {}, "no actions at " + label(x)});
            continue;
        }
        for (ActionId u = 0; u < acts.size(); ++u) {
            const auto& a = acts[u];
            double sum = 0.0;
            bool bad = false;
            for (const auto& t : a.next) {
                if (t.to >= n) {
                    out.push_back({ViolationKind::BadTarget, x, u, "transition target out of range at " + label(x, u)});
                    bad = true;
                } else if (t.prob < 0.0 || t.prob > 1.0 || !std::isfinite(t.prob)) {
                    out.push_back({ViolationKind::NegativeProbability, x, u, "probability outside [0,1] at " + label(x, u)});
                    bad = true;
                }
                sum += t.prob;
            }
            if (!bad && std::abs(sum - 1.0) > kMassTolerance) {
                std::ostringstream s;
                s << "row sum " << sum << " != 1 at " << label(x, u);
                out.push_back({ViolationKind::RowSum, x, u, s.str()});
            }
            if (absorbing_ok && x == mdp.absorbing) {
                if (std::abs(a.prob_to(x) - 1.0) > kMassTolerance)
                    out.push_back({ViolationKind::AbsorbingSelfLoop, x, u, "absorbing state must loop on itself at " + label(x, u)});
                if (a.cost != 0.0)
                    out.push_back({ViolationKind::AbsorbingCost, x, u, "absorbing action must have zero cost at " + label(x, u)});
            } else if (!(a.cost > 0.0) || !std::isfinite(a.cost)) {
                out.push_back({ViolationKind::NonPositiveCost, x, u, "transient cost must be positive at " + label(x, u)});
            }
        }
        if (absorbing_ok && x == mdp.absorbing && acts.size() != 1)
            out.push_back({ViolationKind::AbsorbingActionCount, x, {}, "absorbing state must have exactly one action"});
    }

    if (mdp.initial.size() != n) {
        out.push_back({ViolationKind::InitialSize, {}, {}, "initial distribution size differs from state count"});
        return out;
    }
    double mass = 0.0;
    for (StateId x = 0; x < n; ++x) {
        if (mdp.initial[x] < 0.0) out.push_back({ViolationKind::NegativeInitial, x, {}, "negative initial mass at " + label(x)});
        mass += mdp.initial[x];
    }
    if (absorbing_ok && mdp.initial[mdp.absorbing] != 0.0)
        out.push_back({ViolationKind::InitialOnAbsorbing, mdp.absorbing, {}, "initial mass on the absorbing state"});
    if (std::abs(mass - 1.0) > kMassTolerance) {
        std::ostringstream s;
        s << "initial mass sums to " << mass;
        out.push_back({ViolationKind::InitialMass, {}, {}, s.str()});
    }
    return out;
}

/// Throws ModelError with the first violation if the MDP is not valid.
inline void require_valid(const Mdp& mdp) {
    auto v = validate(mdp);
    if (!v.empty()) throw ModelError(v.front().message);
}

struct CostBounds {
    double k_lower; // smallest transient cost
    double k_upper; // largest cost
};

/// Exact min/max of the cost over transient state-action pairs.
inline CostBounds cost_bounds(const Mdp& mdp) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (StateId x = 0; x < mdp.size(); ++x) {
        if (mdp.is_absorbing(x)) continue;
        for (const auto& a : mdp.actions[x]) {
            if (!(a.cost > 0.0))
                throw ModelError("non-positive cost at (" + mdp.state_names[x] + ", " + a.name + ")");
            lo = std::min(lo, a.cost);
            hi = std::max(hi, a.cost);
        }
    }
    if (!std::isfinite(lo)) throw ModelError("model has no transient state-action pairs");
    return {lo, hi};
}

} // namespace tcavar
