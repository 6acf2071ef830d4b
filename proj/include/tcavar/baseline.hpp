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
#include "tcavar/policy.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace tcavar {

struct ValueIterationResult {
    std::vector<double> values;    // expected total cost to absorption, V(x_M) = 0
    std::vector<ActionId> actions; // greedy action per state
    std::size_t iterations = 0;
    double residual = 0.0;

    StationaryPolicy policy(const Mdp& mdp) const { return StationaryPolicy::deterministic(mdp, actions); }

    /// β-weighted expected total cost.
    double expected_cost(const Mdp& mdp) const {
        double v = 0.0;
        for (StateId x = 0; x < mdp.size(); ++x) v += mdp.initial[x] * values[x];
        return v;
    }
};

inline double q_value(const Mdp& mdp, StateId x, ActionId u, const std::vector<double>& v) {
    const auto& a = mdp.actions[x][u];
    double q = a.cost;
    for (const auto& t : a.next) q += t.prob * v[t.to];
    return q;
}

/// One Jacobi Bellman update; ties go to the first-declared action.
inline std::vector<double> bellman_update(const Mdp& mdp, const std::vector<double>& v,
                                          std::vector<ActionId>* argmin = nullptr) {
    std::vector<double> out(mdp.size(), 0.0);
    if (argmin) argmin->assign(mdp.size(), 0);
    for (StateId x = 0; x < mdp.size(); ++x) {
        if (mdp.is_absorbing(x)) continue;
        double best = std::numeric_limits<double>::infinity();
        for (ActionId u = 0; u < mdp.actions[x].size(); ++u) {
            const double q = q_value(mdp, x, u, v);
            if (q < best) {
                best = q;
                if (argmin) (*argmin)[x] = u;
            }
        }
        out[x] = best;
    }
    return out;
}

/**
 * Expected total cost of a deterministic policy, from the linear system
 * (I - P) V = c over the non-absorbing states.
 */
inline std::vector<double> evaluate_deterministic(const Mdp& mdp, const std::vector<ActionId>& actions) {
    const auto n = static_cast<Eigen::Index>(mdp.size());
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (StateId x = 0; x < mdp.size(); ++x) {
        const auto i = static_cast<Eigen::Index>(x);
        trip.emplace_back(i, i, 1.0);
        if (mdp.is_absorbing(x)) continue;
        const auto& a = mdp.actions[x][actions[x]];
        c[i] = a.cost;
        for (const auto& t : a.next)
            if (!mdp.is_absorbing(t.to)) trip.emplace_back(i, static_cast<Eigen::Index>(t.to), -t.prob);
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw ModelError("policy does not reach the absorbing state");
    const Eigen::VectorXd v = lu.solve(c);
    return {v.data(), v.data() + n};
}

/**
 * Risk-neutral total-cost value iteration from V = 0 until the sup-norm
 * change is at most tol. Under positive costs and reachability the
 * iterates increase monotonically to the optimal expected cost. The returned
 * values are those of the greedy policy, solved exactly.
 */
inline ValueIterationResult value_iteration(const Mdp& mdp, double tol = 1e-10,
                                            std::size_t max_iterations = 1'000'000) {
    ValueIterationResult r;
    r.values.assign(mdp.size(), 0.0);
    for (;;) {
        if (r.iterations >= max_iterations) throw BudgetError("value iteration did not converge");
        auto next = bellman_update(mdp, r.values);
        double change = 0.0;
        for (StateId x = 0; x < mdp.size(); ++x) change = std::max(change, std::abs(next[x] - r.values[x]));
        r.values = std::move(next);
        ++r.iterations;
        if (change <= tol) {
            r.residual = change;
            break;
        }
    }
    // greedy policy with respect to the converged values
    const double scale = std::max(1.0, *std::max_element(r.values.begin(), r.values.end()));
    r.actions.assign(mdp.size(), 0);
    for (StateId x = 0; x < mdp.size(); ++x) {
        if (mdp.is_absorbing(x)) continue;
        double best = std::numeric_limits<double>::infinity();
        for (ActionId u = 0; u < mdp.actions[x].size(); ++u) {
            const double q = q_value(mdp, x, u, r.values);
            // declaration order wins within the convergence tolerance
            if (q < best - 10.0 * tol * scale) {
                best = q;
                r.actions[x] = u;
            }
        }
    }
    // replace the iterate by the exact value of the greedy policy
    r.values = evaluate_deterministic(mdp, r.actions);
    const auto next = bellman_update(mdp, r.values);
    r.residual = 0.0;
    for (StateId x = 0; x < mdp.size(); ++x) r.residual = std::max(r.residual, std::abs(next[x] - r.values[x]));
    return r;
}

} // namespace tcavar
