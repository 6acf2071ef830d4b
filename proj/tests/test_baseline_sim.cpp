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

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace tcavar;

namespace {

TEST(ValueIteration, Tiny2TieGoesToFirstAction) {
    const auto m = oracle::tiny2();
    const auto r = value_iteration(m);
    EXPECT_NEAR(r.values[0], 2.0, 1e-9);
    EXPECT_EQ(r.values[1], 0.0);
    EXPECT_EQ(r.actions[0], 0u); // fast and slow both cost 2 in expectation
    EXPECT_LE(r.residual, 1e-10);
}

TEST(ValueIteration, Tiny2bPicksFast) {
    const auto m = oracle::tiny2b();
    const auto r = value_iteration(m);
    EXPECT_NEAR(r.expected_cost(m), 1.8, 1e-9);
    EXPECT_EQ(r.actions[0], 0u);
}

TEST(ValueIteration, Chain) {
    const auto m = oracle::chain(1.0, 1.0, 2.0);
    const auto r = value_iteration(m);
    EXPECT_NEAR(r.values[0], 3.0, 1e-12);
    EXPECT_NEAR(r.values[1], 2.0, 1e-12);
    EXPECT_EQ(r.values[2], 0.0);
}

TEST(ValueIteration, FixedPointOfBellmanOnRandomModels) {
    std::mt19937_64 rng(61);
    int checked = 0;
    while (checked < 50) {
        const auto m = oracle::random_mdp(rng);
        if (!oracle::brute_avoid_set(m).empty()) continue;
        ++checked;
        const auto r = value_iteration(m);
        const auto next = bellman_update(m, r.values);
        for (StateId x = 0; x < m.size(); ++x) EXPECT_NEAR(next[x], r.values[x], 1e-8);

        // policy evaluation of the greedy policy by brute forward summation
        const auto pi = r.policy(m).table();
        std::vector<double> law = m.initial;
        double cost = 0.0;
        for (int t = 0; t < 4000; ++t) {
            for (StateId x = 0; x < m.size(); ++x)
                for (ActionId u = 0; u < pi[x].size(); ++u) cost += law[x] * pi[x][u] * m.actions[x][u].cost;
            law = oracle::step_law(m, pi, law);
        }
        EXPECT_NEAR(cost, r.expected_cost(m), 1e-6);
    }
}

// Replays a scripted sequence of uniforms.
struct Script {
    std::vector<double> values;
    std::size_t next = 0;
    double operator()() { return values.at(next++); }
};

TEST(Rollout, ScriptedFailureFailureSuccess) {
    const auto m = oracle::tiny2();
    const auto fast = StationaryPolicy::constant(m, 0);
    // initial, then (action, successor) per step; successor order is {x_M, A}
    Script s{{0.1, 0.2, 0.9, 0.2, 0.9, 0.2, 0.1}};
    const auto r = rollout(m, fast, 19, s);
    EXPECT_EQ(r.cost, 3.0);
    ASSERT_TRUE(r.t_star);
    EXPECT_EQ(*r.t_star, 3u);
    EXPECT_EQ(s.next, s.values.size());
}

TEST(Rollout, AlwaysSlowAndZeroHorizon) {
    const auto m = oracle::tiny2();
    const auto slow = StationaryPolicy::constant(m, 1);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = rollout(m, slow, 10, seed);
        EXPECT_EQ(r.cost, 2.0);
        EXPECT_EQ(*r.t_star, 1u);
    }
    const auto r = rollout(m, slow, 0, std::uint64_t{5});
    EXPECT_EQ(r.cost, 0.0);
    EXPECT_FALSE(r.t_star);
}

TEST(MonteCarlo, AlwaysSlowIsPointMass) {
    const auto m = oracle::tiny2();
    const auto batch = monte_carlo(m, StationaryPolicy::constant(m, 1), 19, 1000, 3);
    const auto e = batch.empirical();
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e.support()[0], 2.0);
    EXPECT_EQ(e.mass()[0], 1.0);
    EXPECT_THROW(monte_carlo(m, StationaryPolicy::constant(m, 1), 19, 0, 3), ModelError);
}

TEST(MonteCarlo, AlwaysFastGeometricLaw) {
    const auto m = oracle::tiny2();
    const auto batch = monte_carlo(m, StationaryPolicy::constant(m, 0), 19, 100000, 2024);
    EXPECT_NEAR(batch.empirical().mass_at(1.0), 0.5, 0.005);
    EXPECT_NEAR(batch.avar(0.5), 3.0, 0.05);
    EXPECT_NEAR(batch.mean(), 2.0, 0.03);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
    const auto m = oracle::tiny2();
    const auto fast = StationaryPolicy::constant(m, 0);
    const auto one = monte_carlo(m, fast, 19, 5000, 77, 1);
    const auto many = monte_carlo(m, fast, 19, 5000, 77, 7);
    EXPECT_EQ(one.costs(), many.costs());
    EXPECT_EQ(one.absorption_times(), many.absorption_times());
    // each run can be replayed on its own
    EXPECT_EQ(rollout(m, fast, 19, derive_seed(77, 1234)).cost, one.costs()[1234]);
}

TEST(MonteCarlo, ConvergesToEnumeration) {
    const auto m = oracle::chain(0.6, 1.0, 2.0);
    const auto pol = StationaryPolicy::constant(m, 0);
    const std::size_t runs = 100000;
    const auto exact = enumerate_trajectories(m, pol, 8);
    const auto emp = monte_carlo(m, pol, 8, runs, 9).empirical();
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const double p = exact.mass()[i];
        EXPECT_NEAR(emp.mass_at(exact.support()[i]), p, 3.0 * std::sqrt(p * (1 - p) / runs) + 1e-12);
    }
}

TEST(MonteCarlo, AbsorptionTailWithinGeometricBound) {
    const auto m = oracle::chain(0.6);
    const double gamma = compute_gamma(m, GammaMethod::ExactEnumeration).value;
    const std::size_t runs = 20000;
    const auto batch = monte_carlo(m, StationaryPolicy::constant(m, 0), 60, runs, 10);
    const auto n = m.size();
    for (std::size_t k = 1; k <= 4; ++k) {
        const double bound = std::pow(1.0 - gamma, static_cast<double>(k));
        EXPECT_LE(batch.fraction_alive_at(k * n), bound + 3.0 * std::sqrt(bound * (1 - bound) / runs));
    }
}

TEST(MonteCarlo, ExceedanceCountsCostAtDeadline) {
    const auto m = oracle::tiny2();
    const auto batch = monte_carlo(m, StationaryPolicy::constant(m, 0), 3, 1000, 1);
    const auto count = batch.exceedances(3.0);
    EXPECT_NEAR(static_cast<double>(count), 250.0, 45.0);
    EXPECT_EQ(batch.exceedances(0.0), 1000u);
    EXPECT_EQ(batch.timeouts(), batch.exceedances(3.0) - static_cast<std::size_t>(std::count_if(
                                    batch.absorption_times().begin(), batch.absorption_times().end(),
                                    [](const auto& t) { return t && *t == 3; })));
}

TEST(Enumerate, Examples) {
    const auto m = oracle::tiny2();
    const auto fast = enumerate_trajectories(m, StationaryPolicy::constant(m, 0), 3);
    EXPECT_LE(linf_distance(fast, CostDistribution({1.0, 2.0, 3.0}, {0.5, 0.25, 0.25})), 1e-15);

    for (std::size_t d = 1; d < 6; ++d) {
        const auto slow = enumerate_trajectories(m, StationaryPolicy::constant(m, 1), d);
        EXPECT_EQ(slow.size(), 1u);
        EXPECT_EQ(slow.support()[0], 2.0);
    }

    // fast w.p. 0.5 at A, truncated at d = 2:
    // 1 = fast, success; 2 = slow, or fast-fail-fast; 3 = fast-fail-slow
    StationaryPolicy mixed({{0.5, 0.5}, {1.0}});
    const auto law = enumerate_trajectories(m, mixed, 2);
    EXPECT_NEAR(law.mass_at(1.0), 0.25, 1e-15);
    EXPECT_NEAR(law.mass_at(2.0), 0.625, 1e-15);
    EXPECT_NEAR(law.mass_at(3.0), 0.125, 1e-15);
    double total = 0.0;
    for (double p : law.mass()) total += p;
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Enumerate, LeafBudget) {
    const auto m = oracle::tiny2();
    StationaryPolicy mixed({{0.5, 0.5}, {1.0}});
    EXPECT_THROW(enumerate_trajectories(m, mixed, 30, 10), BudgetError);
    EXPECT_NO_THROW(enumerate_trajectories(m, mixed, 30, 100));
}

TEST(Enumerate, AgreesWithInducedLawForMultiplesOfZeta) {
    std::mt19937_64 rng(62);
    int checked = 0;
    while (checked < 40) {
        const auto m = oracle::random_mdp(rng);
        if (!oracle::brute_avoid_set(m).empty()) continue;
        ++checked;
        const std::size_t d = 1 + checked % 5;
        const auto b = cost_bounds(m);
        // integer costs and N' = d ceil(K) give zeta = 1
        const auto disc = discretization_step(b, d, d * static_cast<std::size_t>(std::ceil(b.k_upper)));
        const auto aug = build_augmented(m, disc);
        StationaryPolicy pol(oracle::random_stationary(m, rng, false));
        EXPECT_LE(linf_distance(induced_distribution(aug, pol), enumerate_trajectories(m, pol, d)), 1e-12);
    }
}

TEST(Rollout, LockstepDiscretizationErrorBound) {
    std::mt19937_64 rng(63);
    oracle::RandomSpec spec;
    spec.integer_costs = false;
    int checked = 0;
    while (checked < 10) {
        const auto m = oracle::random_mdp(rng, spec);
        if (!oracle::brute_avoid_set(m).empty()) continue;
        ++checked;
        const std::size_t d = 6;
        const auto disc = discretization_step(cost_bounds(m), d, 4 * d);
        AugmentedPolicy pol(m, disc);
        // any augmented policy will do; reuse a random stationary table at every (y, z)
        const auto table = oracle::random_stationary(m, rng, false);
        const auto aug = build_augmented(m, disc);
        for (const auto& s : aug.states()) pol.set(s, table[s.x]);
        for (std::uint64_t run = 0; run < 200; ++run) {
            Uniform01 u(derive_seed(99, run));
            StateId x = sample_index(std::span<const double>(m.initial), u);
            std::size_t y = 0;
            double c = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const auto probs = pol.probabilities(x, y, t);
                const auto a = sample_index(probs, u);
                c += m.actions[x][a].cost;
                y = pol.next_level(x, a, y);
                std::vector<double> p;
                for (const auto& tr : m.actions[x][a].next) p.push_back(tr.prob);
                x = m.actions[x][a].next[sample_index(std::span<const double>(p), u)].to;
                EXPECT_LE(std::abs(disc.zeta * static_cast<double>(y) - c), static_cast<double>(t + 1) * disc.zeta + 1e-12);
                EXPECT_LE(disc.zeta * static_cast<double>(y), c + 1e-12);
            }
        }
    }
}

} // namespace
