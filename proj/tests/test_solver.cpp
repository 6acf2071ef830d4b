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

struct Pipeline {
    Discretization disc;
    AugmentedMdp aug;
    OccupancyLp lp;
};

Pipeline pipeline(const Mdp& m, std::size_t d) {
    const auto b = cost_bounds(m);
    // zeta = 1 for integer costs, so the surrogate cost is the exact cost
    const auto np = std::max<std::size_t>(1, d * static_cast<std::size_t>(std::ceil(b.k_upper)));
    auto disc = discretization_step(b, d, np);
    auto aug = build_augmented(m, disc);
    auto lp = build_lp(aug);
    return {disc, std::move(aug), std::move(lp)};
}

TEST(BuildLp, Tiny2Dimensions) {
    const auto p = pipeline(oracle::tiny2(), 3);
    // 4 copies of A with two actions, 9 of x_M with one
    std::size_t rho = 0;
    for (std::size_t i = 0; i < p.aug.size(); ++i) rho += p.aug.action_count(i);
    EXPECT_EQ(p.lp.occupancy_count(), rho);
    EXPECT_EQ(p.lp.occupancy_count(), 17u);
    EXPECT_EQ(p.lp.levels(), 7u);
    EXPECT_EQ(p.lp.variable_count(), 24u);
    EXPECT_EQ(p.lp.constraint_count(), 20u);
    EXPECT_EQ(p.lp.problem().A.rows(), 20);
    EXPECT_EQ(p.lp.problem().A.cols(), 24);
}

TEST(BuildLp, RejectsBadInitialMass) {
    const auto p = pipeline(oracle::tiny2(), 3);
    std::vector<double> short_beta(3, 0.0);
    EXPECT_THROW(build_lp(p.aug, short_beta), ModelError);
    std::vector<double> late(p.aug.size(), 0.0);
    late.back() = 1.0;
    EXPECT_THROW(build_lp(p.aug, late), ModelError);
}

TEST(BuildLp, FirstActionBasisIsFeasible) {
    const auto p = pipeline(oracle::chain(0.7), 5);
    const auto sol = lp::RevisedSimplex{}.solve(p.lp.problem(), p.lp.first_action_basis());
    ASSERT_EQ(sol.status, lp::Status::Optimal);
    EXPECT_TRUE(sol.warm_started);
}

TEST(SolveFixedS, ZeroSIsTruncatedRiskNeutral) {
    const auto p = pipeline(oracle::tiny2(), 19);
    const auto r = solve_fixed_s(p.lp, 0.5, 0.0);
    // always-fast: E[min(G, 19) truncated cost] = 2 - 2^-18, doubled by 1/(1-τ)
    EXPECT_NEAR(r.objective, 2.0 * (2.0 - std::ldexp(1.0, -18)), 1e-9);
}

TEST(SearchS, Tiny2) {
    const auto m = oracle::tiny2();
    const auto p = pipeline(m, 19);
    const auto sol = search_s(p.lp, 0.5);
    EXPECT_NEAR(sol.objective, 2.0, 1e-9);
    EXPECT_DOUBLE_EQ(sol.s_star, 2.0);
    EXPECT_EQ(sol.grid_slack, 0.0);
    EXPECT_NEAR(avar(sol.theta_star, 0.5), sol.objective, 1e-9);

    const auto pol = extract_policy(p.lp, sol.rho_star);
    // slow wherever occupancy is positive
    for (std::size_t i = 0; i < p.aug.size(); ++i) {
        const auto& s = p.aug.state(i);
        if (s.x != 0 || p.aug.is_terminal(i)) continue;
        double occ = 0.0;
        for (ActionId u = 0; u < 2; ++u) occ += sol.rho_star[p.lp.column(i, u)];
        if (occ > 1e-9) EXPECT_EQ(pol.probabilities(s.x, s.y, s.z)[1], 1.0);
    }
    EXPECT_EQ(enumerate_trajectories(m, pol, 19).size(), 1u);
}

TEST(SearchS, Tiny2bPrefersSlowAtHighLevel) {
    const auto m = oracle::tiny2b();
    const auto p = pipeline(m, 27);
    const auto sol = search_s(p.lp, 0.95);
    const auto pol = extract_policy(p.lp, sol.rho_star);
    EXPECT_EQ(pol.probabilities(0, 0, 0)[1], 1.0);
    // AVaR_0.95 of always-fast exceeds 2
    const auto fast = enumerate_trajectories(m, StationaryPolicy::constant(m, 0), 27);
    EXPECT_GT(avar(fast, 0.95), 2.0);
}

TEST(SearchS, StrideReportsSlackAndStaysClose) {
    const auto p = pipeline(oracle::chain(0.6, 1.0, 2.0), 8);
    const auto full = search_s(p.lp, 0.8);
    const auto coarse = search_s(p.lp, 0.8, 3);
    EXPECT_DOUBLE_EQ(coarse.grid_slack, 2.0 * p.disc.zeta);
    EXPECT_GE(coarse.objective, full.objective - 1e-9);
    EXPECT_LE(coarse.objective, full.objective + coarse.grid_slack + 1e-9);
    EXPECT_LT(coarse.lp_solves, full.lp_solves);
}

TEST(SearchS, MatchesAugmentedDynamicProgram) {
    std::mt19937_64 rng(51);
    int checked = 0;
    while (checked < 25) {
        const auto m = oracle::random_mdp(rng);
        if (!oracle::brute_avoid_set(m).empty()) continue;
        ++checked;
        const std::size_t d = 1 + checked % 5;
        const double tau = 0.1 + 0.8 * (checked % 7) / 6.0;
        const auto p = pipeline(m, d);
        const auto sol = search_s(p.lp, tau);
        EXPECT_NEAR(sol.objective, oracle::augmented_dp_avar(m, d, p.disc.zeta, tau), 1e-7) << "instance " << checked;

        const auto pol = extract_policy(p.lp, sol.rho_star);
        const auto induced = induced_distribution(p.aug, pol);
        EXPECT_LE(linf_distance(induced, enumerate_trajectories(m, pol, d)), 1e-9);
        EXPECT_NEAR(avar(induced, tau), sol.objective, 1e-7);
    }
}

TEST(Induced, AlwaysFastMatchesHandEnumeration) {
    const auto m = oracle::tiny2();
    const auto p = pipeline(m, 3);
    const auto dist = induced_distribution(p.aug, StationaryPolicy::constant(m, 0));
    const CostDistribution expect({1.0, 2.0, 3.0}, {0.5, 0.25, 0.25});
    EXPECT_LE(linf_distance(dist, expect), 1e-15);
}

TEST(Extract, UniformOnUnvisitedStates) {
    const auto m = oracle::tiny2();
    const auto p = pipeline(m, 3);
    std::vector<double> rho(p.lp.occupancy_count(), 0.0);
    const auto pol = extract_policy(p.lp, rho);
    EXPECT_EQ(pol.size(), p.aug.size());
    EXPECT_DOUBLE_EQ(pol.probabilities(0, 0, 0)[0], 0.5);
    EXPECT_THROW(extract_policy(p.lp, std::vector<double>(3, 0.0)), ModelError);
    EXPECT_THROW(pol.probabilities(0, 5, 1), PolicyCoverageError);
}

TEST(Surrogate, ObjectiveMonotoneInHorizonWithinGap) {
    std::mt19937_64 rng(52);
    int checked = 0;
    while (checked < 5) {
        const auto m = oracle::random_mdp(rng);
        if (!oracle::brute_avoid_set(m).empty()) continue;
        ++checked;
        const double tau = 0.7;
        const double gamma = compute_gamma(m, GammaMethod::ExactEnumeration).value;
        const auto kb = cost_bounds(m).k_upper;
        std::vector<double> obj;
        for (std::size_t d = 1; d <= 6; ++d) obj.push_back(search_s(pipeline(m, d).lp, tau).objective);
        for (std::size_t i = 0; i < obj.size(); ++i)
            for (std::size_t j = i + 1; j < obj.size(); ++j) {
                EXPECT_GE(obj[j], obj[i] - 1e-8);
                EXPECT_LE(obj[j] - obj[i], suboptimality_gap(m.size(), kb, gamma, tau, i + 1) + 1e-8);
            }
    }
}

} // namespace
