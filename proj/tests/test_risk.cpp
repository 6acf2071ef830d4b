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

CostDistribution from(const oracle::Atoms& a) { return CostDistribution(a.values, a.probs); }

TEST(Distribution, RejectsBadInput) {
    EXPECT_THROW(CostDistribution({1.0, 0.5}, {0.5, 0.5}), ModelError);
    EXPECT_THROW(CostDistribution({1.0, 2.0}, {0.5, 0.6}), ModelError);
    EXPECT_THROW(CostDistribution({-1.0}, {1.0}), ModelError);
    EXPECT_THROW(CostDistribution({}, {}), ModelError);
    EXPECT_NO_THROW(CostDistribution({1.0, 2.0}, {0.5, 0.5}));
}

TEST(Distribution, FromAtomsMergesAndDrops) {
    const auto d = CostDistribution::from_atoms({{2.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}, {5.0, 0.0}});
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.support()[1], 2.0);
    EXPECT_DOUBLE_EQ(d.mass()[1], 0.5);
    EXPECT_DOUBLE_EQ(d.mean(), 1.5);
    EXPECT_DOUBLE_EQ(d.tail_mass(2.0), 0.5);
}

TEST(Var, Examples) {
    const CostDistribution geo({1.0, 2.0, 3.0}, {0.5, 0.25, 0.25});
    EXPECT_EQ(var(geo, 0.5), 1.0);
    EXPECT_EQ(var(geo, 0.6), 2.0);
    EXPECT_EQ(var(geo, 0.75), 2.0);
    EXPECT_EQ(var(geo, 0.76), 3.0);
    EXPECT_EQ(var(CostDistribution::point(4.0), 0.9), 4.0);
    EXPECT_THROW(var(geo, 0.0), ModelError);
    EXPECT_THROW(var(geo, 1.0), ModelError);
}

TEST(Var, CumulativeRoundingDoesNotSkipAnAtom) {
    const CostDistribution d({1.0, 2.0, 3.0}, {0.1, 0.2, 0.7});
    EXPECT_EQ(var(d, 0.3), 2.0); // 0.1 + 0.2 is 0.30000000000000004
    const CostDistribution e({1.0, 2.0, 3.0}, {0.3, 0.4, 0.3});
    EXPECT_EQ(var(e, 0.7), 2.0); // 0.3 + 0.4 is 0.7 minus one ulp
}

TEST(Avar, ObjectiveExamples) {
    const CostDistribution d({0.0, 10.0}, {0.5, 0.5});
    EXPECT_DOUBLE_EQ(avar_objective(d, 0.5, 2.0), 10.0);
    EXPECT_DOUBLE_EQ(avar_objective(d, 0.5, 20.0), 20.0);
    EXPECT_DOUBLE_EQ(avar_objective(CostDistribution::point(5.0), 0.5, 0.0), 10.0);
}

TEST(Avar, Examples) {
    EXPECT_DOUBLE_EQ(avar(CostDistribution({1.0, 2.0, 3.0}, {0.5, 0.25, 0.25}), 0.5), 2.5);
    EXPECT_DOUBLE_EQ(avar(CostDistribution::point(2.0), 0.95), 2.0);
    // {0 w.p. 0.99, 5 w.p. 0.01}; τ = 0.99 puts VaR on 0 and the tail mass 0.01 over 0.01
    EXPECT_NEAR(avar(CostDistribution({0.0, 5.0}, {0.99, 0.01}), 0.99), 5.0, 1e-12);
    EXPECT_NEAR(avar(CostDistribution({0.0, 5.0}, {0.99, 0.01}), 0.5), 0.1, 1e-12);
}

TEST(Avar, GeometricLawOfAlwaysFast) {
    // cost k w.p. 2^-k: VaR_0.5 = 1 and E[(C-1)^+] = 1, so AVaR_0.5 = 3
    std::vector<double> v, p;
    for (int k = 1; k <= 60; ++k) {
        v.push_back(k);
        p.push_back(std::ldexp(1.0, -k));
    }
    p.back() *= 2.0;
    EXPECT_NEAR(avar(CostDistribution(v, p), 0.5), 3.0, 1e-12);
}

TEST(Avar, CoherenceOnRandomLaws) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> tau(0.01, 0.99), shift(0.0, 10.0), scale(0.1, 5.0);
    for (int i = 0; i < 200; ++i) {
        const auto a = oracle::random_atoms(rng);
        const auto d = from(a);
        const double t = tau(rng), c = shift(rng), l = scale(rng);
        const double v = avar(d, t);
        EXPECT_NEAR(avar(d.shifted(c), t), v + c, 1e-9);
        EXPECT_NEAR(avar(d.scaled(l), t), l * v, 1e-9 * std::max(1.0, l * v));
        EXPECT_GE(v, d.mean() - 1e-12);
        EXPECT_LE(v, d.max_value() + 1e-12);
        EXPECT_LE(avar(d, t * 0.5), v + 1e-12);
        EXPECT_NEAR(v, oracle::integrated_avar(a, t), 1e-6);
        EXPECT_EQ(var(d, t), oracle::quantile(a, t));
    }
}

TEST(Avar, EqualsGridMinimumOverSupport) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> tau(0.01, 0.99);
    for (int i = 0; i < 50; ++i) {
        const auto d = from(oracle::random_atoms(rng));
        const double t = tau(rng);
        double best = std::numeric_limits<double>::infinity();
        for (double s : d.support()) best = std::min(best, avar_objective(d, t, s));
        EXPECT_EQ(avar(d, t), best);
    }
}

TEST(Avar, ObjectiveIsConvexInS) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> tau(0.01, 0.99), s(-5.0, 25.0);
    for (int i = 0; i < 200; ++i) {
        const auto d = from(oracle::random_atoms(rng));
        const double t = tau(rng);
        double a = s(rng), b = s(rng);
        if (a > b) std::swap(a, b);
        const double mid = 0.5 * (a + b);
        EXPECT_LE(avar_objective(d, t, mid), 0.5 * (avar_objective(d, t, a) + avar_objective(d, t, b)) + 1e-12);
    }
}

TEST(Discretization, ErrorBound) {
    EXPECT_DOUBLE_EQ(discretization_error_bound(0.5, 10), 5.0);
    EXPECT_DOUBLE_EQ(discretization_error_bound(1.0, 3), 3.0);
    EXPECT_NEAR(discretization_error_bound(0.01 / 7.0, 7), 0.01, 1e-15);
    EXPECT_THROW(discretization_error_bound(0.0, 3), ModelError);
}

TEST(Distribution, LinfDistance) {
    const CostDistribution a({1.0, 2.0}, {0.5, 0.5});
    const CostDistribution b({1.0, 3.0}, {0.75, 0.25});
    EXPECT_DOUBLE_EQ(linf_distance(a, b), 0.5);
    EXPECT_EQ(linf_distance(a, a), 0.0);
}

} // namespace
