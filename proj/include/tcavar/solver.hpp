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
#include "tcavar/lp/simplex.hpp"
#include "tcavar/policy.hpp"
#include "tcavar/risk.hpp"

#include <cmath>
#include <memory>
#include <span>
#include <vector>

namespace tcavar {

/**
 * Occupancy-measure LP of the augmented MDP.
 *
 * Columns: one occupancy ρ(σ, u) per materialized state σ and action u
 * (terminal states included), followed by θ(0..N). Rows: one flow row per
 * materialized state,
 *   Σ_u ρ(σ, u) - Σ_{σ', u'} P'(σ | σ', u') ρ(σ', u') = β'(σ),
 * followed by θ(k) - Σ_{σ in stage d, y = k} Σ_u ρ(σ, u) = 0.
 * The objective is set per value of s by solve_fixed_s().
 */
class OccupancyLp {
public:
    const AugmentedMdp& augmented() const { return *aug_; }
    const lp::Problem& problem() const { return problem_; }
    const std::vector<double>& beta_prime() const { return beta_; }

    std::size_t levels() const { return aug_->discretization().n_levels + 1; }
    std::size_t occupancy_count() const { return n_rho_; }
    std::size_t variable_count() const { return n_rho_ + levels(); }
    std::size_t constraint_count() const { return aug_->size() + levels(); }

    std::size_t column(std::size_t state, ActionId u) const { return rho_offset_[state] + u; }
    std::size_t theta_column(std::size_t k) const { return n_rho_ + k; }
    double zeta() const { return aug_->discretization().zeta; }
    double k_upper() const { return k_upper_; }

    /// Basis of the policy that plays the first action everywhere; it is
    /// nonsingular (stage-ordered, hence triangular) and primal feasible.
    std::vector<std::size_t> first_action_basis() const {
        std::vector<std::size_t> basis;
        basis.reserve(constraint_count());
        for (std::size_t i = 0; i < aug_->size(); ++i) basis.push_back(column(i, 0));
        for (std::size_t k = 0; k < levels(); ++k) basis.push_back(theta_column(k));
        return basis;
    }

    friend OccupancyLp build_lp(const AugmentedMdp& aug, std::span<const double> beta_prime);

private:
    std::shared_ptr<const AugmentedMdp> aug_;
    std::vector<double> beta_;
    lp::Problem problem_;
    std::vector<std::size_t> rho_offset_;
    std::size_t n_rho_ = 0;
    double k_upper_ = 0.0;
};

inline OccupancyLp build_lp(const AugmentedMdp& aug, std::span<const double> beta_prime) {
    if (beta_prime.size() != aug.size())
        throw ModelError("initial mass must be given for exactly the materialized augmented states");
    for (std::size_t i = 0; i < aug.size(); ++i)
        if (beta_prime[i] < 0.0 || (beta_prime[i] > 0.0 && aug.state(i).z != 0))
            throw ModelError("initial mass must be nonnegative and placed on stage 0");

    OccupancyLp lp;
    lp.aug_ = std::make_shared<const AugmentedMdp>(aug);
    lp.beta_.assign(beta_prime.begin(), beta_prime.end());
    lp.k_upper_ = aug.size() ? cost_bounds(aug.base()).k_upper : 0.0;

    const auto d = aug.discretization().d;
    lp.rho_offset_.resize(aug.size());
    for (std::size_t i = 0; i < aug.size(); ++i) {
        lp.rho_offset_[i] = lp.n_rho_;
        lp.n_rho_ += aug.action_count(i);
    }

    const auto rows = static_cast<int>(lp.constraint_count());
    const auto cols = static_cast<int>(lp.variable_count());
    const auto theta_row = [&](std::size_t k) { return static_cast<int>(aug.size() + k); };

    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t i = 0; i < aug.size(); ++i) {
        const auto& s = aug.state(i);
        for (ActionId u = 0; u < aug.action_count(i); ++u) {
            const auto col = static_cast<int>(lp.column(i, u));
            trip.emplace_back(static_cast<int>(i), col, 1.0);
            if (s.z == d)
                trip.emplace_back(theta_row(s.y), col, -1.0);
            else
                for (const auto& t : aug.successors(i, u)) trip.emplace_back(static_cast<int>(t.to), col, -t.prob);
        }
    }
    for (std::size_t k = 0; k < lp.levels(); ++k)
        trip.emplace_back(theta_row(k), static_cast<int>(lp.theta_column(k)), 1.0);

    lp.problem_.A.resize(rows, cols);
    lp.problem_.A.setFromTriplets(trip.begin(), trip.end());
    lp.problem_.A.makeCompressed();
    lp.problem_.b.assign(static_cast<std::size_t>(rows), 0.0);
    for (std::size_t i = 0; i < aug.size(); ++i) lp.problem_.b[i] = beta_prime[i];
    lp.problem_.c.assign(static_cast<std::size_t>(cols), 0.0);
    return lp;
}

/// LP over β' = augmented_initial(base, aug).
inline OccupancyLp build_lp(const AugmentedMdp& aug) {
    return build_lp(aug, augmented_initial(aug.base(), aug));
}

struct FixedSResult {
    std::vector<double> rho;
    std::vector<double> theta; // indexed by level k
    double s = 0.0;
    double objective = 0.0;
    std::vector<std::size_t> basis;
    std::size_t iterations = 0;
};

/**
 * Minimizes s + Σ_k (ζk - s)^+ θ(k) / (1 - τ) over the occupancy polytope
 * for a fixed s, which is linear in (ρ, θ).
 */
inline FixedSResult solve_fixed_s(const OccupancyLp& lp, double tau, double s,
                                  const lp::Backend& backend = lp::RevisedSimplex{},
                                  std::span<const std::size_t> warm_basis = {}) {
    require_level(tau);
    lp::Problem prob = lp.problem();
    for (std::size_t k = 0; k < lp.levels(); ++k) {
        const double excess = lp.zeta() * static_cast<double>(k) - s;
        prob.c[lp.theta_column(k)] = excess > 0.0 ? excess / (1.0 - tau) : 0.0;
    }
    const auto sol = backend.solve(prob, warm_basis);
    if (sol.status != lp::Status::Optimal)
        throw LpError(std::string("occupancy LP not solved: ") + lp::to_string(sol.status));

    FixedSResult r;
    r.rho.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(lp.occupancy_count()));
    r.theta.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(lp.occupancy_count()), sol.x.end());
    r.s = s;
    r.objective = s + sol.objective;
    r.basis = sol.basis;
    r.iterations = sol.iterations;
    return r;
}

struct OccupancySolution {
    std::vector<double> rho_star;
    std::vector<double> theta_levels; // θ*(k), k = 0..N
    CostDistribution theta_star;      // over {ζk}
    double s_star = 0.0;
    double objective = 0.0;
    double grid_slack = 0.0;          // 0 for the full breakpoint grid
    std::size_t lp_solves = 0;
    std::size_t iterations = 0;
};

/// θ levels as a distribution over {ζk}; tiny negative LP noise is clamped.
inline CostDistribution levels_to_distribution(std::span<const double> levels, double zeta) {
    std::vector<CostDistribution::Atom> atoms;
    for (std::size_t k = 0; k < levels.size(); ++k)
        if (levels[k] > 0.0) atoms.push_back({zeta * static_cast<double>(k), levels[k]});
    return CostDistribution::from_atoms(std::move(atoms), 0.0);
}

/**
 * Solves the LP family over the breakpoint grid s = ζk, k = 0..N, restricted
 * to [0, K̄d], and keeps the best objective (ties go to the smaller s). For a
 * fixed θ the objective is piecewise linear in s with kinks at the support
 * {ζk}, so the full grid is exact for the discretized problem. With
 * stride > 1 only every stride-th breakpoint (plus the last) is solved and
 * the reported slack is (stride - 1) ζ.
 *
 * Solves run in ascending s, each warm-started from the previous optimal
 * basis (the constraints do not depend on s).
 */
inline OccupancySolution search_s(const OccupancyLp& lp, double tau, std::size_t stride = 1,
                                  const lp::Backend& backend = lp::RevisedSimplex{}) {
    require_level(tau);
    if (stride == 0) throw ModelError("stride must be positive");
    const auto& disc = lp.augmented().discretization();
    const double span = lp.k_upper() * static_cast<double>(disc.d);
    const auto top = std::min<std::size_t>(disc.n_levels,
                                           static_cast<std::size_t>(std::floor(detail::snap(span / disc.zeta))));

    std::vector<std::size_t> grid;
    for (std::size_t k = 0; k <= top; k += stride) grid.push_back(k);
    if (grid.back() != top) grid.push_back(top);

    OccupancySolution best;
    bool have = false;
    std::vector<std::size_t> basis = lp.first_action_basis();
    for (auto k : grid) {
        auto r = solve_fixed_s(lp, tau, disc.zeta * static_cast<double>(k), backend, basis);
        basis = r.basis;
        ++best.lp_solves;
        best.iterations += r.iterations;
        if (!have || r.objective < best.objective - 1e-12 * std::max(1.0, std::abs(best.objective))) {
            have = true;
            best.rho_star = std::move(r.rho);
            best.theta_levels = std::move(r.theta);
            best.s_star = r.s;
            best.objective = r.objective;
        }
    }
    for (auto& t : best.theta_levels) t = std::max(t, 0.0);
    best.theta_star = levels_to_distribution(best.theta_levels, disc.zeta);
    best.grid_slack = static_cast<double>(stride - 1) * disc.zeta;
    return best;
}

/// Occupancy threshold below which a state counts as unvisited.
inline constexpr double kOccupancyFloor = 1e-12;

/**
 * π(u | σ) = ρ(σ, u) / Σ_u' ρ(σ, u'), uniform where the occupancy of σ is
 * below kOccupancyFloor (such states are reached with probability zero).
 */
inline AugmentedPolicy extract_policy(const OccupancyLp& lp, std::span<const double> rho) {
    const auto& aug = lp.augmented();
    if (rho.size() != lp.occupancy_count()) throw ModelError("occupancy vector has the wrong length");
    AugmentedPolicy pol(aug.base(), aug.discretization());
    for (std::size_t i = 0; i < aug.size(); ++i) {
        const auto na = aug.action_count(i);
        std::vector<double> p(na);
        double total = 0.0;
        for (ActionId u = 0; u < na; ++u) total += std::max(0.0, rho[lp.column(i, u)]);
        for (ActionId u = 0; u < na; ++u)
            p[u] = total > kOccupancyFloor ? std::max(0.0, rho[lp.column(i, u)]) / total : 1.0 / static_cast<double>(na);
        pol.set(aug.state(i), std::move(p));
    }
    return pol;
}

/// Stage-d mass per level k under `policy`, by forward propagation of β'.
template <Policy P>
std::vector<double> induced_levels(const AugmentedMdp& aug, const P& policy) {
    const auto& disc = aug.discretization();
    std::vector<double> mass = augmented_initial(aug.base(), aug);
    std::vector<double> levels(disc.n_levels + 1, 0.0);
    for (std::size_t i = 0; i < aug.size(); ++i) {
        if (mass[i] == 0.0) continue;
        const auto& s = aug.state(i);
        if (aug.is_terminal(i)) {
            levels[s.y] += mass[i];
            continue;
        }
        const auto probs = policy.probabilities(s.x, s.y, s.z);
        for (ActionId u = 0; u < probs.size(); ++u) {
            if (probs[u] == 0.0) continue;
            for (const auto& t : aug.successors(i, u)) mass[t.to] += mass[i] * probs[u] * t.prob;
        }
    }
    return levels;
}

/// Law of the discretized surrogate cost ζ y_d under `policy`.
template <Policy P>
CostDistribution induced_distribution(const AugmentedMdp& aug, const P& policy) {
    return levels_to_distribution(induced_levels(aug, policy), aug.discretization().zeta);
}

} // namespace tcavar
