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
#include <span>
#include <utility>
#include <vector>

namespace tcavar {

/// Mass tolerance of a CostDistribution (Σ mass = 1).
inline constexpr double kDistributionTolerance = 1e-9;

/**
 * Finite probability mass function over nonnegative costs with a strictly
 * increasing support.
 */
class CostDistribution {
public:
    struct Atom {
        double value;
        double mass;
    };

    CostDistribution() = default;

    /// Point mass at `value`.
    static CostDistribution point(double value) { return CostDistribution({value}, {1.0}); }

    /// Takes an already sorted support. Throws ModelError on invalid input.
    CostDistribution(std::vector<double> support, std::vector<double> mass)
        : support_(std::move(support)), mass_(std::move(mass)) {
        check();
    }

    /**
     * Builds a distribution from unsorted atoms. Values within `merge_tol`
     * (relative to max(1, |value|)) are merged; zero-mass atoms are dropped.
     */
    static CostDistribution from_atoms(std::vector<Atom> atoms, double merge_tol = 1e-9) {
        std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
        std::vector<double> s, m;
        for (const auto& a : atoms) {
            if (a.mass == 0.0) continue;
            if (!s.empty() && a.value - s.back() <= merge_tol * std::max(1.0, std::abs(a.value)))
                m.back() += a.mass;
            else {
                s.push_back(a.value);
                m.push_back(a.mass);
            }
        }
        return CostDistribution(std::move(s), std::move(m));
    }

    std::span<const double> support() const { return support_; }
    std::span<const double> mass() const { return mass_; }
    std::size_t size() const { return support_.size(); }
    bool empty() const { return support_.empty(); }
    double min_value() const { return support_.front(); }
    double max_value() const { return support_.back(); }

    double mean() const {
        double e = 0.0;
        for (std::size_t i = 0; i < size(); ++i) e += support_[i] * mass_[i];
        return e;
    }

    /// Mass at `value` (exact match), zero if not in the support.
    double mass_at(double value) const {
        auto it = std::lower_bound(support_.begin(), support_.end(), value);
        if (it == support_.end() || *it != value) return 0.0;
        return mass_[static_cast<std::size_t>(it - support_.begin())];
    }

    /// Pr(Y >= threshold).
    double tail_mass(double threshold) const {
        double p = 0.0;
        for (std::size_t i = 0; i < size(); ++i)
            if (support_[i] >= threshold) p += mass_[i];
        return p;
    }

    /// Y + c.
    CostDistribution shifted(double c) const {
        auto s = support_;
        for (auto& v : s) v += c;
        return CostDistribution(std::move(s), mass_);
    }

    /// λY for λ > 0.
    CostDistribution scaled(double lambda) const {
        auto s = support_;
        for (auto& v : s) v *= lambda;
        return CostDistribution(std::move(s), mass_);
    }

private:
    void check() const {
        if (support_.size() != mass_.size()) throw ModelError("support and mass differ in length");
        if (support_.empty()) throw ModelError("empty cost distribution");
        double total = 0.0;
        for (std::size_t i = 0; i < support_.size(); ++i) {
            if (!(mass_[i] >= 0.0)) throw ModelError("negative probability mass");
            if (!(support_[i] >= 0.0) || !std::isfinite(support_[i])) throw ModelError("cost values must be nonnegative");
            if (i > 0 && !(support_[i] > support_[i - 1])) throw ModelError("support must be strictly increasing");
            total += mass_[i];
        }
        if (std::abs(total - 1.0) > kDistributionTolerance) throw ModelError("probability masses must sum to 1");
    }

    std::vector<double> support_;
    std::vector<double> mass_;
};

/// Largest absolute mass difference over the union of both supports.
/// Values are matched within `tol` relative to max(1, |value|).
inline double linf_distance(const CostDistribution& a, const CostDistribution& b, double tol = 1e-9) {
    std::size_t i = 0, j = 0;
    double worst = 0.0;
    const auto sa = a.support(), sb = b.support(), ma = a.mass(), mb = b.mass();
    while (i < sa.size() || j < sb.size()) {
        if (j == sb.size() || (i < sa.size() && sa[i] < sb[j] - tol * std::max(1.0, std::abs(sb[j])))) {
            worst = std::max(worst, ma[i++]);
        } else if (i == sa.size() || sb[j] < sa[i] - tol * std::max(1.0, std::abs(sa[i]))) {
            worst = std::max(worst, mb[j++]);
        } else {
            worst = std::max(worst, std::abs(ma[i++] - mb[j++]));
        }
    }
    return worst;
}

inline void require_level(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ModelError("risk level tau must lie in (0,1)");
}

/// Smallest support value whose cumulative mass reaches tau.
inline double var(const CostDistribution& dist, double tau) {
    require_level(tau);
    const auto s = dist.support();
    const auto m = dist.mass();
    double cum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        cum += m[i];
        // absorbs summation noise such as 0.3 + 0.4 < 0.7
        if (cum >= tau - 1e-12) return s[i];
    }
    return s.back();
}

/// Rockafellar-Uryasev objective s + E[(Y - s)^+] / (1 - tau).
inline double avar_objective(const CostDistribution& dist, double tau, double s) {
    require_level(tau);
    const auto v = dist.support();
    const auto m = dist.mass();
    double tail = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] > s) tail += (v[i] - s) * m[i];
    return s + tail / (1.0 - tau);
}

/// AVaR_tau(Y): the R-U objective evaluated at its minimizer VaR_tau(Y).
inline double avar(const CostDistribution& dist, double tau) {
    return avar_objective(dist, tau, var(dist, tau));
}

/**
 * Upper bound on the gap between the optimal AVaR of the total cost and of
 * the cost truncated after d steps:
 *   n * k_upper * (1 - gamma)^floor((d + 1) / n) / ((1 - tau) * gamma).
 */
inline double suboptimality_gap(std::size_t n, double k_upper, double gamma, double tau, std::size_t d) {
    require_level(tau);
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ModelError("gamma must lie in (0,1]");
    if (n == 0) throw ModelError("n must be positive");
    const double k = std::floor(static_cast<double>(d + 1) / static_cast<double>(n));
    return static_cast<double>(n) * k_upper * std::pow(1.0 - gamma, k) / ((1.0 - tau) * gamma);
}

/// Uniform bound d * zeta on |zeta * y_t - c_t| for t <= d.
inline double discretization_error_bound(double zeta, std::size_t d) {
    if (!(zeta > 0.0)) throw ModelError("zeta must be positive");
    return static_cast<double>(d) * zeta;
}

} // namespace tcavar
