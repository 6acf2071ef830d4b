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

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace tcavar::lp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// minimize c'x subject to A x = b, x >= 0.
struct Problem {
    SparseMatrix A;
    std::vector<double> b;
    std::vector<double> c;

    std::size_t rows() const { return static_cast<std::size_t>(A.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(A.cols()); }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, Singular };

inline const char* to_string(Status s) {
    switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration-limit";
    case Status::Singular: return "singular-basis";
    }
    return "unknown";
}

struct Solution {
    Status status = Status::Singular;
    std::vector<double> x;
    double objective = 0.0;
    /// Basic column per row; indices >= cols() denote artificial columns
    /// that stayed basic on redundant rows.
    std::vector<std::size_t> basis;
    std::size_t iterations = 0;
    bool warm_started = false;
};

/// Abstract LP backend: equality constraints, nonnegative variables.
class Backend {
public:
    virtual ~Backend() = default;
    /// `warm_basis`, when non-empty, lists one column per row. It is used
    /// if it is nonsingular and primal feasible; otherwise the solve starts
    /// from scratch.
    virtual Solution solve(const Problem& problem, std::span<const std::size_t> warm_basis = {}) const = 0;
};

struct SimplexOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-9;
    std::size_t refactor_every = 64;
    std::size_t max_iterations = 0; // 0: 50 * (rows + cols)
    std::size_t degenerate_before_bland = 50;
};

/**
 * Two-phase revised simplex method on sparse data.
 *
 * The basis is factorized with a sparse LU and updated in product form
 * between refactorizations. Pricing is Dantzig's rule with a switch to
 * Bland's rule after a run of degenerate pivots; the ratio test is Harris'
 * two-pass test.
 */
class RevisedSimplex final : public Backend {
public:
    explicit RevisedSimplex(SimplexOptions options = {}) : opt_(options) {}

    Solution solve(const Problem& problem, std::span<const std::size_t> warm_basis = {}) const override {
        Work w(problem, opt_);
        return w.run(warm_basis);
    }

private:
    struct Eta {
        std::size_t r;
        double pivot;
        std::vector<std::pair<std::size_t, double>> column; // off-pivot entries
    };

    class Work {
    public:
        Work(const Problem& p, const SimplexOptions& o) : opt_(o), m_(p.rows()), n_(p.cols()) {
            if (p.b.size() != m_ || p.c.size() != n_) throw LpError("LP dimension mismatch");
            sign_.assign(m_, 1.0);
            b_.resize(m_);
            for (std::size_t i = 0; i < m_; ++i) {
                if (p.b[i] < 0.0) sign_[i] = -1.0;
                b_[i] = std::abs(p.b[i]);
            }
            A_ = p.A;
            A_.makeCompressed();
            for (int j = 0; j < A_.outerSize(); ++j)
                for (SparseMatrix::InnerIterator it(A_, j); it; ++it) it.valueRef() *= sign_[static_cast<std::size_t>(it.row())];
            c_ = p.c;
            max_iter_ = o.max_iterations ? o.max_iterations : 50 * (m_ + n_) + 1000;
        }

        Solution run(std::span<const std::size_t> warm) {
            Solution sol;
            bool ready = false;
            if (!warm.empty() && warm.size() == m_) ready = try_warm(warm);
            sol.warm_started = ready;

            if (!ready) {
                cold_start();
                if (!refactor()) return finish(sol, Status::Singular);
                set_phase_costs(true);
                auto st = iterate(true);
                if (st != Status::Optimal) return finish(sol, st);
                double infeas = 0.0;
                for (std::size_t r = 0; r < m_; ++r)
                    if (head_[r] >= n_) infeas += std::max(0.0, xb_[r]);
                double scale = 1.0;
                for (double v : b_) scale = std::max(scale, v);
                if (infeas > opt_.feasibility_tol * scale * 10.0) return finish(sol, Status::Infeasible);
                drive_out_artificials();
            }
            set_phase_costs(false);
            auto st = iterate(false);
            return finish(sol, st);
        }

    private:
        // ---- column access -------------------------------------------------
        bool artificial(std::size_t j) const { return j >= n_; }

        template <class F>
        void for_column(std::size_t j, F&& f) const {
            if (artificial(j)) {
                f(j - n_, 1.0);
                return;
            }
            for (SparseMatrix::InnerIterator it(A_, static_cast<int>(j)); it; ++it)
                f(static_cast<std::size_t>(it.row()), it.value());
        }

        double dot_column(std::size_t j, const Eigen::VectorXd& y) const {
            double s = 0.0;
            for_column(j, [&](std::size_t i, double v) { s += y[static_cast<Eigen::Index>(i)] * v; });
            return s;
        }

        // ---- basis management ----------------------------------------------
        void cold_start() {
            head_.resize(m_);
            pos_.assign(n_ + m_, npos);
            // crash: positive singleton columns cover their row
            std::vector<char> covered(m_, 0);
            for (std::size_t j = 0; j < n_; ++j) {
                if (A_.col(static_cast<int>(j)).nonZeros() != 1) continue;
                SparseMatrix::InnerIterator it(A_, static_cast<int>(j));
                const auto i = static_cast<std::size_t>(it.row());
                if (covered[i] || it.value() <= 0.0) continue;
                covered[i] = 1;
                head_[i] = j;
                pos_[j] = i;
            }
            for (std::size_t i = 0; i < m_; ++i)
                if (!covered[i]) {
                    head_[i] = n_ + i;
                    pos_[n_ + i] = i;
                }
        }

        bool try_warm(std::span<const std::size_t> warm) {
            head_.assign(warm.begin(), warm.end());
            pos_.assign(n_ + m_, npos);
            for (std::size_t r = 0; r < m_; ++r) {
                if (head_[r] >= n_ + m_ || pos_[head_[r]] != npos) return false;
                pos_[head_[r]] = r;
            }
            if (!refactor()) return false;
            for (std::size_t r = 0; r < m_; ++r) {
                if (xb_[r] < -opt_.feasibility_tol) return false;
                if (artificial(head_[r]) && xb_[r] > opt_.feasibility_tol) return false;
            }
            return true;
        }

        bool refactor() {
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(m_ * 4);
            for (std::size_t r = 0; r < m_; ++r)
                for_column(head_[r], [&](std::size_t i, double v) {
                    trip.emplace_back(static_cast<int>(i), static_cast<int>(r), v);
                });
            SparseMatrix B(static_cast<int>(m_), static_cast<int>(m_));
            B.setFromTriplets(trip.begin(), trip.end());
            B.makeCompressed();
            lu_.analyzePattern(B);
            lu_.factorize(B);
            etas_.clear();
            if (lu_.info() != Eigen::Success) return false;
            Eigen::VectorXd rhs(static_cast<Eigen::Index>(m_));
            for (std::size_t i = 0; i < m_; ++i) rhs[static_cast<Eigen::Index>(i)] = b_[i];
            Eigen::VectorXd x = lu_.solve(rhs);
            if (!x.allFinite()) return false;
            xb_.assign(x.data(), x.data() + m_);
            return true;
        }

        Eigen::VectorXd ftran(std::size_t j) const {
            Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
            for_column(j, [&](std::size_t i, double v) { a[static_cast<Eigen::Index>(i)] = v; });
            Eigen::VectorXd x = lu_.solve(a);
            for (const auto& e : etas_) {
                const double xr = x[static_cast<Eigen::Index>(e.r)] / e.pivot;
                if (xr != 0.0)
                    for (const auto& [i, v] : e.column) x[static_cast<Eigen::Index>(i)] -= v * xr;
                x[static_cast<Eigen::Index>(e.r)] = xr;
            }
            return x;
        }

        Eigen::VectorXd btran(Eigen::VectorXd c) const {
            for (auto e = etas_.rbegin(); e != etas_.rend(); ++e) {
                double s = c[static_cast<Eigen::Index>(e->r)];
                for (const auto& [i, v] : e->column) s -= v * c[static_cast<Eigen::Index>(i)];
                c[static_cast<Eigen::Index>(e->r)] = s / e->pivot;
            }
            return lu_.transpose().solve(c);
        }

        void pivot(std::size_t q, std::size_t r, const Eigen::VectorXd& alpha, double step) {
            for (std::size_t i = 0; i < m_; ++i) xb_[i] -= step * alpha[static_cast<Eigen::Index>(i)];
            xb_[r] = step;
            Eta e{r, alpha[static_cast<Eigen::Index>(r)], {}};
            for (std::size_t i = 0; i < m_; ++i)
                if (i != r && alpha[static_cast<Eigen::Index>(i)] != 0.0)
                    e.column.emplace_back(i, alpha[static_cast<Eigen::Index>(i)]);
            etas_.push_back(std::move(e));
            pos_[head_[r]] = npos;
            head_[r] = q;
            pos_[q] = r;
        }

        void set_phase_costs(bool phase_one) {
            cost_.assign(n_ + m_, 0.0);
            if (phase_one)
                for (std::size_t i = 0; i < m_; ++i) cost_[n_ + i] = 1.0;
            else
                for (std::size_t j = 0; j < n_; ++j) cost_[j] = c_[j];
        }

        // ---- main loop -------------------------------------------------------
        Status iterate(bool phase_one) {
            std::size_t degenerate_run = 0;
            for (;;) {
                if (iterations_ >= max_iter_) return Status::IterationLimit;
                if (etas_.size() >= opt_.refactor_every && !refactor()) return Status::Singular;

                Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
                for (std::size_t r = 0; r < m_; ++r) cb[static_cast<Eigen::Index>(r)] = cost_[head_[r]];
                const Eigen::VectorXd y = btran(cb);

                const bool bland = degenerate_run >= opt_.degenerate_before_bland;
                std::size_t q = npos;
                double best = -opt_.optimality_tol;
                for (std::size_t j = 0; j < n_; ++j) {
                    if (pos_[j] != npos) continue;
                    const double dj = cost_[j] - dot_column(j, y);
                    if (dj < best) {
                        q = j;
                        if (bland) break;
                        best = dj;
                    }
                }
                if (q == npos) return Status::Optimal;

                const Eigen::VectorXd alpha = ftran(q);

                // Harris pass 1
                double bound = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < m_; ++i) {
                    const double a = alpha[static_cast<Eigen::Index>(i)];
                    if (!phase_one && artificial(head_[i]) && std::abs(a) > opt_.pivot_tol) {
                        bound = 0.0;
                        continue;
                    }
                    if (a > opt_.pivot_tol) bound = std::min(bound, (std::max(xb_[i], 0.0) + opt_.feasibility_tol) / a);
                }
                if (!std::isfinite(bound)) return phase_one ? Status::Singular : Status::Unbounded;

                // pass 2: largest pivot among eligible rows (smallest index under Bland)
                std::size_t r = npos;
                double best_alpha = 0.0;
                for (std::size_t i = 0; i < m_; ++i) {
                    const double a = alpha[static_cast<Eigen::Index>(i)];
                    const bool art = !phase_one && artificial(head_[i]) && std::abs(a) > opt_.pivot_tol;
                    if (!art && !(a > opt_.pivot_tol)) continue;
                    const double ratio = art ? 0.0 : std::max(xb_[i], 0.0) / a;
                    if (ratio > bound) continue;
                    const double mag = std::abs(a);
                    if (bland) {
                        if (r == npos || head_[i] < head_[r]) r = i;
                    } else if (mag > best_alpha) {
                        best_alpha = mag;
                        r = i;
                    }
                }
                const double ar = alpha[static_cast<Eigen::Index>(r)];
                double step = artificial(head_[r]) && !phase_one ? 0.0 : std::max(xb_[r], 0.0) / ar;
                if (step < 0.0) step = 0.0;
                degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
                pivot(q, r, alpha, step);
                ++iterations_;
            }
        }

        void drive_out_artificials() {
            for (std::size_t r = 0; r < m_; ++r) {
                if (!artificial(head_[r])) continue;
                Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
                e[static_cast<Eigen::Index>(r)] = 1.0;
                const Eigen::VectorXd row = btran(e);
                std::size_t q = npos;
                double best = 1e-7;
                for (std::size_t j = 0; j < n_; ++j) {
                    if (pos_[j] != npos) continue;
                    const double v = std::abs(dot_column(j, row));
                    if (v > best) {
                        best = v;
                        q = j;
                    }
                }
                if (q == npos) continue; // redundant row
                const Eigen::VectorXd alpha = ftran(q);
                pivot(q, r, alpha, 0.0);
                xb_[r] = 0.0;
                if (etas_.size() >= opt_.refactor_every) refactor();
            }
        }

        Solution& finish(Solution& sol, Status st) {
            sol.iterations = iterations_;
            sol.status = st;
            if (st != Status::Optimal) return sol;
            if (!refactor()) {
                sol.status = Status::Singular;
                return sol;
            }
            sol.x.assign(n_, 0.0);
            for (std::size_t r = 0; r < m_; ++r)
                if (!artificial(head_[r])) sol.x[head_[r]] = std::max(0.0, xb_[r]);
            sol.objective = 0.0;
            for (std::size_t j = 0; j < n_; ++j) sol.objective += c_[j] * sol.x[j];
            sol.basis = head_;
            return sol;
        }

        static constexpr std::size_t npos = static_cast<std::size_t>(-1);

        const SimplexOptions& opt_;
        std::size_t m_, n_;
        SparseMatrix A_;
        std::vector<double> b_, c_, sign_, cost_, xb_;
        std::vector<std::size_t> head_, pos_;
        std::vector<Eta> etas_;
        mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
        std::size_t iterations_ = 0;
        std::size_t max_iter_ = 0;
    };

    SimplexOptions opt_;
};

} // namespace tcavar::lp
