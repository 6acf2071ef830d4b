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
#include "tcavar/rng.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace tcavar {

/// One way of traversing an edge: takes `duration` time units and succeeds
/// with probability `success`; on failure the robot stays put.
struct SpeedOption {
    std::string label;
    double duration;
    double success;
};

struct DeploymentEdge {
    std::size_t from;
    std::size_t to;
    std::vector<SpeedOption> options;
};

/// Rapid-deployment instance: a robot moves from `start` to `goal` along
/// directed edges, trading speed for success probability.
struct DeploymentGraph {
    std::vector<std::string> vertices;
    std::size_t start = 0;
    std::size_t goal = 0;
    std::vector<DeploymentEdge> edges;
};

/**
 * Compiles a deployment graph into an MDP. States are the vertices and the
 * goal is absorbing. Each (edge, option) pair becomes an action at the edge's
 * tail with cost = duration, moving to the head with probability `success`
 * and staying in place otherwise. β is a point mass at the start vertex.
 *
 * Action names are the option labels, qualified as "label->head" when a
 * label repeats at the same vertex.
 */
inline Mdp compile_deployment(const DeploymentGraph& g) {
    const auto n = g.vertices.size();
    if (n < 2) throw ModelError("deployment graph needs at least two vertices");
    if (g.start >= n || g.goal >= n) throw ModelError("start or goal vertex out of range");
    if (g.start == g.goal) throw ModelError("start and goal must differ");

    std::vector<std::vector<std::size_t>> reverse(n);
    for (const auto& e : g.edges) {
        if (e.from >= n || e.to >= n) throw ModelError("edge endpoint out of range");
        if (e.from == e.to) throw ModelError("self-loop edge at " + g.vertices[e.from]);
        if (e.from == g.goal) throw ModelError("the goal vertex cannot have outgoing edges");
        if (e.options.empty()) throw ModelError("edge without speed options");
        for (const auto& o : e.options) {
            if (!(o.duration > 0.0)) throw ModelError("option durations must be positive");
            if (!(o.success > 0.0 && o.success <= 1.0)) throw ModelError("option success probability must lie in (0,1]");
        }
        reverse[e.to].push_back(e.from);
    }
    std::vector<char> reaches(n, 0);
    std::deque<std::size_t> queue{g.goal};
    reaches[g.goal] = 1;
    while (!queue.empty()) {
        const auto v = queue.front();
        queue.pop_front();
        for (auto w : reverse[v])
            if (!reaches[w]) {
                reaches[w] = 1;
                queue.push_back(w);
            }
    }
    for (std::size_t v = 0; v < n; ++v)
        if (!reaches[v]) throw ModelError("goal is not reachable from vertex " + g.vertices[v]);

    Mdp mdp;
    for (const auto& v : g.vertices) mdp.add_state(v);
    mdp.absorbing = g.goal;
    mdp.initial[g.start] = 1.0;
    for (std::size_t v = 0; v < n; ++v) {
        if (v == g.goal) {
            mdp.add_action(v, "stay", 0.0, {{v, 1.0}});
            continue;
        }
        std::vector<std::string> labels;
        for (const auto& e : g.edges)
            if (e.from == v)
                for (const auto& o : e.options) labels.push_back(o.label);
        for (const auto& e : g.edges) {
            if (e.from != v) continue;
            for (const auto& o : e.options) {
                const bool unique = std::count(labels.begin(), labels.end(), o.label) == 1;
                std::vector<Transition> next{{e.to, o.success}};
                if (o.success < 1.0) next.push_back({v, 1.0 - o.success});
                mdp.add_action(v, unique ? o.label : o.label + "->" + g.vertices[e.to], o.duration, std::move(next));
            }
        }
    }
    return mdp;
}

/**
 * width x height grid with start at the top-left corner and goal at the
 * bottom-right one; every edge points right or down, towards the goal.
 *
 * Each edge draws `options_per_edge` distinct durations from {1, 2, 3} and
 * as many distinct success probabilities from {0.5, 0.8, 0.99}; both are
 * sorted and paired, so a shorter duration always comes with a lower
 * success probability.
 */
inline DeploymentGraph generate_grid_instance(std::size_t width, std::size_t height, std::size_t options_per_edge,
                                              std::uint64_t seed) {
    if (width < 2 || height < 2) throw ModelError("grid needs width and height of at least 2");
    if (options_per_edge < 1 || options_per_edge > 3) throw ModelError("options per edge must be 1, 2 or 3");

    static constexpr std::array<double, 3> durations{1.0, 2.0, 3.0};
    static constexpr std::array<double, 3> successes{0.5, 0.8, 0.99};
    static const std::array<std::string, 3> labels{"fast", "medium", "slow"};

    Uniform01 rng(derive_seed(seed, 0x67726964)); // "grid"
    auto pick = [&](std::size_t k) {
        std::array<std::size_t, 3> idx{0, 1, 2};
        for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(3 - i)]);
        std::vector<std::size_t> chosen(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    };

    DeploymentGraph g;
    auto id = [&](std::size_t r, std::size_t c) { return r * width + c; };
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) g.vertices.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
    g.start = id(0, 0);
    g.goal = id(height - 1, width - 1);

    auto add_edge = [&](std::size_t from, std::size_t to) {
        DeploymentEdge e{from, to, {}};
        const auto dur = pick(options_per_edge);
        const auto suc = pick(options_per_edge);
        for (std::size_t i = 0; i < options_per_edge; ++i)
            e.options.push_back({labels[dur[i]], durations[dur[i]], successes[suc[i]]});
        g.edges.push_back(std::move(e));
    };
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            if (c + 1 < width) add_edge(id(r, c), id(r, c + 1));
            if (r + 1 < height) add_edge(id(r, c), id(r + 1, c));
        }
    return g;
}

} // namespace tcavar
