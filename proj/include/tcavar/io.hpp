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

// JSON and CSV formats. Requires nlohmann/json (vendor/json.hpp).

#include "tcavar/baseline.hpp"
#include "tcavar/mdp.hpp"
#include "tcavar/policy.hpp"
#include "tcavar/risk.hpp"
#include "tcavar/scenario.hpp"
#include "tcavar/sim.hpp"
#include "tcavar/solver.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

namespace tcavar::io {

using json = nlohmann::json;

/// Unreadable file, malformed JSON, or a document that does not match its schema.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal form that reads back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("malformed JSON in " + path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

namespace detail {

template <class T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError(std::string("field '") + key + "' has the wrong type");
    }
}

inline StateId state_index(const Mdp& mdp, const std::string& name) {
    auto x = mdp.find_state(name);
    if (!x) throw InputError("unknown state '" + name + "'");
    return *x;
}

inline ActionId action_index(const Mdp& mdp, StateId x, const std::string& name) {
    auto u = mdp.find_action(x, name);
    if (!u) throw InputError("unknown action '" + name + "' at state '" + mdp.state_names[x] + "'");
    return *u;
}

} // namespace detail

// ---------------------------------------------------------------------------
// MDP documents
// ---------------------------------------------------------------------------

/**
 * {states[], absorbing, actions{state: [name]}, transitions[{from, action, to, p}],
 *  costs[{state, action, c}], initial{state: p}}
 *
 * Unlisted transitions have probability 0 and unlisted costs are 0. An
 * absorbing state without declared actions receives the canonical
 * zero-cost self-loop "stay".
 */
inline Mdp mdp_from_json(const json& j) {
    using detail::field;
    Mdp mdp;
    for (const auto& s : field<std::vector<std::string>>(j, "states")) {
        if (mdp.find_state(s)) throw InputError("duplicate state '" + s + "'");
        mdp.add_state(s);
    }
    mdp.absorbing = detail::state_index(mdp, field<std::string>(j, "absorbing"));

    const auto acts = field<std::map<std::string, std::vector<std::string>>>(j, "actions");
    for (const auto& [s, names] : acts) {
        const auto x = detail::state_index(mdp, s);
        for (const auto& a : names) {
            if (mdp.find_action(x, a)) throw InputError("duplicate action '" + a + "' at '" + s + "'");
            mdp.add_action(x, a, 0.0, {});
        }
    }
    if (mdp.actions[mdp.absorbing].empty()) mdp.add_action(mdp.absorbing, "stay", 0.0, {{mdp.absorbing, 1.0}});

    if (j.contains("transitions"))
        for (const auto& t : j.at("transitions")) {
            const auto x = detail::state_index(mdp, field<std::string>(t, "from"));
            const auto u = detail::action_index(mdp, x, field<std::string>(t, "action"));
            const auto y = detail::state_index(mdp, field<std::string>(t, "to"));
            mdp.actions[x][u].next.push_back({y, field<double>(t, "p")});
        }
    if (j.contains("costs"))
        for (const auto& c : j.at("costs")) {
            const auto x = detail::state_index(mdp, field<std::string>(c, "state"));
            const auto u = detail::action_index(mdp, x, field<std::string>(c, "action"));
            mdp.actions[x][u].cost = field<double>(c, "c");
        }
    for (const auto& [s, p] : field<std::map<std::string, double>>(j, "initial"))
        mdp.initial[detail::state_index(mdp, s)] = p;
    return mdp;
}

inline json to_json(const Mdp& mdp) {
    json j;
    j["states"] = mdp.state_names;
    j["absorbing"] = mdp.state_names[mdp.absorbing];
    j["actions"] = json::object();
    j["transitions"] = json::array();
    j["costs"] = json::array();
    j["initial"] = json::object();
    for (StateId x = 0; x < mdp.size(); ++x) {
        auto& names = j["actions"][mdp.state_names[x]] = json::array();
        for (const auto& a : mdp.actions[x]) {
            names.push_back(a.name);
            j["costs"].push_back({{"state", mdp.state_names[x]}, {"action", a.name}, {"c", a.cost}});
            for (const auto& t : a.next)
                j["transitions"].push_back(
                    {{"from", mdp.state_names[x]}, {"action", a.name}, {"to", mdp.state_names[t.to]}, {"p", t.prob}});
        }
        if (mdp.initial[x] != 0.0) j["initial"][mdp.state_names[x]] = mdp.initial[x];
    }
    return j;
}

// ---------------------------------------------------------------------------
// Deployment graphs
// ---------------------------------------------------------------------------

/// {vertices[], start, goal, edges[{from, to, options[{label, duration, p}]}]}
inline DeploymentGraph graph_from_json(const json& j) {
    using detail::field;
    DeploymentGraph g;
    g.vertices = field<std::vector<std::string>>(j, "vertices");
    auto vertex = [&](const std::string& name) {
        auto it = std::find(g.vertices.begin(), g.vertices.end(), name);
        if (it == g.vertices.end()) throw InputError("unknown vertex '" + name + "'");
        return static_cast<std::size_t>(it - g.vertices.begin());
    };
    g.start = vertex(field<std::string>(j, "start"));
    g.goal = vertex(field<std::string>(j, "goal"));
    for (const auto& e : field<json>(j, "edges")) {
        DeploymentEdge edge{vertex(field<std::string>(e, "from")), vertex(field<std::string>(e, "to")), {}};
        for (const auto& o : field<json>(e, "options"))
            edge.options.push_back({field<std::string>(o, "label"), field<double>(o, "duration"), field<double>(o, "p")});
        g.edges.push_back(std::move(edge));
    }
    return g;
}

inline json to_json(const DeploymentGraph& g) {
    json j;
    j["vertices"] = g.vertices;
    j["start"] = g.vertices[g.start];
    j["goal"] = g.vertices[g.goal];
    j["edges"] = json::array();
    for (const auto& e : g.edges) {
        json opts = json::array();
        for (const auto& o : e.options) opts.push_back({{"label", o.label}, {"duration", o.duration}, {"p", o.success}});
        j["edges"].push_back({{"from", g.vertices[e.from]}, {"to", g.vertices[e.to]}, {"options", opts}});
    }
    return j;
}

/// Loads either an MDP document or a deployment graph (recognized by its
/// "edges" field) and returns the MDP.
inline Mdp load_model(const std::string& path) {
    const auto j = read_json_file(path);
    if (j.is_object() && j.contains("edges")) return compile_deployment(graph_from_json(j));
    return mdp_from_json(j);
}

// ---------------------------------------------------------------------------
// Solutions and policies
// ---------------------------------------------------------------------------

struct SolutionSummary {
    double tau = 0.0;
    std::size_t d = 0;
    double zeta = 0.0;
    std::size_t n_levels = 0;
    double s_star = 0.0;
    double objective = 0.0;
    double gap_bound = 0.0;
};

/**
 * {kind: "augmented", tau, d, zeta, n_levels, s_star, objective,
 *  theta: [[cost, prob]...], gap_bound, policy: [{x, y, z, action, prob}...]}
 *
 * Only actions with positive probability are listed.
 */
inline json solution_to_json(const Mdp& mdp, const SolutionSummary& s, const CostDistribution& theta,
                             const AugmentedPolicy& policy) {
    json j;
    j["kind"] = "augmented";
    j["tau"] = s.tau;
    j["d"] = s.d;
    j["zeta"] = s.zeta;
    j["n_levels"] = s.n_levels;
    j["s_star"] = s.s_star;
    j["objective"] = s.objective;
    j["gap_bound"] = s.gap_bound;
    j["theta"] = json::array();
    for (std::size_t i = 0; i < theta.size(); ++i) j["theta"].push_back({theta.support()[i], theta.mass()[i]});
    j["policy"] = json::array();
    for (std::size_t i = 0; i < policy.size(); ++i) {
        const auto& st = policy.state(i);
        const auto probs = policy.probabilities_at(i);
        for (ActionId u = 0; u < probs.size(); ++u)
            if (probs[u] > 0.0)
                j["policy"].push_back({{"x", mdp.state_names[st.x]},
                                       {"y", st.y},
                                       {"z", st.z},
                                       {"action", mdp.actions[st.x][u].name},
                                       {"prob", probs[u]}});
    }
    return j;
}

/// Stationary policies share the schema with y and z absent.
inline json stationary_to_json(const Mdp& mdp, const StationaryPolicy& policy, const json& extra = json::object()) {
    json j = extra;
    j["kind"] = "stationary";
    j["policy"] = json::array();
    for (StateId x = 0; x < mdp.size(); ++x) {
        const auto probs = policy.probabilities(x, 0, 0);
        for (ActionId u = 0; u < probs.size(); ++u)
            if (probs[u] > 0.0)
                j["policy"].push_back({{"x", mdp.state_names[x]}, {"action", mdp.actions[x][u].name}, {"prob", probs[u]}});
    }
    return j;
}

struct LoadedPolicy {
    std::variant<StationaryPolicy, AugmentedPolicy> policy;
    std::optional<std::size_t> d; // horizon stored with an augmented solution
    std::optional<double> tau;
};

inline LoadedPolicy policy_from_json(const json& j, const Mdp& mdp) {
    using detail::field;
    const bool augmented = j.contains("kind") ? field<std::string>(j, "kind") == "augmented"
                                              : (!j.at("policy").empty() && j.at("policy")[0].contains("z"));
    LoadedPolicy out;
    if (j.contains("tau")) out.tau = field<double>(j, "tau");
    if (augmented) {
        Discretization disc{field<double>(j, "zeta"), field<std::size_t>(j, "n_levels"), field<std::size_t>(j, "d"), 1};
        if (!(disc.zeta > 0.0)) throw InputError("zeta must be positive");
        AugmentedPolicy pol(mdp, disc);
        std::map<std::tuple<std::size_t, std::size_t, StateId>, std::vector<double>> table;
        for (const auto& e : field<json>(j, "policy")) {
            const auto x = detail::state_index(mdp, field<std::string>(e, "x"));
            const auto u = detail::action_index(mdp, x, field<std::string>(e, "action"));
            auto& p = table[{field<std::size_t>(e, "z"), field<std::size_t>(e, "y"), x}];
            p.resize(mdp.actions[x].size(), 0.0);
            p[u] += field<double>(e, "prob");
        }
        for (auto& [key, p] : table) {
            const auto& [z, y, x] = key;
            if (y > disc.n_levels || z > disc.d) throw InputError("policy entry outside the discretization range");
            pol.set({x, y, z}, std::move(p));
        }
        out.policy = std::move(pol);
        out.d = disc.d;
    } else {
        std::vector<std::vector<double>> probs(mdp.size());
        std::vector<char> seen(mdp.size(), 0);
        for (const auto& e : field<json>(j, "policy")) {
            const auto x = detail::state_index(mdp, field<std::string>(e, "x"));
            const auto u = detail::action_index(mdp, x, field<std::string>(e, "action"));
            probs[x].resize(mdp.actions[x].size(), 0.0);
            probs[x][u] += field<double>(e, "prob");
            seen[x] = 1;
        }
        // the absorbing state needs no entry
        if (!seen[mdp.absorbing]) probs[mdp.absorbing].assign(1, 1.0);
        for (StateId x = 0; x < mdp.size(); ++x)
            if (probs[x].empty()) throw InputError("stationary policy does not cover state '" + mdp.state_names[x] + "'");
        out.policy = StationaryPolicy(std::move(probs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Two columns: cost,prob.
inline std::string distribution_csv(const CostDistribution& dist) {
    std::ostringstream s;
    s << "cost,prob\n";
    for (std::size_t i = 0; i < dist.size(); ++i)
        s << format_number(dist.support()[i]) << ',' << format_number(dist.mass()[i]) << '\n';
    return s.str();
}

/// Parses the two-column cost,prob format.
inline CostDistribution distribution_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (line != "cost,prob") throw InputError("expected header cost,prob");
    std::vector<CostDistribution::Atom> atoms;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InputError("malformed CSV row: " + line);
        try {
            atoms.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw InputError("malformed CSV row: " + line);
        }
    }
    return CostDistribution::from_atoms(std::move(atoms), 0.0);
}

/// Columns: run,cost,t_star,timeout_flag (t_star empty on timeout).
inline std::string batch_csv(const RolloutBatch& batch) {
    std::ostringstream s;
    s << "run,cost,t_star,timeout_flag\n";
    for (std::size_t i = 0; i < batch.runs(); ++i) {
        const auto& t = batch.absorption_times()[i];
        s << i << ',' << format_number(batch.costs()[i]) << ',';
        if (t) s << *t;
        s << ',' << (t ? 0 : 1) << '\n';
    }
    return s.str();
}

/// Columns: cost_bin,count, where cost_bin = floor(cost / width) * width.
inline std::string histogram_csv(const RolloutBatch& batch, double bin_width = 1.0) {
    if (!(bin_width > 0.0)) throw InputError("histogram bin width must be positive");
    std::map<long long, std::size_t> bins;
    for (double c : batch.costs()) ++bins[static_cast<long long>(std::floor(c / bin_width + 1e-9))];
    std::ostringstream s;
    s << "cost_bin,count\n";
    for (const auto& [b, k] : bins) s << format_number(static_cast<double>(b) * bin_width) << ',' << k << '\n';
    return s.str();
}

} // namespace tcavar::io
