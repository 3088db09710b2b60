#pragma once

// Fixtures and independent oracles shared by the unit suites and the
// acceptance runner.

#include <easyrca.hpp>

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace easyrca::testing {

inline Ascgl two_group_graph() {
    return Ascgl::validate({"A", "B", "C", "D", "W", "X", "Y", "Z"},
                           {{"Z", "X"}, {"Z", "W"}, {"X", "Y"}, {"W", "Y"}, {"A", "X"}, {"A", "B"}, {"C", "B"},
                            {"B", "D"}, {"C", "D"}},
                           {"A", "B", "C", "D", "W", "X", "Y", "Z"});
}

inline Ascgl diamond_graph() {
    return Ascgl::validate({"W", "X", "Y", "Z"}, {{"Z", "X"}, {"Z", "W"}, {"X", "Y"}, {"W", "Y"}},
                           {"W", "X", "Y", "Z"});
}

inline Ascgl monitoring_graph() {
    return Ascgl::validate({"PMDB", "MDB", "CMB", "MB", "LMB", "RTMB", "GSIB", "ESB"},
                           {{"PMDB", "MDB"}, {"MDB", "CMB"}, {"CMB", "MB"}, {"CMB", "RTMB"}, {"MB", "LMB"},
                            {"MDB", "RTMB"}, {"RTMB", "GSIB"}, {"RTMB", "ESB"}, {"GSIB", "ESB"}},
                           {"PMDB", "MDB", "CMB", "MB", "LMB", "RTMB", "GSIB", "ESB"});
}

/// Random DAG over n nodes: each forward pair of a random order is an edge
/// with probability p.
inline Dag random_dag(std::size_t n, double p, std::mt19937_64& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::bernoulli_distribution edge(p);
    Dag dag(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (edge(rng)) dag.add_edge(order[i], order[j]);
    return dag;
}

/// Random ASCGL with vertices "a", "b", ...; each vertex looped with
/// probability loop_p.
inline Ascgl random_graph(std::size_t n, double edge_p, double loop_p, std::mt19937_64& rng) {
    const auto dag = random_dag(n, edge_p, rng);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.emplace_back(1, static_cast<char>('a' + i));
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t c = 0; c < n; ++c)
        for (auto e : dag.children(c)) edges.emplace_back(names[c], names[e]);
    std::vector<std::string> loops;
    std::bernoulli_distribution loop(loop_p);
    for (const auto& v : names)
        if (loop(rng)) loops.push_back(v);
    return Ascgl::validate(names, edges, loops);
}

/// d-separation by exhaustive enumeration of simple paths in the skeleton.
/// A path is blocked when an inner node is a non-collider in Z, or a collider
/// with neither itself nor a descendant in Z.
inline bool brute_force_d_separated(const Dag& dag, const std::vector<std::size_t>& xs,
                                    const std::vector<std::size_t>& ys, const std::vector<std::size_t>& zs) {
    const std::size_t n = dag.size();
    std::vector<bool> in_z(n, false), in_y(n, false);
    for (auto z : zs) in_z[z] = true;
    for (auto y : ys) in_y[y] = true;
    std::vector<bool> collider_open(n, false);  // node or a descendant in Z
    for (std::size_t v = 0; v < n; ++v) {
        const auto desc = dag.descendants_mask(v);
        for (std::size_t u = 0; u < n; ++u)
            if ((u == v || desc[u]) && in_z[u]) collider_open[v] = true;
    }

    std::vector<std::size_t> path;
    std::vector<bool> on_path(n, false);
    bool connected = false;
    // `arrow_in` says whether the edge used to reach path.back() points into it.
    std::function<void(bool)> extend = [&](bool arrow_in) {
        if (connected) return;
        const auto v = path.back();
        auto step = [&](std::size_t next, bool next_arrow_in, bool leaves_by_head) {
            if (on_path[next] || connected) return;
            if (path.size() >= 2) {
                // v is an inner node: collider iff both edges point into v.
                const bool collider = arrow_in && leaves_by_head;
                if (collider ? !collider_open[v] : in_z[v]) return;
            }
            path.push_back(next);
            on_path[next] = true;
            if (in_y[next])
                connected = true;
            else
                extend(next_arrow_in);
            on_path[next] = false;
            path.pop_back();
        };
        // v -> c leaves v by the tail; p -> v leaves v by the head (arrow into v).
        for (auto c : dag.children(v)) step(c, true, false);
        for (auto p : dag.parents(v)) step(p, false, true);
    };
    // A path starting at x: whether the first edge points into x is irrelevant.
    for (auto x : xs) {
        path.assign(1, x);
        on_path.assign(n, false);
        on_path[x] = true;
        extend(false);
        if (connected) return false;
    }
    return true;
}

/// Lag assignment for an unrolling: random cross lags in 0..gamma_max and
/// loop lags in 1..gamma_max, with optional forced lags.
inline EdgeLags random_lags(const Ascgl& g, int gamma_max, std::mt19937_64& rng,
                            const std::map<Edge, int>& forced = {}) {
    EdgeLags lags;
    std::uniform_int_distribution<int> cross(0, gamma_max), loop(1, gamma_max);
    for (const auto& e : g.edges()) lags[e] = cross(rng);
    for (auto v : g.loops()) lags[{v, v}] = loop(rng);
    for (const auto& [e, l] : forced) lags[e] = l;
    return lags;
}

/// Checks the direct-effect adjustment set on an unrolled window graph: after
/// removing the edge X_{t-g} -> Y_t (if this unrolling has it), the set must
/// d-separate the two.
inline bool direct_set_blocks(const Ascgl& g, VertexId x, VertexId y, int gamma_xy, int gamma_max,
                              const EdgeLags& lags) {
    const int horizon = 3 * gamma_max + 2;
    auto w = unroll(g, gamma_max, lags, horizon);
    const auto adj = direct_effect_adjustment_set(g, x, y, gamma_xy, gamma_max);
    const auto xn = w.node(adj.cause), yn = w.node(adj.effect);
    if (w.dag().has_edge(xn, yn)) w.dag().remove_edge(xn, yn);
    return d_separated(w.dag(), {xn}, {yn}, w.nodes(adj.variables));
}

/// Checks the total-effect adjustment set: with every edge out of X_{t-g}
/// removed, the set must d-separate X_{t-g} and Y_t (all back-door paths blocked).
inline bool total_set_blocks(const Ascgl& g, VertexId x, VertexId y, int gamma_xy, int gamma_max,
                             const EdgeLags& lags) {
    const int horizon = 3 * gamma_max + 2;
    auto w = unroll(g, gamma_max, lags, horizon);
    const auto adj = total_effect_adjustment_set(g, x, y, gamma_xy, gamma_max);
    const auto xn = w.node(adj.cause), yn = w.node(adj.effect);
    const auto children = w.dag().children(xn);
    for (auto c : children) w.dag().remove_edge(xn, c);
    return d_separated(w.dag(), {xn}, {yn}, w.nodes(adj.variables));
}

/// Anomalous set generated the way anomalies arise: the descendant closure
/// of a few randomly intervened vertices.
inline std::vector<VertexId> propagated_anomalies(const Ascgl& g, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> count(1, std::max<std::size_t>(1, g.size() / 3));
    std::uniform_int_distribution<VertexId> pick(0, g.size() - 1);
    std::vector<bool> anomalous(g.size(), false);
    const auto k = count(rng);
    for (std::size_t i = 0; i < k; ++i) {
        const auto v = pick(rng);
        anomalous[v] = true;
        const auto desc = g.loopless().descendants_mask(v);
        for (VertexId u = 0; u < g.size(); ++u)
            if (desc[u]) anomalous[u] = true;
    }
    std::vector<VertexId> out;
    for (VertexId v = 0; v < g.size(); ++v)
        if (anomalous[v]) out.push_back(v);
    return out;
}

}  // namespace easyrca::testing
