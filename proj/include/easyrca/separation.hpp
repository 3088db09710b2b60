#pragma once

#include <easyrca/error.hpp>
#include <easyrca/graph.hpp>

#include <algorithm>
#include <deque>
#include <vector>

namespace easyrca {

/// Exact d-separation test on a DAG (reachability / "Bayes ball").
/// Returns true iff every path between `xs` and `ys` is blocked by `zs`.
[[nodiscard]] inline bool d_separated(const Dag& dag, const std::vector<std::size_t>& xs,
                                      const std::vector<std::size_t>& ys,
                                      const std::vector<std::size_t>& zs) {
    const auto n = dag.size();
    enum Role : unsigned char { None = 0, InX = 1, InY = 2, InZ = 4 };
    std::vector<unsigned char> role(n, None);
    auto mark = [&](const std::vector<std::size_t>& set, Role r) {
        for (auto v : set) {
            if (v >= n) throw Error(ErrorKind::UnknownVertex, "node " + std::to_string(v) + " not in graph");
            if (role[v] & ~r) throw Error(ErrorKind::OverlappingSets, "node " + std::to_string(v) + " in two sets");
            role[v] |= r;
        }
    };
    mark(xs, InX);
    mark(ys, InY);
    mark(zs, InZ);
    if (xs.empty() || ys.empty()) return true;

    // Nodes that are in Z or have a descendant in Z: colliders there are open.
    std::vector<bool> z_ancestor(n, false);
    std::vector<std::size_t> stack(zs.begin(), zs.end());
    for (auto z : zs) z_ancestor[z] = true;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto p : dag.parents(v)) {
            if (!z_ancestor[p]) {
                z_ancestor[p] = true;
                stack.push_back(p);
            }
        }
    }

    // Direction 0: ball arrived from a child (moving up); 1: from a parent.
    std::vector<bool> visited_up(n, false), visited_down(n, false);
    std::deque<std::pair<std::size_t, int>> queue;
    for (auto x : xs) queue.emplace_back(x, 0);
    while (!queue.empty()) {
        const auto [v, dir] = queue.front();
        queue.pop_front();
        auto& visited = dir == 0 ? visited_up : visited_down;
        if (visited[v]) continue;
        visited[v] = true;

        const bool observed = role[v] & InZ;
        if (!observed && (role[v] & InY)) return false;

        if (dir == 0) {
            if (!observed) {
                for (auto p : dag.parents(v)) queue.emplace_back(p, 0);
                for (auto c : dag.children(v)) queue.emplace_back(c, 1);
            }
        } else {
            if (!observed)
                for (auto c : dag.children(v)) queue.emplace_back(c, 1);
            if (z_ancestor[v])
                for (auto p : dag.parents(v)) queue.emplace_back(p, 0);
        }
    }
    return true;
}

struct AscglSeparation {
    bool separated = false;
    /// The conditioning set actually used: parents of both sides in the
    /// loopless projection, minus the two sides themselves.
    std::vector<VertexId> conditioning;
};

/// Separation of two vertex sets of a summary graph under the canonical
/// parent set. `separated == false` means "not separated under that set",
/// which is weaker than d-connection.
[[nodiscard]] inline AscglSeparation d_separated_ascgl(const Ascgl& graph, const std::vector<VertexId>& xs,
                                                       const std::vector<VertexId>& ys) {
    std::vector<bool> in_xy(graph.size(), false);
    for (auto v : xs) {
        if (v >= graph.size()) throw Error(ErrorKind::UnknownVertex, "vertex id out of range");
        in_xy[v] = true;
    }
    for (auto v : ys) {
        if (v >= graph.size()) throw Error(ErrorKind::UnknownVertex, "vertex id out of range");
        if (in_xy[v]) throw Error(ErrorKind::OverlappingSets, graph.name(v) + " is on both sides");
        in_xy[v] = true;
    }

    AscglSeparation out;
    for (const auto* side : {&xs, &ys})
        for (auto v : *side)
            for (auto p : graph.parents(v))
                if (!in_xy[p]) detail::insert_sorted(out.conditioning, p);
    out.separated = d_separated(graph.loopless(), xs, ys, out.conditioning);
    return out;
}

}  // namespace easyrca
