#pragma once

#include <easyrca/error.hpp>

#include <algorithm>
#include <compare>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace easyrca {

using VertexId = std::size_t;
using Edge = std::pair<VertexId, VertexId>;

namespace detail {

inline void insert_sorted(std::vector<std::size_t>& v, std::size_t x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
}

inline void erase_sorted(std::vector<std::size_t>& v, std::size_t x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) v.erase(it);
}

}  // namespace detail

/// Plain directed graph over nodes 0..n-1 without self-loops. Used both for the
/// loopless projection of a summary graph and for window graphs.
class Dag {
public:
    Dag() = default;
    explicit Dag(std::size_t n) : parents_(n), children_(n) {}

    [[nodiscard]] std::size_t size() const noexcept { return parents_.size(); }

    void add_edge(std::size_t from, std::size_t to) {
        check(from);
        check(to);
        if (from == to) throw Error(ErrorKind::InvalidInput, "self-loop in a DAG");
        detail::insert_sorted(children_[from], to);
        detail::insert_sorted(parents_[to], from);
    }

    void remove_edge(std::size_t from, std::size_t to) {
        check(from);
        check(to);
        detail::erase_sorted(children_[from], to);
        detail::erase_sorted(parents_[to], from);
    }

    [[nodiscard]] bool has_edge(std::size_t from, std::size_t to) const {
        check(from);
        check(to);
        return std::binary_search(children_[from].begin(), children_[from].end(), to);
    }

    [[nodiscard]] const std::vector<std::size_t>& parents(std::size_t v) const {
        check(v);
        return parents_[v];
    }

    [[nodiscard]] const std::vector<std::size_t>& children(std::size_t v) const {
        check(v);
        return children_[v];
    }

    [[nodiscard]] std::size_t edge_count() const noexcept {
        std::size_t n = 0;
        for (const auto& c : children_) n += c.size();
        return n;
    }

    /// Kahn's algorithm; empty optional when a directed cycle exists.
    [[nodiscard]] std::optional<std::vector<std::size_t>> topological_order() const {
        std::vector<std::size_t> indegree(size());
        for (std::size_t v = 0; v < size(); ++v) indegree[v] = parents_[v].size();
        std::deque<std::size_t> ready;
        for (std::size_t v = 0; v < size(); ++v)
            if (indegree[v] == 0) ready.push_back(v);
        std::vector<std::size_t> order;
        order.reserve(size());
        while (!ready.empty()) {
            const auto v = ready.front();
            ready.pop_front();
            order.push_back(v);
            for (auto c : children_[v])
                if (--indegree[c] == 0) ready.push_back(c);
        }
        if (order.size() != size()) return std::nullopt;
        return order;
    }

    [[nodiscard]] bool is_acyclic() const { return topological_order().has_value(); }

    /// Nodes reachable from `from` by directed paths, `from` included.
    [[nodiscard]] std::vector<bool> descendants_mask(std::size_t from) const {
        std::vector<bool> seen(size(), false);
        std::vector<std::size_t> stack{from};
        seen[from] = true;
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (auto c : children_[v]) {
                if (!seen[c]) {
                    seen[c] = true;
                    stack.push_back(c);
                }
            }
        }
        return seen;
    }

    friend bool operator==(const Dag&, const Dag&) = default;

private:
    void check(std::size_t v) const {
        if (v >= size())
            throw Error(ErrorKind::UnknownVertex, "node " + std::to_string(v) + " not in graph");
    }

    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
};

/// Acyclic summary causal graph with loops. Vertices are kept in lexicographic
/// order; self-loops live in a separate flag set so that `cross` edges always
/// form a DAG. Immutable once validated.
class Ascgl {
public:
    Ascgl() = default;

    /// Builds and validates a graph. Self-loops given as edges are moved into
    /// the loop set. Duplicate vertex names collapse.
    static Ascgl validate(std::vector<std::string> vertices,
                          const std::vector<std::pair<std::string, std::string>>& edges,
                          const std::vector<std::string>& loops) {
        for (const auto& v : vertices)
            if (v.empty()) throw Error(ErrorKind::InvalidInput, "empty vertex name");
        std::sort(vertices.begin(), vertices.end());
        vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());

        Ascgl g;
        g.names_ = std::move(vertices);
        g.cross_ = Dag(g.names_.size());
        g.loops_.assign(g.names_.size(), false);

        for (const auto& [cause, effect] : edges) {
            const auto c = g.lookup(cause, "edge cause");
            const auto e = g.lookup(effect, "edge effect");
            if (c == e)
                g.loops_[c] = true;
            else
                g.cross_.add_edge(c, e);
        }
        for (const auto& l : loops) g.loops_[g.lookup(l, "loop")] = true;

        if (!g.cross_.is_acyclic()) {
            throw Error(ErrorKind::CyclicGraph,
                        "directed cycle through " + g.names_[g.vertex_on_cycle()]);
        }
        return g;
    }

    [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }

    [[nodiscard]] const std::string& name(VertexId v) const {
        check(v);
        return names_[v];
    }

    [[nodiscard]] std::optional<VertexId> find(std::string_view name) const {
        auto it = std::lower_bound(names_.begin(), names_.end(), name);
        if (it == names_.end() || *it != name) return std::nullopt;
        return static_cast<VertexId>(it - names_.begin());
    }

    [[nodiscard]] VertexId id(std::string_view name) const { return lookup(name, "vertex"); }

    [[nodiscard]] bool has_edge(VertexId cause, VertexId effect) const {
        return cross_.has_edge(cause, effect);
    }

    [[nodiscard]] bool has_loop(VertexId v) const {
        check(v);
        return loops_[v];
    }

    /// Cross-edge parents, sorted; never includes `v` itself.
    [[nodiscard]] const std::vector<VertexId>& parents(VertexId v) const { return cross_.parents(v); }
    [[nodiscard]] const std::vector<VertexId>& children(VertexId v) const { return cross_.children(v); }

    [[nodiscard]] std::vector<VertexId> parents(VertexId v, bool include_self) const {
        auto p = cross_.parents(v);
        if (include_self && loops_[v]) detail::insert_sorted(p, v);
        return p;
    }

    [[nodiscard]] std::vector<std::string> parents(std::string_view v, bool include_self) const {
        std::vector<std::string> out;
        for (auto p : parents(id(v), include_self)) out.push_back(names_[p]);
        return out;
    }

    [[nodiscard]] std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (VertexId c = 0; c < size(); ++c)
            for (auto e : cross_.children(c)) out.emplace_back(c, e);
        return out;
    }

    [[nodiscard]] std::vector<VertexId> loops() const {
        std::vector<VertexId> out;
        for (VertexId v = 0; v < size(); ++v)
            if (loops_[v]) out.push_back(v);
        return out;
    }

    /// The DAG obtained by omitting loops.
    [[nodiscard]] const Dag& loopless() const noexcept { return cross_; }

    [[nodiscard]] std::vector<VertexId> topological_order() const { return *cross_.topological_order(); }

    friend bool operator==(const Ascgl&, const Ascgl&) = default;

private:
    void check(VertexId v) const {
        if (v >= size())
            throw Error(ErrorKind::UnknownVertex, "vertex id " + std::to_string(v) + " not in graph");
    }

    VertexId lookup(std::string_view name, std::string_view role) const {
        if (auto v = find(name)) return *v;
        throw Error(ErrorKind::UnknownVertex,
                    std::string(role) + " '" + std::string(name) + "' is not a declared vertex");
    }

    VertexId vertex_on_cycle() const {
        // Vertices left after peeling sources/sinks sit on or between cycles.
        std::vector<std::size_t> indeg(size());
        for (VertexId v = 0; v < size(); ++v) indeg[v] = cross_.parents(v).size();
        std::vector<bool> removed(size(), false);
        bool progress = true;
        while (progress) {
            progress = false;
            for (VertexId v = 0; v < size(); ++v) {
                if (!removed[v] && indeg[v] == 0) {
                    removed[v] = true;
                    progress = true;
                    for (auto c : cross_.children(v)) --indeg[c];
                }
            }
        }
        for (VertexId v = 0; v < size(); ++v)
            if (!removed[v]) return v;
        return 0;
    }

    std::vector<std::string> names_;
    Dag cross_;
    std::vector<bool> loops_;
};

/// A vertex observed `lag` samples before the reference time t.
struct LaggedVariable {
    VertexId vertex = 0;
    int lag = 0;

    friend auto operator<=>(const LaggedVariable&, const LaggedVariable&) = default;
};

/// Lag of every cross edge (cause, effect) and of every loop, keyed (v, v).
using EdgeLags = std::map<Edge, int>;

[[nodiscard]] inline EdgeLags uniform_lags(const Ascgl& graph, int cross_lag, int loop_lag) {
    EdgeLags lags;
    for (const auto& e : graph.edges()) lags[e] = cross_lag;
    for (auto v : graph.loops()) lags[{v, v}] = loop_lag;
    return lags;
}

/// Finite window causal graph: node (v, k) stands for v at time t-k, for
/// k in 0..horizon. Every node is materialized, used or not.
class WindowGraph {
public:
    WindowGraph() = default;
    WindowGraph(std::vector<std::string> names, int gamma_max, int horizon)
        : names_(std::move(names)), gamma_max_(gamma_max), horizon_(horizon),
          dag_(names_.size() * static_cast<std::size_t>(horizon + 1)) {}

    [[nodiscard]] std::size_t vertex_count() const noexcept { return names_.size(); }
    [[nodiscard]] int gamma_max() const noexcept { return gamma_max_; }
    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] const Dag& dag() const noexcept { return dag_; }
    [[nodiscard]] Dag& dag() noexcept { return dag_; }

    [[nodiscard]] std::size_t node(LaggedVariable v) const {
        if (v.vertex >= names_.size()) throw Error(ErrorKind::UnknownVertex, "vertex id out of range");
        if (v.lag < 0 || v.lag > horizon_)
            throw Error(ErrorKind::LagOutOfRange, "lag " + std::to_string(v.lag) + " outside window");
        return static_cast<std::size_t>(v.lag) * names_.size() + v.vertex;
    }

    [[nodiscard]] LaggedVariable variable(std::size_t node) const {
        return {node % names_.size(), static_cast<int>(node / names_.size())};
    }

    [[nodiscard]] std::vector<std::size_t> nodes(const std::vector<LaggedVariable>& vars) const {
        std::vector<std::size_t> out;
        out.reserve(vars.size());
        for (const auto& v : vars) out.push_back(node(v));
        return out;
    }

    /// Drop lags and deduplicate edges; same-vertex edges become loops.
    [[nodiscard]] Ascgl contract() const {
        std::vector<std::pair<std::string, std::string>> edges;
        std::set<Edge> seen;
        for (std::size_t n = 0; n < dag_.size(); ++n) {
            for (auto c : dag_.children(n)) {
                const Edge e{variable(n).vertex, variable(c).vertex};
                if (seen.insert(e).second) edges.emplace_back(names_[e.first], names_[e.second]);
            }
        }
        return Ascgl::validate(names_, edges, {});
    }

private:
    std::vector<std::string> names_;
    int gamma_max_ = 0;
    int horizon_ = 0;
    Dag dag_;
};

/// Unrolls a summary graph into its window graph. Each cross edge carries one
/// lag in [0, gamma_max], each loop one lag in [1, gamma_max]. `horizon`
/// (default gamma_max) sets how many past slices are materialized.
[[nodiscard]] inline WindowGraph unroll(const Ascgl& graph, int gamma_max, const EdgeLags& lag_of,
                                        std::optional<int> horizon = std::nullopt) {
    const int h = horizon.value_or(gamma_max);
    if (gamma_max < 0) throw Error(ErrorKind::LagOutOfRange, "gamma_max must be >= 0");
    if (h < gamma_max) throw Error(ErrorKind::LagOutOfRange, "horizon shorter than gamma_max");

    for (const auto& [edge, lag] : lag_of) {
        const bool is_loop = edge.first == edge.second;
        if (is_loop ? !graph.has_loop(edge.first) : !graph.has_edge(edge.first, edge.second))
            throw Error(ErrorKind::NoSuchEdge, "lag declared for " + graph.name(edge.first) + "->" +
                                                   graph.name(edge.second) + " which is not in the graph");
    }

    WindowGraph w(graph.names(), gamma_max, h);
    auto add = [&](VertexId cause, VertexId effect, int min_lag) {
        auto it = lag_of.find({cause, effect});
        if (it == lag_of.end())
            throw Error(ErrorKind::LagOutOfRange,
                        "no lag declared for " + graph.name(cause) + "->" + graph.name(effect));
        const int lag = it->second;
        if (lag < min_lag || lag > gamma_max)
            throw Error(ErrorKind::LagOutOfRange, "lag " + std::to_string(lag) + " for " + graph.name(cause) +
                                                      "->" + graph.name(effect) + " outside [" +
                                                      std::to_string(min_lag) + ", " +
                                                      std::to_string(gamma_max) + "]");
        for (int b = 0; b + lag <= h; ++b)
            w.dag().add_edge(w.node({cause, b + lag}), w.node({effect, b}));
    };
    for (const auto& [c, e] : graph.edges()) add(c, e, 0);
    for (auto v : graph.loops()) add(v, v, 1);
    return w;
}

/// Partition of `keep` into weakly connected pieces of the induced subgraph
/// (direction and loops ignored). Pieces are sorted, ordered by smallest member.
[[nodiscard]] inline std::vector<std::vector<VertexId>> weakly_connected_components(
    const Ascgl& graph, const std::vector<VertexId>& keep) {
    std::vector<bool> in_keep(graph.size(), false);
    for (auto v : keep) {
        if (v >= graph.size()) throw Error(ErrorKind::UnknownVertex, "vertex id out of range");
        in_keep[v] = true;
    }
    std::vector<bool> visited(graph.size(), false);
    std::vector<std::vector<VertexId>> components;
    for (VertexId start = 0; start < graph.size(); ++start) {
        if (!in_keep[start] || visited[start]) continue;
        std::vector<VertexId> component;
        std::vector<VertexId> stack{start};
        visited[start] = true;
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            component.push_back(v);
            auto visit = [&](VertexId u) {
                if (in_keep[u] && !visited[u]) {
                    visited[u] = true;
                    stack.push_back(u);
                }
            };
            for (auto p : graph.parents(v)) visit(p);
            for (auto c : graph.children(v)) visit(c);
        }
        std::sort(component.begin(), component.end());
        components.push_back(std::move(component));
    }
    return components;
}

}  // namespace easyrca
