#pragma once

#include <easyrca/error.hpp>
#include <easyrca/graph.hpp>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace easyrca {

/// One collective anomaly episode: the anomalous vertices, when each anomaly
/// first appears (sample index into the anomalous regime) and the common
/// interval length.
struct AnomalyEpisode {
    std::map<std::string, long> appearance_time;
    long interval_length = 1;

    [[nodiscard]] bool contains(const std::string& vertex) const { return appearance_time.contains(vertex); }

    [[nodiscard]] long time_of(const std::string& vertex) const {
        auto it = appearance_time.find(vertex);
        if (it == appearance_time.end())
            throw Error(ErrorKind::UnknownVertex, "'" + vertex + "' is not anomalous in this episode");
        return it->second;
    }

    /// Members as graph ids, sorted. Throws UnknownVertex for names the
    /// graph does not declare.
    [[nodiscard]] std::vector<VertexId> members(const Ascgl& graph) const {
        std::vector<VertexId> out;
        out.reserve(appearance_time.size());
        for (const auto& [name, t] : appearance_time) {
            auto id = graph.find(name);
            if (!id) throw Error(ErrorKind::UnknownVertex, "anomalous vertex '" + name + "' is not in the graph");
            out.push_back(*id);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Same episode restricted to `keep`.
    [[nodiscard]] AnomalyEpisode restricted_to(const Ascgl& graph, const std::vector<VertexId>& keep) const {
        AnomalyEpisode out;
        out.interval_length = interval_length;
        for (auto v : keep) out.appearance_time[graph.name(v)] = time_of(graph.name(v));
        return out;
    }
};

inline void validate_episode(const Ascgl& graph, const AnomalyEpisode& episode) {
    if (episode.interval_length <= 0)
        throw Error(ErrorKind::InvalidInput, "interval_length must be positive");
    for (const auto& [name, t] : episode.appearance_time) {
        if (!graph.find(name))
            throw Error(ErrorKind::UnknownVertex, "anomalous vertex '" + name + "' is not in the graph");
        if (t < 0) throw Error(ErrorKind::InvalidInput, "negative appearance time for '" + name + "'");
    }
}

/// A maximal group of anomalous vertices linked by edges among themselves.
struct LinkedAnomalousGraph {
    std::vector<VertexId> members;
    std::vector<Edge> induced_edges;

    [[nodiscard]] bool contains(VertexId v) const { return std::binary_search(members.begin(), members.end(), v); }

    /// Parents of `v` inside this group (loops ignored).
    [[nodiscard]] std::vector<VertexId> parents(VertexId v) const {
        std::vector<VertexId> out;
        for (const auto& [c, e] : induced_edges)
            if (e == v) out.push_back(c);
        return out;
    }

    friend bool operator==(const LinkedAnomalousGraph&, const LinkedAnomalousGraph&) = default;
};

/// Splits the anomalous set into linked anomalous graphs: weakly connected
/// components of the subgraph induced on the anomalous vertices. Paths that
/// leave the anomalous set can always be cut by choosing which normal
/// vertices to condition on, so only connectivity inside the set binds.
[[nodiscard]] inline std::vector<LinkedAnomalousGraph> decompose(const Ascgl& graph,
                                                                 const AnomalyEpisode& episode) {
    const auto members = episode.members(graph);
    std::vector<LinkedAnomalousGraph> out;
    for (auto& component : weakly_connected_components(graph, members)) {
        LinkedAnomalousGraph lag;
        lag.members = std::move(component);
        for (auto c : lag.members)
            for (auto e : graph.children(c))
                if (lag.contains(e)) lag.induced_edges.emplace_back(c, e);
        std::sort(lag.induced_edges.begin(), lag.induced_edges.end());
        out.push_back(std::move(lag));
    }
    return out;
}

/// Members with no parent inside the group.
[[nodiscard]] inline std::vector<VertexId> find_sub_roots(const LinkedAnomalousGraph& lag) {
    std::vector<VertexId> out;
    for (auto v : lag.members)
        if (lag.parents(v).empty()) out.push_back(v);
    return out;
}

/// Non-sub-root members whose anomaly strictly precedes the anomaly of every
/// in-group parent. Ties do not count.
[[nodiscard]] inline std::vector<VertexId> find_time_defying(const Ascgl& graph, const LinkedAnomalousGraph& lag,
                                                             const AnomalyEpisode& episode) {
    std::vector<VertexId> out;
    for (auto y : lag.members) {
        const auto parents = lag.parents(y);
        if (parents.empty()) continue;
        const auto ty = episode.time_of(graph.name(y));
        const bool defies = std::all_of(parents.begin(), parents.end(),
                                        [&](VertexId x) { return ty < episode.time_of(graph.name(x)); });
        if (defies) out.push_back(y);
    }
    return out;
}

}  // namespace easyrca
