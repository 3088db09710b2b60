#pragma once

#include <easyrca/anomaly.hpp>
#include <easyrca/dataset.hpp>
#include <easyrca/effects.hpp>
#include <easyrca/graph.hpp>
#include <easyrca/report.hpp>

#include <algorithm>
#include <future>
#include <string>
#include <vector>

namespace easyrca {

/// Lag at which the anomaly reached Y after reaching X, clamped at zero.
[[nodiscard]] inline int anomaly_lag(const AnomalyEpisode& episode, const std::string& x, const std::string& y,
                                     int gamma_max) {
    const long lag = std::max(0L, episode.time_of(y) - episode.time_of(x));
    if (lag > gamma_max)
        throw Error(ErrorKind::LagExceedsMax, "anomaly on " + y + " appears " + std::to_string(lag) +
                                                  " samples after " + x + ", beyond gamma_max " +
                                                  std::to_string(gamma_max));
    return static_cast<int>(lag);
}

namespace detail {

/// Root-cause search inside one linked anomalous graph. Datasets are aligned
/// to the graph.
inline LagReport analyze_linked_graph(const Ascgl& graph, const Dataset& normal, const Dataset& anomalous,
                                      const AnomalyEpisode& episode, const LinkedAnomalousGraph& lag,
                                      const EngineConfig& config) {
    LagReport out;
    const auto sub_roots = find_sub_roots(lag);
    const auto time_defying = find_time_defying(graph, lag, episode);
    for (auto v : lag.members) out.members.push_back(graph.name(v));
    for (auto v : sub_roots) out.sub_roots.push_back(graph.name(v));
    for (auto v : time_defying) out.time_defying.push_back(graph.name(v));

    auto graph_identified = [&](VertexId v) {
        return std::binary_search(sub_roots.begin(), sub_roots.end(), v) ||
               std::binary_search(time_defying.begin(), time_defying.end(), v);
    };

    for (auto y : lag.members) {
        if (graph_identified(y)) continue;
        const auto& yname = graph.name(y);
        bool detected = false;
        // Normal parents still enter every regression through the adjustment
        // set; only edges from anomalous parents are tested.
        for (auto x : graph.parents(y)) {
            if (!lag.contains(x)) continue;
            const auto& xname = graph.name(x);
            ++out.edges_tested;

            int first_gamma = 0;
            try {
                first_gamma = anomaly_lag(episode, xname, yname, config.gamma_max);
            } catch (const Error& e) {
                out.diagnostics.push_back({xname, yname, std::nullopt, std::string(to_string(e.kind())), e.what()});
                ++out.edges_failed;
                continue;
            }

            bool any_fit = false;
            for (int g = first_gamma; g <= config.gamma_max; ++g) {
                try {
                    const auto verdict = compare_direct_effects(graph, normal, anomalous, x, y, g, config.gamma_max,
                                                                config.alpha, config.n_chunks);
                    any_fit = true;
                    if (verdict.changed) {
                        out.data_driven.push_back({yname, verdict.classification, xname, g, verdict.coefficients,
                                                   verdict.grubbs_statistic, verdict.grubbs_critical,
                                                   verdict.anomalous_standard_error, verdict.pooled_coefficient});
                        detected = true;
                        break;
                    }
                } catch (const Error& e) {
                    out.diagnostics.push_back({xname, yname, g, std::string(to_string(e.kind())), e.what()});
                }
            }
            if (!any_fit) ++out.edges_failed;
            if (detected) break;
        }
    }
    return out;
}

}  // namespace detail

/// End-to-end root-cause identification: split the anomalies into linked
/// anomalous graphs, take sub-roots and time-defying vertices from structure
/// and timing, then search the remaining vertices for a change of direct
/// effect between the normal and anomalous regimes.
///
/// Per-edge failures (rank-deficient designs, lags beyond gamma_max, ...)
/// are recorded as diagnostics and never abort the run.
[[nodiscard]] inline RootCauseReport easy_rca(const Ascgl& graph, const Dataset& normal, const Dataset& anomalous,
                                              const AnomalyEpisode& episode, const EngineConfig& config) {
    config.validate();
    validate_episode(graph, episode);
    const auto normal_aligned = normal.aligned_to(graph);
    const auto anomalous_aligned = anomalous.aligned_to(graph);
    if (anomalous_aligned.length() < static_cast<std::size_t>(episode.interval_length))
        throw Error(ErrorKind::InvalidInput, "anomalous regime has " + std::to_string(anomalous_aligned.length()) +
                                                 " samples, shorter than the interval length " +
                                                 std::to_string(episode.interval_length));

    const auto lags = decompose(graph, episode);
    RootCauseReport report;
    report.parameters = config;
    report.lags.resize(lags.size());

    auto run = [&](std::size_t i) {
        return detail::analyze_linked_graph(graph, normal_aligned, anomalous_aligned, episode, lags[i], config);
    };
    if (config.parallel && lags.size() > 1) {
        std::vector<std::future<LagReport>> futures;
        for (std::size_t i = 0; i < lags.size(); ++i) futures.push_back(std::async(std::launch::async, run, i));
        for (std::size_t i = 0; i < lags.size(); ++i) report.lags[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < lags.size(); ++i) report.lags[i] = run(i);
    }
    return report;
}

}  // namespace easyrca
