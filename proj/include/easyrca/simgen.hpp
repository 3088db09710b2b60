#pragma once

#include <easyrca/anomaly.hpp>
#include <easyrca/dataset.hpp>
#include <easyrca/engine.hpp>
#include <easyrca/error.hpp>
#include <easyrca/graph.hpp>
#include <easyrca/report.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace easyrca {

using Rng = std::mt19937_64;

struct SimConfig {
    int n_vertices = 6;
    int degree_min = 4;  // bounds on the largest total (in + out) cross degree
    int degree_max = 5;
    int n_graphs = 30;
    int edge_lag = 1;
    double noise_scale = 0.1;
    double coeff_low = 0.1;
    double coeff_high = 1.0;
    std::vector<int> anomaly_sizes{100, 200, 500, 1000, 2000};
    std::uint64_t seed = 0;
    int burn_in = 150;

    void validate() const {
        if (n_vertices < 2) throw Error(ErrorKind::InvalidInput, "n_vertices must be >= 2");
        if (n_graphs < 1) throw Error(ErrorKind::InvalidInput, "n_graphs must be >= 1");
        if (edge_lag < 0) throw Error(ErrorKind::InvalidInput, "edge_lag must be >= 0");
        if (!(coeff_low > 0.0) || coeff_high < coeff_low)
            throw Error(ErrorKind::InvalidInput, "need 0 < coeff_low <= coeff_high");
        if (noise_scale < 0.0) throw Error(ErrorKind::InvalidInput, "noise_scale must be >= 0");
        if (burn_in < 0) throw Error(ErrorKind::InvalidInput, "burn_in must be >= 0");
        for (int s : anomaly_sizes)
            if (s <= 0) throw Error(ErrorKind::InvalidInput, "anomaly sizes must be positive");
    }
};

enum class InterventionType { Structural, Parametric };

[[nodiscard]] constexpr std::string_view to_string(InterventionType t) noexcept {
    return t == InterventionType::Structural ? "structural" : "parametric";
}

struct GroundTruth {
    std::set<std::string> intervened;
    std::map<std::string, InterventionType> intervention_type;
    std::map<std::string, long> start_times;
};

/// Derives independent stream seeds from a base seed (splitmix64 finalizer).
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

inline std::vector<std::string> sim_vertex_names(int n) {
    const auto width = std::to_string(n - 1).size();
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) {
        auto digits = std::to_string(i);
        names.push_back("V" + std::string(width - digits.size(), '0') + digits);
    }
    return names;
}

}  // namespace detail

/// Random ASCGL with exactly one root (no incoming cross edge), a loop on
/// every vertex, and largest total cross degree within
/// [degree_min, degree_max].
[[nodiscard]] inline Ascgl random_ascgl(const SimConfig& cfg, Rng& rng) {
    if (cfg.n_vertices < 2) throw Error(ErrorKind::GenerationFailed, "need at least 2 vertices");
    if (cfg.degree_max < 1 || cfg.degree_max < cfg.degree_min)
        throw Error(ErrorKind::GenerationFailed, "degree bounds admit no connected graph");
    const int n = cfg.n_vertices;
    const auto names = detail::sim_vertex_names(n);

    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const int cap = std::uniform_int_distribution<int>(std::max(cfg.degree_min, 1), cfg.degree_max)(rng);

        std::vector<int> degree(static_cast<std::size_t>(n), 0);
        std::set<std::pair<int, int>> edges;  // positions in `order`, earlier -> later
        bool ok = true;
        for (int j = 1; j < n && ok; ++j) {
            std::vector<int> candidates;
            for (int i = 0; i < j; ++i)
                if (degree[static_cast<std::size_t>(i)] < cap) candidates.push_back(i);
            if (candidates.empty()) {
                ok = false;
                break;
            }
            const int i = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
            edges.insert({i, j});
            ++degree[static_cast<std::size_t>(i)];
            ++degree[static_cast<std::size_t>(j)];
        }
        if (!ok) continue;

        std::vector<std::pair<int, int>> extra;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (!edges.contains({i, j})) extra.emplace_back(i, j);
        std::shuffle(extra.begin(), extra.end(), rng);
        std::bernoulli_distribution coin(0.5);
        for (const auto& [i, j] : extra) {
            if (degree[static_cast<std::size_t>(i)] < cap && degree[static_cast<std::size_t>(j)] < cap && coin(rng)) {
                edges.insert({i, j});
                ++degree[static_cast<std::size_t>(i)];
                ++degree[static_cast<std::size_t>(j)];
            }
        }
        const int max_degree = *std::max_element(degree.begin(), degree.end());
        if (max_degree < cfg.degree_min || max_degree > cfg.degree_max) continue;

        std::vector<std::pair<std::string, std::string>> named;
        for (const auto& [i, j] : edges)
            named.emplace_back(names[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])],
                               names[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
        return Ascgl::validate(names, named, names);
    }
    throw Error(ErrorKind::GenerationFailed, "no graph met the degree constraints after 1000 attempts");
}

/// Coefficient per cross edge and per loop (keyed (v, v)).
using Coefficients = std::map<Edge, double>;

[[nodiscard]] inline Coefficients draw_coefficients(const Ascgl& graph, double low, double high, Rng& rng) {
    std::uniform_real_distribution<double> u(low, high);
    Coefficients c;
    for (const auto& e : graph.edges()) c[e] = u(rng);
    for (auto v : graph.loops()) c[{v, v}] = u(rng);
    return c;
}

/// Linear SCM over an ASCGL: every window-graph parent enters with a single
/// lag (`edge_lag` for cross edges, max(edge_lag, 1) for loops) and Gaussian
/// noise scaled by `noise_scale`. Noise is drawn once, so interventions only
/// touch the intervened vertex and its descendants.
class Scm {
public:
    struct Options {
        int edge_lag = 1;
        double noise_scale = 0.1;
        std::size_t burn_in = 150;
    };

    Scm(Ascgl graph, Coefficients coefficients, std::size_t length, Options options, Rng& rng)
        : graph_(std::move(graph)), coefficients_(std::move(coefficients)), options_(options), length_(length) {
        for (const auto& e : graph_.edges())
            if (!coefficients_.contains(e)) throw Error(ErrorKind::InvalidInput, "missing coefficient for an edge");
        for (auto v : graph_.loops())
            if (!coefficients_.contains({v, v})) throw Error(ErrorKind::InvalidInput, "missing coefficient for a loop");
        std::normal_distribution<double> normal(0.0, 1.0);
        const std::size_t total = options_.burn_in + length_;
        noise_.assign(graph_.size(), std::vector<double>(total));
        for (auto& column : noise_)
            for (auto& x : column) x = normal(rng);
        regenerate();
    }

    [[nodiscard]] const Ascgl& graph() const noexcept { return graph_; }
    [[nodiscard]] const Coefficients& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] const Dataset& data() const noexcept { return data_; }
    [[nodiscard]] const GroundTruth& truth() const noexcept { return truth_; }
    [[nodiscard]] std::size_t length() const noexcept { return length_; }

    /// Replace `vertex` on [start, start+size) by i.i.d. Exp(rate 2) draws;
    /// descendants follow through the SCM.
    void inject_structural(VertexId vertex, std::size_t start, std::size_t size, Rng& rng) {
        check_window(vertex, start, size);
        Override o{vertex, start, size, InterventionType::Structural, {}, {}};
        std::exponential_distribution<double> exp2(2.0);
        o.replacement.resize(size);
        for (auto& x : o.replacement) x = exp2(rng);
        apply(std::move(o));
    }

    /// Regenerate `vertex` on [start, start+size) with fresh coefficients
    /// drawn from U(low, high) for each of its incoming edges and its loop.
    void inject_parametric(VertexId vertex, std::size_t start, std::size_t size, double low, double high, Rng& rng) {
        check_window(vertex, start, size);
        if (graph_.parents(vertex).empty())
            throw Error(ErrorKind::NoParents, graph_.name(vertex) + " has no parents to re-weight");
        std::uniform_real_distribution<double> u(low, high);
        Coefficients fresh;
        for (auto p : graph_.parents(vertex)) fresh[{p, vertex}] = u(rng);
        if (graph_.has_loop(vertex)) fresh[{vertex, vertex}] = u(rng);
        inject_parametric(vertex, start, size, std::move(fresh));
    }

    /// Same with caller-chosen coefficients; edges not listed keep their
    /// normal-regime value.
    void inject_parametric(VertexId vertex, std::size_t start, std::size_t size, Coefficients fresh) {
        check_window(vertex, start, size);
        if (graph_.parents(vertex).empty())
            throw Error(ErrorKind::NoParents, graph_.name(vertex) + " has no parents to re-weight");
        for (const auto& [e, c] : fresh)
            if (e.second != vertex || !coefficients_.contains(e))
                throw Error(ErrorKind::NoSuchEdge, "coefficient given for an edge not into " + graph_.name(vertex));
        Override o{vertex, start, size, InterventionType::Parametric, {}, coefficients_};
        for (const auto& [e, c] : fresh) o.coefficients[e] = c;
        apply(std::move(o));
    }

private:
    struct Override {
        VertexId vertex;
        std::size_t start;
        std::size_t size;
        InterventionType type;
        std::vector<double> replacement;
        Coefficients coefficients;
    };

    void check_window(VertexId vertex, std::size_t start, std::size_t size) const {
        (void)graph_.name(vertex);
        if (start + size > length_ || start > length_)
            throw Error(ErrorKind::WindowOutOfRange, "intervention window [" + std::to_string(start) + ", " +
                                                         std::to_string(start + size) + ") outside data of length " +
                                                         std::to_string(length_));
    }

    void apply(Override o) {
        if (o.size == 0) return;
        const auto& name = graph_.name(o.vertex);
        truth_.intervened.insert(name);
        truth_.intervention_type[name] = o.type;
        truth_.start_times[name] = static_cast<long>(o.start);
        overrides_.push_back(std::move(o));
        regenerate();
    }

    const Override* active(VertexId v, std::size_t s) const {
        for (const auto& o : overrides_)
            if (o.vertex == v && s >= o.start && s < o.start + o.size) return &o;
        return nullptr;
    }

    void regenerate() {
        const std::size_t total = options_.burn_in + length_;
        const auto cross_lag = static_cast<std::size_t>(options_.edge_lag);
        const auto loop_lag = static_cast<std::size_t>(std::max(options_.edge_lag, 1));
        std::vector<std::vector<double>> x(graph_.size(), std::vector<double>(total, 0.0));
        const auto order = graph_.topological_order();
        for (std::size_t t = 0; t < total; ++t) {
            for (auto v : order) {
                const Override* o = t >= options_.burn_in ? active(v, t - options_.burn_in) : nullptr;
                if (o && o->type == InterventionType::Structural) {
                    x[v][t] = o->replacement[t - options_.burn_in - o->start];
                    continue;
                }
                const auto& coeffs = o ? o->coefficients : coefficients_;
                double value = 0.0;
                for (auto p : graph_.parents(v))
                    if (t >= cross_lag) value += coeffs.at({p, v}) * x[p][t - cross_lag];
                if (graph_.has_loop(v) && t >= loop_lag) value += coeffs.at({v, v}) * x[v][t - loop_lag];
                x[v][t] = value + options_.noise_scale * noise_[v][t];
            }
        }
        for (auto& column : x) column.erase(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(options_.burn_in));
        data_ = Dataset(graph_.names(), std::move(x), Regime::Normal);
    }

    Ascgl graph_;
    Coefficients coefficients_;
    Options options_;
    std::size_t length_ = 0;
    std::vector<std::vector<double>> noise_;
    std::vector<Override> overrides_;
    Dataset data_;
    GroundTruth truth_;
};

[[nodiscard]] inline Scm simulate_scm(const Ascgl& graph, std::size_t length, const Coefficients& coefficients,
                                      Rng& rng, Scm::Options options = {}) {
    return Scm(graph, coefficients, length, options, rng);
}

/// Copying variants: the source system is left untouched.
[[nodiscard]] inline Scm inject_structural(Scm scm, VertexId vertex, std::size_t start, std::size_t size, Rng& rng) {
    scm.inject_structural(vertex, start, size, rng);
    return scm;
}

[[nodiscard]] inline Scm inject_parametric(Scm scm, VertexId vertex, std::size_t start, std::size_t size, Rng& rng,
                                           double low = 0.1, double high = 1.0) {
    scm.inject_parametric(vertex, start, size, low, high, rng);
    return scm;
}

/// F1 of predicted vs true root causes; 1 when both are empty.
[[nodiscard]] inline double f1_score(const std::set<std::string>& predicted, const std::set<std::string>& truth) {
    if (predicted.empty() && truth.empty()) return 1.0;
    if (predicted.empty() || truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& p : predicted) hits += truth.contains(p) ? 1 : 0;
    if (hits == 0) return 0.0;
    const double precision = static_cast<double>(hits) / static_cast<double>(predicted.size());
    const double recall = static_cast<double>(hits) / static_cast<double>(truth.size());
    return 2.0 * precision * recall / (precision + recall);
}

/// Shortest directed-path length (in edges) from `source` to every vertex;
/// unreachable vertices get nullopt.
[[nodiscard]] inline std::vector<std::optional<long>> hop_distances(const Ascgl& graph, VertexId source) {
    std::vector<std::optional<long>> dist(graph.size());
    std::deque<VertexId> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        const auto v = queue.front();
        queue.pop_front();
        for (auto c : graph.children(v)) {
            if (!dist[c]) {
                dist[c] = *dist[v] + 1;
                queue.push_back(c);
            }
        }
    }
    return dist;
}

struct Intervention {
    VertexId vertex;
    InterventionType type;
};

struct SimulatedEpisode {
    Dataset normal;
    Dataset anomalous;
    AnomalyEpisode episode;
    GroundTruth truth;  // start times relative to the anomalous regime
};

/// Simulates `normal_length` normal samples followed by `size` anomalous
/// ones. Each intervention starts when anomalies from intervened ancestors
/// reach it (or at the start of the anomalous regime if there are none) and
/// lasts until the end of the data. Every vertex reachable from an
/// intervened one is anomalous, with its earliest arrival time.
[[nodiscard]] inline SimulatedEpisode simulate_episode(const Ascgl& graph, const Coefficients& coefficients,
                                                       std::vector<Intervention> interventions,
                                                       std::size_t normal_length, std::size_t size,
                                                       const SimConfig& cfg, Rng& rng) {
    const auto order = graph.topological_order();
    std::vector<std::size_t> rank(graph.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    std::sort(interventions.begin(), interventions.end(),
              [&](const Intervention& a, const Intervention& b) { return rank[a.vertex] < rank[b.vertex]; });
    for (std::size_t i = 1; i < interventions.size(); ++i)
        if (interventions[i].vertex == interventions[i - 1].vertex)
            throw Error(ErrorKind::InvalidInput, graph.name(interventions[i].vertex) + " intervened on twice");

    Scm scm(graph, coefficients, normal_length + size,
            {cfg.edge_lag, cfg.noise_scale, static_cast<std::size_t>(cfg.burn_in)}, rng);

    constexpr long unreached = std::numeric_limits<long>::max();
    std::vector<long> arrival(graph.size(), unreached);
    for (const auto& iv : interventions) {
        const long start = arrival[iv.vertex] == unreached ? 0 : arrival[iv.vertex];
        const std::size_t len = static_cast<std::size_t>(start) < size ? size - static_cast<std::size_t>(start) : 0;
        if (iv.type == InterventionType::Structural)
            scm.inject_structural(iv.vertex, normal_length + static_cast<std::size_t>(start), len, rng);
        else
            scm.inject_parametric(iv.vertex, normal_length + static_cast<std::size_t>(start), len, cfg.coeff_low,
                                  cfg.coeff_high, rng);
        const auto dist = hop_distances(graph, iv.vertex);
        for (VertexId v = 0; v < graph.size(); ++v)
            if (dist[v]) arrival[v] = std::min(arrival[v], start + *dist[v] * cfg.edge_lag);
    }

    SimulatedEpisode out;
    out.normal = scm.data().slice(0, normal_length, Regime::Normal);
    out.anomalous = scm.data().slice(normal_length, normal_length + size, Regime::Anomalous);
    out.episode.interval_length = static_cast<long>(size);
    for (VertexId v = 0; v < graph.size(); ++v)
        if (arrival[v] != unreached && arrival[v] < static_cast<long>(size))
            out.episode.appearance_time[graph.name(v)] = arrival[v];
    out.truth = scm.truth();
    for (auto& [name, start] : out.truth.start_times) start -= static_cast<long>(normal_length);
    return out;
}

/// One simulated episode: graph, both regimes, the anomaly episode and the
/// interventions that produced it.
struct BenchmarkCase {
    Ascgl graph;
    Coefficients coefficients;
    Dataset normal;
    Dataset anomalous;
    AnomalyEpisode episode;
    GroundTruth truth;
    std::string root;
    std::string target;
};

/// Builds case `graph_index` of the simulated protocol: the root (structural)
/// and one random non-root vertex are intervened on, the latter starting when
/// the root's anomaly reaches it, so no vertex is time-defying. The normal
/// regime holds exactly n_chunks anomaly-sized chunks.
[[nodiscard]] inline BenchmarkCase make_benchmark_case(const SimConfig& cfg, const EngineConfig& engine,
                                                       int graph_index, int size, InterventionType type) {
    cfg.validate();
    const auto graph_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(graph_index));
    Rng graph_rng(graph_seed);
    BenchmarkCase c;
    c.graph = random_ascgl(cfg, graph_rng);
    c.coefficients = draw_coefficients(c.graph, cfg.coeff_low, cfg.coeff_high, graph_rng);

    VertexId root = 0;
    std::vector<VertexId> non_roots;
    for (VertexId v = 0; v < c.graph.size(); ++v) {
        if (c.graph.parents(v).empty())
            root = v;
        else
            non_roots.push_back(v);
    }
    const VertexId target =
        non_roots[std::uniform_int_distribution<std::size_t>(0, non_roots.size() - 1)(graph_rng)];
    c.root = c.graph.name(root);
    c.target = c.graph.name(target);

    const auto stream = (static_cast<std::uint64_t>(size) << 2) | (type == InterventionType::Structural ? 0 : 1);
    Rng rng(derive_seed(graph_seed, stream));
    const auto len = static_cast<std::size_t>(size);
    auto sim = simulate_episode(c.graph, c.coefficients,
                                {{root, InterventionType::Structural}, {target, type}},
                                static_cast<std::size_t>(engine.n_chunks) * len, len, cfg, rng);
    c.normal = std::move(sim.normal);
    c.anomalous = std::move(sim.anomalous);
    c.episode = std::move(sim.episode);
    c.truth = std::move(sim.truth);
    return c;
}

/// F1 on the part of the answer the graph alone cannot give: sub-roots and
/// time-defying vertices are removed from both sides.
[[nodiscard]] inline double score_report(const RootCauseReport& report, const GroundTruth& truth) {
    std::set<std::string> graph_identified;
    for (const auto& l : report.lags) {
        graph_identified.insert(l.sub_roots.begin(), l.sub_roots.end());
        graph_identified.insert(l.time_defying.begin(), l.time_defying.end());
    }
    std::set<std::string> predicted, expected;
    for (const auto& v : report.data_driven())
        if (!graph_identified.contains(v)) predicted.insert(v);
    for (const auto& v : truth.intervened)
        if (!graph_identified.contains(v)) expected.insert(v);
    return f1_score(predicted, expected);
}

struct BenchmarkRow {
    InterventionType type = InterventionType::Structural;
    int size = 0;
    double mean_f1 = 0.0;
    double std_f1 = 0.0;
    int n_seeds = 0;
    std::vector<double> scores;  // per graph, in graph order
};

/// Mean and sample standard deviation of F1 over `n_graphs` simulated
/// graphs, for each intervention type and anomaly size.
[[nodiscard]] inline std::vector<BenchmarkRow> run_benchmark(const SimConfig& cfg, const EngineConfig& engine,
                                                             const std::vector<InterventionType>& types = {
                                                                 InterventionType::Structural,
                                                                 InterventionType::Parametric}) {
    cfg.validate();
    engine.validate();
    EngineConfig per_case = engine;
    per_case.parallel = false;

    auto score_one = [&](int g, int size, InterventionType type) {
        const auto c = make_benchmark_case(cfg, per_case, g, size, type);
        const auto report = easy_rca(c.graph, c.normal, c.anomalous, c.episode, per_case);
        return score_report(report, c.truth);
    };

    std::vector<BenchmarkRow> rows;
    for (auto type : types) {
        for (int size : cfg.anomaly_sizes) {
            BenchmarkRow row;
            row.type = type;
            row.size = size;
            row.n_seeds = cfg.n_graphs;
            row.scores.resize(static_cast<std::size_t>(cfg.n_graphs));
            if (engine.parallel) {
                std::vector<std::future<double>> futures;
                for (int g = 0; g < cfg.n_graphs; ++g)
                    futures.push_back(std::async(std::launch::async, score_one, g, size, type));
                for (int g = 0; g < cfg.n_graphs; ++g) row.scores[static_cast<std::size_t>(g)] = futures[static_cast<std::size_t>(g)].get();
            } else {
                for (int g = 0; g < cfg.n_graphs; ++g) row.scores[static_cast<std::size_t>(g)] = score_one(g, size, type);
            }
            const double n = static_cast<double>(row.scores.size());
            row.mean_f1 = std::accumulate(row.scores.begin(), row.scores.end(), 0.0) / n;
            double ss = 0.0;
            for (double s : row.scores) ss += (s - row.mean_f1) * (s - row.mean_f1);
            row.std_f1 = row.scores.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace easyrca
