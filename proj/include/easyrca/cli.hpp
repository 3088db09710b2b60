#pragma once

#include <easyrca/engine.hpp>
#include <easyrca/io.hpp>
#include <easyrca/report.hpp>
#include <easyrca/separation.hpp>
#include <easyrca/simgen.hpp>

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace easyrca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitImpossible = 3;

struct AnalyzeInputs {
    std::string graph_path;
    std::string normal_csv_path;
    std::string anomalous_csv_path;
    std::string anomalies_path;
    int gamma_max = 3;
    double alpha = 0.01;
    int n_chunks = 10;
    std::string output_path;  // empty: report goes to stdout
    bool parallel = false;
};

struct SimulateInputs {
    std::string output_dir;
    std::string graph_path;  // empty: random graph as in the benchmark
    std::vector<std::string> targets;
    std::string type = "structural";
    int size = 500;
    int n_chunks = 10;
    int n_vertices = 6;
    std::uint64_t seed = 0;
};

struct BenchmarkInputs {
    std::string config_path;
    std::string output_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_graphs;
    bool parallel = false;
};

struct DsepInputs {
    std::string graph_path;
    std::vector<std::string> xs;
    std::vector<std::string> ys;
};

namespace detail {

inline std::string join(const std::vector<std::string>& v, std::string_view sep = ", ") {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

inline std::string braces(const std::vector<std::string>& v) { return "{" + join(v) + "}"; }

/// Writes through a sibling temporary so a failed run never leaves a partial file.
inline void write_text(const std::filesystem::path& path, std::string_view text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::InvalidInput, "cannot write '" + path.string() + "'");
        out << text;
        if (!out) throw Error(ErrorKind::InvalidInput, "failed writing '" + path.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline InterventionType parse_type(const std::string& s) {
    if (s == "structural") return InterventionType::Structural;
    if (s == "parametric") return InterventionType::Parametric;
    throw Error(ErrorKind::InvalidInput, "intervention type must be 'structural' or 'parametric', got '" + s + "'");
}

}  // namespace detail

inline void print_summary(const RootCauseReport& report, std::ostream& out) {
    out << std::left << std::setw(5) << "LAG" << std::setw(28) << "sub-roots" << std::setw(20) << "time-defying"
        << "data-driven\n";
    for (std::size_t i = 0; i < report.lags.size(); ++i) {
        const auto& l = report.lags[i];
        std::vector<std::string> dd;
        for (const auto& d : l.data_driven) dd.push_back(d.vertex + " (" + std::string(to_string(d.classification)) + ")");
        out << std::left << std::setw(5) << i << std::setw(28) << detail::braces(l.sub_roots) << std::setw(20)
            << detail::braces(l.time_defying) << detail::braces(dd) << '\n';
    }
    std::size_t diagnostics = 0;
    for (const auto& l : report.lags) diagnostics += l.diagnostics.size();
    if (diagnostics) out << diagnostics << " edge test(s) skipped; see diagnostics in the report\n";
}

/// The library call behind `analyze`, exposed so callers can compare.
[[nodiscard]] inline RootCauseReport analyze_files(const AnalyzeInputs& in) {
    const auto graph = load_graph(in.graph_path);
    const auto normal = load_timeseries_csv(in.normal_csv_path, Regime::Normal);
    const auto anomalous = load_timeseries_csv(in.anomalous_csv_path, Regime::Anomalous);
    const auto episode = load_episode(in.anomalies_path);
    return easy_rca(graph, normal, anomalous, episode, {in.gamma_max, in.alpha, in.n_chunks, in.parallel});
}

inline int analyze(const AnalyzeInputs& in, std::ostream& out, std::ostream& err) {
    RootCauseReport report;
    try {
        report = analyze_files(in);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    if (report.analysis_impossible()) {
        err << "error: analysis impossible, every tested edge failed:\n";
        for (const auto& l : report.lags)
            for (const auto& d : l.diagnostics)
                err << "  " << d.cause << " -> " << d.effect
                    << (d.gamma ? " (gamma " + std::to_string(*d.gamma) + ")" : std::string()) << ": " << d.message
                    << '\n';
        return kExitImpossible;
    }
    const auto json = report_to_json(report);
    if (in.output_path.empty()) {
        out << json << '\n';
    } else {
        try {
            detail::write_text(in.output_path, json);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kExitInvalid;
        }
    }
    print_summary(report, in.output_path.empty() ? err : out);
    return kExitOk;
}

inline int simulate(const SimulateInputs& in, std::ostream& out, std::ostream& err) {
    try {
        const auto type = detail::parse_type(in.type);
        if (in.size <= 0) throw Error(ErrorKind::InvalidInput, "--size must be positive");
        if (in.n_chunks < 3) throw Error(ErrorKind::InvalidInput, "--chunks must be >= 3");
        SimConfig cfg;
        cfg.seed = in.seed;
        cfg.n_vertices = in.n_vertices;
        EngineConfig engine;
        engine.n_chunks = in.n_chunks;

        Ascgl graph;
        SimulatedEpisode sim;
        if (in.graph_path.empty()) {
            if (!in.targets.empty()) throw Error(ErrorKind::InvalidInput, "--targets requires --graph");
            auto c = make_benchmark_case(cfg, engine, 0, in.size, type);
            graph = std::move(c.graph);
            sim = {std::move(c.normal), std::move(c.anomalous), std::move(c.episode), std::move(c.truth)};
        } else {
            graph = load_graph(in.graph_path);
            Rng rng(in.seed);
            const auto coefficients = draw_coefficients(graph, cfg.coeff_low, cfg.coeff_high, rng);
            std::vector<Intervention> interventions;
            if (in.targets.empty()) {
                // every source vertex, structurally
                for (VertexId v = 0; v < graph.size(); ++v)
                    if (graph.parents(v).empty()) interventions.push_back({v, InterventionType::Structural});
            } else {
                for (const auto& t : in.targets) interventions.push_back({graph.id(t), type});
            }
            const auto len = static_cast<std::size_t>(in.size);
            sim = simulate_episode(graph, coefficients, interventions, static_cast<std::size_t>(in.n_chunks) * len, len,
                                   cfg, rng);
        }

        const std::filesystem::path dir(in.output_dir);
        std::filesystem::create_directories(dir);
        nlohmann::ordered_json truth;
        truth["interventions"] = nlohmann::ordered_json::array();
        for (const auto& v : sim.truth.intervened)
            truth["interventions"].push_back({{"vertex", v},
                                              {"type", std::string(to_string(sim.truth.intervention_type.at(v)))},
                                              {"start_time", sim.truth.start_times.at(v)}});
        detail::write_text(dir / "graph.json", graph_to_json(graph) + "\n");
        detail::write_text(dir / "normal.csv", timeseries_to_csv(sim.normal));
        detail::write_text(dir / "anomalous.csv", timeseries_to_csv(sim.anomalous));
        detail::write_text(dir / "anomalies.json", episode_to_json(sim.episode) + "\n");
        detail::write_text(dir / "truth.json", truth.dump(2) + "\n");
        out << "wrote " << graph.size() << " series (" << sim.normal.length() << " normal, " << sim.anomalous.length()
            << " anomalous samples) to " << dir.string() << '\n';
        out << "intervened: " << detail::braces({sim.truth.intervened.begin(), sim.truth.intervened.end()}) << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
}

inline int benchmark(const BenchmarkInputs& in, std::ostream& out, std::ostream& err) {
    BenchmarkConfig cfg;
    try {
        if (!in.config_path.empty()) cfg = benchmark_config_from_json(easyrca::detail::read_file(in.config_path));
        if (in.seed) cfg.sim.seed = *in.seed;
        if (in.n_graphs) cfg.sim.n_graphs = *in.n_graphs;
        if (in.parallel) cfg.engine.parallel = true;
        cfg.sim.validate();
        cfg.engine.validate();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    std::vector<BenchmarkRow> rows;
    try {
        rows = run_benchmark(cfg.sim, cfg.engine);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    out << std::left << std::setw(12) << "type" << std::setw(8) << "size" << std::setw(10) << "mean F1"
        << std::setw(10) << "std F1" << "seeds\n";
    for (const auto& r : rows)
        out << std::left << std::setw(12) << to_string(r.type) << std::setw(8) << r.size << std::setw(10)
            << std::fixed << std::setprecision(3) << r.mean_f1 << std::setw(10) << r.std_f1 << r.n_seeds << '\n';
    if (!in.output_path.empty()) {
        try {
            detail::write_text(in.output_path, benchmark_rows_to_csv(rows));
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kExitInvalid;
        }
    }
    return kExitOk;
}

inline int check_dsep(const DsepInputs& in, std::ostream& out, std::ostream& err) {
    try {
        const auto graph = load_graph(in.graph_path);
        std::vector<VertexId> xs, ys;
        for (const auto& x : in.xs) xs.push_back(graph.id(x));
        for (const auto& y : in.ys) ys.push_back(graph.id(y));
        const auto result = d_separated_ascgl(graph, xs, ys);
        std::vector<std::string> z;
        for (auto v : result.conditioning) z.push_back(graph.name(v));
        out << (result.separated ? "separated" : "not separated") << '\n';
        out << "Z = " << detail::braces(z) << '\n';
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
}

/// Full command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Root-cause identification for collective anomalies in multivariate time series", "easyrca"};
    app.require_subcommand(1);

    AnalyzeInputs a;
    auto* analyze_cmd = app.add_subcommand("analyze", "Find root causes of an anomaly episode");
    analyze_cmd->add_option("--graph", a.graph_path, "Causal graph JSON")->required();
    analyze_cmd->add_option("--normal", a.normal_csv_path, "Normal-regime CSV")->required();
    analyze_cmd->add_option("--anomalous", a.anomalous_csv_path, "Anomalous-regime CSV")->required();
    analyze_cmd->add_option("--anomalies", a.anomalies_path, "Anomaly episode JSON")->required();
    analyze_cmd->add_option("--gamma-max", a.gamma_max, "Largest lag considered")->capture_default_str();
    analyze_cmd->add_option("--alpha", a.alpha, "Significance level")->capture_default_str();
    analyze_cmd->add_option("--chunks", a.n_chunks, "Number of normal-regime chunks")->capture_default_str();
    analyze_cmd->add_option("--out", a.output_path, "Report JSON path (default: stdout)");
    analyze_cmd->add_flag("--parallel", a.parallel, "Analyze independent groups concurrently");

    SimulateInputs s;
    auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic anomaly episode");
    simulate_cmd->add_option("--out", s.output_dir, "Output directory")->required();
    simulate_cmd->add_option("--graph", s.graph_path, "Use this graph instead of a random one");
    simulate_cmd->add_option("--targets", s.targets, "Vertices to intervene on (with --graph)")->delimiter(',');
    simulate_cmd->add_option("--type", s.type, "structural or parametric")->capture_default_str();
    simulate_cmd->add_option("--size", s.size, "Anomalous regime length")->capture_default_str();
    simulate_cmd->add_option("--chunks", s.n_chunks, "Normal regime length in anomaly-sized chunks")
        ->capture_default_str();
    simulate_cmd->add_option("--vertices", s.n_vertices, "Vertices of the random graph")->capture_default_str();
    simulate_cmd->add_option("--seed", s.seed, "Random seed")->capture_default_str();

    BenchmarkInputs b;
    std::uint64_t bench_seed = 0;
    int bench_graphs = 0;
    auto* benchmark_cmd = app.add_subcommand("benchmark", "F1 over simulated episodes");
    benchmark_cmd->add_option("--config", b.config_path, "Benchmark config JSON");
    benchmark_cmd->add_option("--out", b.output_path, "Results CSV path");
    auto* seed_opt = benchmark_cmd->add_option("--seed", bench_seed, "Base seed (overrides config)");
    auto* graphs_opt = benchmark_cmd->add_option("--graphs", bench_graphs, "Graphs per size (overrides config)");
    benchmark_cmd->add_flag("--parallel", b.parallel, "Run seeds concurrently");

    DsepInputs d;
    auto* dsep_cmd = app.add_subcommand("check-dsep", "Test separation of two vertex sets in a graph");
    dsep_cmd->add_option("--graph", d.graph_path, "Causal graph JSON")->required();
    dsep_cmd->add_option("--x", d.xs, "First vertex set")->required()->delimiter(',');
    dsep_cmd->add_option("--y", d.ys, "Second vertex set")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }

    if (analyze_cmd->parsed()) return analyze(a, out, err);
    if (simulate_cmd->parsed()) return simulate(s, out, err);
    if (benchmark_cmd->parsed()) {
        if (seed_opt->count()) b.seed = bench_seed;
        if (graphs_opt->count()) b.n_graphs = bench_graphs;
        return benchmark(b, out, err);
    }
    return check_dsep(d, out, err);
}

}  // namespace easyrca::cli
