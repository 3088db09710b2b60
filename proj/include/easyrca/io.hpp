#pragma once

#include <easyrca/anomaly.hpp>
#include <easyrca/dataset.hpp>
#include <easyrca/error.hpp>
#include <easyrca/graph.hpp>
#include <easyrca/report.hpp>
#include <easyrca/simgen.hpp>

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace easyrca {

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json parse_json(std::string_view text, std::string_view what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string(what) + ": " + e.what());
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        cells.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return cells;
}

inline bool is_timestamp_header(std::string_view h) {
    std::string lower(h);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    return lower.empty() || lower == "timestamp" || lower == "time" || lower == "date" || lower == "datetime" ||
           lower == "index";
}

}  // namespace detail

// ---- graph files: {"vertices": [...], "edges": [[cause, effect], ...], "loops": [...]}

[[nodiscard]] inline Ascgl graph_from_json(std::string_view text) {
    const auto j = detail::parse_json(text, "graph file");
    try {
        auto vertices = j.at("vertices").get<std::vector<std::string>>();
        std::vector<std::pair<std::string, std::string>> edges;
        for (const auto& e : j.value("edges", nlohmann::json::array())) {
            if (!e.is_array() || e.size() != 2)
                throw Error(ErrorKind::InvalidInput, "graph edge must be a [cause, effect] pair");
            edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
        auto loops = j.value("loops", std::vector<std::string>{});
        return Ascgl::validate(std::move(vertices), std::move(edges), std::move(loops));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("graph file: ") + e.what());
    }
}

[[nodiscard]] inline nlohmann::ordered_json graph_to_json_value(const Ascgl& graph) {
    nlohmann::ordered_json j;
    j["vertices"] = graph.names();
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& [c, e] : graph.edges()) j["edges"].push_back({graph.name(c), graph.name(e)});
    j["loops"] = nlohmann::ordered_json::array();
    for (auto v : graph.loops()) j["loops"].push_back(graph.name(v));
    return j;
}

[[nodiscard]] inline std::string graph_to_json(const Ascgl& graph) { return graph_to_json_value(graph).dump(2); }

[[nodiscard]] inline Ascgl load_graph(const std::filesystem::path& path) {
    return graph_from_json(detail::read_file(path));
}

// ---- anomaly files: {"interval_length": n, "anomalies": [{"vertex": v, "appearance_time": t}, ...]}

[[nodiscard]] inline AnomalyEpisode episode_from_json(std::string_view text) {
    const auto j = detail::parse_json(text, "anomalies file");
    AnomalyEpisode ep;
    try {
        ep.interval_length = j.at("interval_length").get<long>();
        for (const auto& a : j.at("anomalies")) {
            const auto name = a.at("vertex").get<std::string>();
            if (ep.appearance_time.contains(name))
                throw Error(ErrorKind::InvalidInput,
                            "vertex '" + name + "' listed twice; one anomaly interval per vertex is supported");
            ep.appearance_time[name] = a.at("appearance_time").get<long>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("anomalies file: ") + e.what());
    }
    return ep;
}

[[nodiscard]] inline std::string episode_to_json(const AnomalyEpisode& ep) {
    nlohmann::ordered_json j;
    j["interval_length"] = ep.interval_length;
    j["anomalies"] = nlohmann::ordered_json::array();
    for (const auto& [v, t] : ep.appearance_time) j["anomalies"].push_back({{"vertex", v}, {"appearance_time", t}});
    return j.dump(2);
}

[[nodiscard]] inline AnomalyEpisode load_episode(const std::filesystem::path& path) {
    return episode_from_json(detail::read_file(path));
}

// ---- time series CSV

/// Header row of names, optional leading timestamp column (empty header or
/// one of timestamp/time/date/datetime/index), numeric body. Blank lines
/// are ignored; CRLF is accepted.
[[nodiscard]] inline Dataset timeseries_from_csv(std::string_view text, Regime regime = Regime::Normal) {
    std::vector<std::string_view> lines;
    std::size_t line_no_of_header = 0;
    std::vector<std::size_t> line_numbers;
    {
        std::size_t pos = 0, no = 0;
        while (pos <= text.size()) {
            auto nl = text.find('\n', pos);
            auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            ++no;
            if (!detail::trim(line).empty()) {
                lines.push_back(line);
                line_numbers.push_back(no);
            }
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
    }
    if (lines.empty()) throw Error(ErrorKind::InvalidInput, "CSV has no header row");
    line_no_of_header = line_numbers.front();
    (void)line_no_of_header;

    auto header = detail::split_row(lines.front());
    if (!header.empty() && header.front().size() >= 3 && header.front().substr(0, 3) == "\xEF\xBB\xBF")
        header.front().remove_prefix(3);
    const std::size_t skip = detail::is_timestamp_header(header.front()) ? 1 : 0;
    std::vector<std::string> names;
    for (std::size_t c = skip; c < header.size(); ++c) {
        if (header[c].empty()) throw Error(ErrorKind::InvalidInput, "empty column name at column " + std::to_string(c + 1));
        names.emplace_back(header[c]);
    }
    {
        std::set<std::string> seen;
        for (const auto& n : names)
            if (!seen.insert(n).second) throw Error(ErrorKind::DuplicateColumn, "duplicate column '" + n + "'");
    }

    std::vector<std::vector<double>> columns(names.size());
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = detail::split_row(lines[r]);
        if (cells.size() != header.size())
            throw Error(ErrorKind::RaggedRows, "line " + std::to_string(line_numbers[r]) + " has " +
                                                   std::to_string(cells.size()) + " cells, header has " +
                                                   std::to_string(header.size()));
        for (std::size_t c = skip; c < cells.size(); ++c) {
            const auto cell = cells[c];
            double value = 0.0;
            const auto* first = cell.data();
            const auto* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, value);
            if (cell.empty() || ec != std::errc{} || ptr != last)
                throw Error(ErrorKind::NonNumericCell, "line " + std::to_string(line_numbers[r]) + ", column '" +
                                                           names[c - skip] + "': '" + std::string(cell) +
                                                           "' is not a number");
            columns[c - skip].push_back(value);
        }
    }
    return Dataset(std::move(names), std::move(columns), regime);
}

[[nodiscard]] inline Dataset load_timeseries_csv(const std::filesystem::path& path, Regime regime = Regime::Normal) {
    try {
        return timeseries_from_csv(detail::read_file(path), regime);
    } catch (const Error& e) {
        throw Error(e.kind(), path.filename().string() + ": " + std::string(e.message()));
    }
}

inline void append_double(std::string& out, double x) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    out.append(buf.data(), ptr);
}

/// Shortest round-trip representation; no timestamp column.
[[nodiscard]] inline std::string timeseries_to_csv(const Dataset& data) {
    std::string out;
    for (std::size_t c = 0; c < data.width(); ++c) {
        if (c) out += ',';
        out += data.names()[c];
    }
    out += '\n';
    for (std::size_t r = 0; r < data.length(); ++r) {
        for (std::size_t c = 0; c < data.width(); ++c) {
            if (c) out += ',';
            append_double(out, data.column(c)[r]);
        }
        out += '\n';
    }
    return out;
}

// ---- benchmark configuration: {"sim": {...SimConfig}, "engine": {...EngineConfig}}
// Missing keys keep their defaults.

struct BenchmarkConfig {
    SimConfig sim;
    EngineConfig engine;
};

[[nodiscard]] inline BenchmarkConfig benchmark_config_from_json(std::string_view text) {
    const auto j = detail::parse_json(text, "benchmark config");
    BenchmarkConfig cfg;
    try {
        static const std::set<std::string> sim_keys{"n_vertices", "degree_min", "degree_max", "n_graphs",
                                                    "edge_lag",   "noise_scale", "coeff_low", "coeff_high",
                                                    "anomaly_sizes", "seed", "burn_in"};
        static const std::set<std::string> engine_keys{"gamma_max", "alpha", "n_chunks", "parallel"};
        for (const auto& [k, v] : j.items())
            if (k != "sim" && k != "engine") throw Error(ErrorKind::InvalidInput, "benchmark config: unknown key '" + k + "'");
        if (j.contains("sim")) {
            const auto& s = j.at("sim");
            for (const auto& [k, v] : s.items())
                if (!sim_keys.contains(k)) throw Error(ErrorKind::InvalidInput, "benchmark config: unknown sim key '" + k + "'");
            auto& c = cfg.sim;
            c.n_vertices = s.value("n_vertices", c.n_vertices);
            c.degree_min = s.value("degree_min", c.degree_min);
            c.degree_max = s.value("degree_max", c.degree_max);
            c.n_graphs = s.value("n_graphs", c.n_graphs);
            c.edge_lag = s.value("edge_lag", c.edge_lag);
            c.noise_scale = s.value("noise_scale", c.noise_scale);
            c.coeff_low = s.value("coeff_low", c.coeff_low);
            c.coeff_high = s.value("coeff_high", c.coeff_high);
            c.anomaly_sizes = s.value("anomaly_sizes", c.anomaly_sizes);
            c.seed = s.value("seed", c.seed);
            c.burn_in = s.value("burn_in", c.burn_in);
        }
        if (j.contains("engine")) {
            const auto& e = j.at("engine");
            for (const auto& [k, v] : e.items())
                if (!engine_keys.contains(k))
                    throw Error(ErrorKind::InvalidInput, "benchmark config: unknown engine key '" + k + "'");
            auto& c = cfg.engine;
            c.gamma_max = e.value("gamma_max", c.gamma_max);
            c.alpha = e.value("alpha", c.alpha);
            c.n_chunks = e.value("n_chunks", c.n_chunks);
            c.parallel = e.value("parallel", c.parallel);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("benchmark config: ") + e.what());
    }
    cfg.sim.validate();
    cfg.engine.validate();
    return cfg;
}

[[nodiscard]] inline std::string benchmark_rows_to_csv(const std::vector<BenchmarkRow>& rows) {
    std::string out = "type,size,mean_f1,std_f1,n_seeds\n";
    for (const auto& r : rows) {
        out += to_string(r.type);
        out += ',' + std::to_string(r.size) + ',';
        append_double(out, r.mean_f1);
        out += ',';
        append_double(out, r.std_f1);
        out += ',' + std::to_string(r.n_seeds) + '\n';
    }
    return out;
}

}  // namespace easyrca
