#pragma once

#include <easyrca/effects.hpp>
#include <easyrca/error.hpp>

#include "json.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace easyrca {

struct EngineConfig {
    int gamma_max = 3;
    double alpha = 0.01;
    int n_chunks = 10;
    bool parallel = false;

    void validate() const {
        if (gamma_max < 1) throw Error(ErrorKind::InvalidInput, "gamma_max must be >= 1");
        if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidInput, "alpha must lie in (0, 1)");
        if (n_chunks < 3) throw Error(ErrorKind::InvalidInput, "n_chunks must be >= 3");
    }
};

/// A root cause found by comparing direct effects between regimes.
struct DataDrivenCause {
    std::string vertex;
    Classification classification = Classification::None;
    std::string parent;  // cause side of the edge that showed the change
    int detecting_gamma = 0;
    std::vector<double> coefficients;  // [0] anomalous, then normal chunks
    double grubbs_statistic = 0.0;
    double grubbs_critical = 0.0;
    double anomalous_standard_error = 0.0;
    double pooled_coefficient = 0.0;

    friend bool operator==(const DataDrivenCause&, const DataDrivenCause&) = default;
};

/// Why an edge test was skipped or failed.
struct EdgeDiagnostic {
    std::string cause;
    std::string effect;
    std::optional<int> gamma;
    std::string kind;
    std::string message;

    friend bool operator==(const EdgeDiagnostic&, const EdgeDiagnostic&) = default;
};

struct LagReport {
    std::vector<std::string> members;
    std::vector<std::string> sub_roots;
    std::vector<std::string> time_defying;
    std::vector<DataDrivenCause> data_driven;
    std::vector<EdgeDiagnostic> diagnostics;
    std::size_t edges_tested = 0;
    std::size_t edges_failed = 0;  // edges where no lag could be tested at all

    friend bool operator==(const LagReport&, const LagReport&) = default;
};

struct RootCauseReport {
    std::optional<EngineConfig> parameters;
    std::vector<LagReport> lags;

    /// Union of sub-roots, time-defying and data-driven causes over all groups.
    [[nodiscard]] std::set<std::string> root_causes() const {
        std::set<std::string> out;
        for (const auto& l : lags) {
            out.insert(l.sub_roots.begin(), l.sub_roots.end());
            out.insert(l.time_defying.begin(), l.time_defying.end());
            for (const auto& d : l.data_driven) out.insert(d.vertex);
        }
        return out;
    }

    [[nodiscard]] std::set<std::string> data_driven() const {
        std::set<std::string> out;
        for (const auto& l : lags)
            for (const auto& d : l.data_driven) out.insert(d.vertex);
        return out;
    }

    /// True when edge tests were attempted and every one of them failed.
    [[nodiscard]] bool analysis_impossible() const {
        std::size_t tested = 0, failed = 0;
        for (const auto& l : lags) {
            tested += l.edges_tested;
            failed += l.edges_failed;
        }
        return tested > 0 && failed == tested;
    }

    friend bool operator==(const RootCauseReport& a, const RootCauseReport& b) {
        auto cfg_eq = [](const std::optional<EngineConfig>& x, const std::optional<EngineConfig>& y) {
            if (x.has_value() != y.has_value()) return false;
            return !x || (x->gamma_max == y->gamma_max && x->alpha == y->alpha && x->n_chunks == y->n_chunks);
        };
        return cfg_eq(a.parameters, b.parameters) && a.lags == b.lags;
    }
};

inline constexpr int kReportVersion = 1;

[[nodiscard]] inline Classification classification_from_string(std::string_view s) {
    if (s == "structural") return Classification::Structural;
    if (s == "parametric") return Classification::Parametric;
    if (s == "none") return Classification::None;
    throw Error(ErrorKind::InvalidInput, "unknown classification '" + std::string(s) + "'");
}

[[nodiscard]] inline nlohmann::ordered_json report_to_json_value(const RootCauseReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["version"] = kReportVersion;
    if (report.parameters) {
        j["parameters"] = {{"gamma_max", report.parameters->gamma_max},
                           {"alpha", report.parameters->alpha},
                           {"n_chunks", report.parameters->n_chunks},
                           {"chunking", "recent-contiguous"}};
    }
    j["lags"] = ordered_json::array();
    for (const auto& l : report.lags) {
        ordered_json lj;
        lj["members"] = l.members;
        lj["sub_roots"] = l.sub_roots;
        lj["time_defying"] = l.time_defying;
        lj["data_driven"] = ordered_json::array();
        for (const auto& d : l.data_driven) {
            lj["data_driven"].push_back({{"vertex", d.vertex},
                                         {"classification", std::string(to_string(d.classification))},
                                         {"parent", d.parent},
                                         {"detecting_gamma", d.detecting_gamma},
                                         {"evidence",
                                          {{"coefficients", d.coefficients},
                                           {"grubbs_statistic", d.grubbs_statistic},
                                           {"grubbs_critical", d.grubbs_critical},
                                           {"anomalous_standard_error", d.anomalous_standard_error},
                                           {"pooled_coefficient", d.pooled_coefficient}}}});
        }
        lj["diagnostics"] = ordered_json::array();
        for (const auto& d : l.diagnostics) {
            lj["diagnostics"].push_back({{"cause", d.cause},
                                         {"effect", d.effect},
                                         {"gamma", d.gamma ? ordered_json(*d.gamma) : ordered_json(nullptr)},
                                         {"kind", d.kind},
                                         {"message", d.message}});
        }
        lj["edges_tested"] = l.edges_tested;
        lj["edges_failed"] = l.edges_failed;
        j["lags"].push_back(std::move(lj));
    }
    return j;
}

/// Deterministic compact JSON; vertex lists are already sorted.
[[nodiscard]] inline std::string report_to_json(const RootCauseReport& report) {
    return report_to_json_value(report).dump();
}

[[nodiscard]] inline RootCauseReport report_from_json(std::string_view text) {
    RootCauseReport r;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("version").get<int>() != kReportVersion)
            throw Error(ErrorKind::InvalidInput, "unsupported report version");
        if (j.contains("parameters")) {
            const auto& p = j.at("parameters");
            r.parameters = EngineConfig{p.at("gamma_max").get<int>(), p.at("alpha").get<double>(),
                                        p.at("n_chunks").get<int>(), false};
        }
        for (const auto& lj : j.at("lags")) {
            LagReport l;
            l.members = lj.at("members").get<std::vector<std::string>>();
            l.sub_roots = lj.at("sub_roots").get<std::vector<std::string>>();
            l.time_defying = lj.at("time_defying").get<std::vector<std::string>>();
            for (const auto& dj : lj.at("data_driven")) {
                DataDrivenCause d;
                d.vertex = dj.at("vertex").get<std::string>();
                d.classification = classification_from_string(dj.at("classification").get<std::string>());
                d.parent = dj.at("parent").get<std::string>();
                d.detecting_gamma = dj.at("detecting_gamma").get<int>();
                const auto& ev = dj.at("evidence");
                d.coefficients = ev.at("coefficients").get<std::vector<double>>();
                d.grubbs_statistic = ev.at("grubbs_statistic").get<double>();
                d.grubbs_critical = ev.at("grubbs_critical").get<double>();
                d.anomalous_standard_error = ev.at("anomalous_standard_error").get<double>();
                d.pooled_coefficient = ev.at("pooled_coefficient").get<double>();
                l.data_driven.push_back(std::move(d));
            }
            for (const auto& dj : lj.at("diagnostics")) {
                EdgeDiagnostic d;
                d.cause = dj.at("cause").get<std::string>();
                d.effect = dj.at("effect").get<std::string>();
                if (!dj.at("gamma").is_null()) d.gamma = dj.at("gamma").get<int>();
                d.kind = dj.at("kind").get<std::string>();
                d.message = dj.at("message").get<std::string>();
                l.diagnostics.push_back(std::move(d));
            }
            l.edges_tested = lj.at("edges_tested").get<std::size_t>();
            l.edges_failed = lj.at("edges_failed").get<std::size_t>();
            r.lags.push_back(std::move(l));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed report: ") + e.what());
    }
    return r;
}

}  // namespace easyrca
