#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace easyrca;

namespace {

double mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

double variance(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::InvalidInput;
}

// A -> B -> C plus an unrelated D; ids follow the names.
Ascgl chain_abcd() { return Ascgl::validate({"A", "B", "C", "D"}, {{"A", "B"}, {"B", "C"}}, {"A", "B", "C", "D"}); }

Coefficients chain_coeffs() {
    return {{{0, 1}, 0.8}, {{1, 2}, 0.7}, {{0, 0}, 0.5}, {{1, 1}, 0.3}, {{2, 2}, 0.2}, {{3, 3}, 0.6}};
}

}  // namespace

TEST(Scm, NoiseScale) {
    const auto g = Ascgl::validate({"X"}, {}, {});
    Rng rng(1);
    const Scm scm(g, {}, 10000, {}, rng);
    EXPECT_NEAR(std::sqrt(variance(scm.data().column(0))), 0.1, 0.005);
    EXPECT_NEAR(mean(scm.data().column(0)), 0.0, 0.005);
}

TEST(Scm, StationaryLoopVariance) {
    const auto g = Ascgl::validate({"X"}, {}, {"X"});
    Rng rng(2);
    const Scm scm(g, {{{0, 0}, 0.5}}, 40000, {}, rng);
    EXPECT_NEAR(variance(scm.data().column(0)), 0.01 / (1 - 0.25), 0.01 / 0.75 * 0.05);
}

TEST(Scm, NoiselessChainCopiesTheParentWithLag) {
    const auto g = Ascgl::validate({"X", "Y"}, {{"X", "Y"}}, {});
    Rng rng(3);
    Scm scm(g, {{{0, 1}, 1.0}}, 50, {1, 0.0, 0}, rng);
    scm.inject_structural(0, 0, 50, rng);
    const auto x = scm.data().column(0), y = scm.data().column(1);
    EXPECT_EQ(y[0], 0.0);
    for (std::size_t t = 1; t < 50; ++t) EXPECT_EQ(y[t], x[t - 1]);
}

TEST(Scm, Reproducible) {
    Rng a(4), b(4);
    const Scm s1(chain_abcd(), chain_coeffs(), 300, {}, a);
    const Scm s2(chain_abcd(), chain_coeffs(), 300, {}, b);
    for (std::size_t j = 0; j < 4; ++j)
        EXPECT_TRUE(std::ranges::equal(s1.data().column(j), s2.data().column(j)));
}

TEST(Scm, InterventionTouchesOnlyDescendantsAfterStart) {
    Rng rng(5);
    const Scm base(chain_abcd(), chain_coeffs(), 400, {}, rng);
    Rng irng(6);
    const auto hit = inject_structural(base, 1, 200, 100, irng);
    const auto& a = base.data();
    const auto& b = hit.data();
    // A and D are not descendants of B.
    EXPECT_TRUE(std::ranges::equal(a.column(0), b.column(0)));
    EXPECT_TRUE(std::ranges::equal(a.column(3), b.column(3)));
    for (std::size_t j = 1; j <= 2; ++j)
        for (std::size_t t = 0; t < 200; ++t) EXPECT_EQ(a.column(j)[t], b.column(j)[t]);
    EXPECT_NE(a.column(1)[200], b.column(1)[200]);
    EXPECT_EQ(a.column(2)[200], b.column(2)[200]);  // one step of lag
    EXPECT_NE(a.column(2)[201], b.column(2)[201]);
    // The copying variant leaves the source alone.
    EXPECT_TRUE(base.truth().intervened.empty());
    EXPECT_EQ(hit.truth().intervened, (std::set<std::string>{"B"}));
    EXPECT_EQ(hit.truth().start_times.at("B"), 200);
}

TEST(Scm, StructuralDrawsAreExponentialWithRateTwo) {
    Rng rng(7);
    Scm scm(chain_abcd(), chain_coeffs(), 20000, {}, rng);
    scm.inject_structural(1, 0, 20000, rng);
    const auto y = scm.data().column(1);
    EXPECT_NEAR(mean(y), 0.5, 0.02);
    EXPECT_NEAR(variance(y), 0.25, 0.02);
    EXPECT_TRUE(std::ranges::all_of(y, [](double v) { return v >= 0.0; }));
}

TEST(Scm, ParametricChangesTheCoefficient) {
    Rng rng(8);
    Scm scm(chain_abcd(), chain_coeffs(), 20000, {}, rng);
    scm.inject_parametric(1, 0, 20000, Coefficients{{{0, 1}, 0.2}});
    const std::vector<LaggedVariable> regs{{0, 1}, {1, 1}};
    const auto d = build_lagged_design(scm.data(), {1, 0}, regs, {0, 20000});
    const auto fit = ols_fit(d.matrix, d.response, 0);
    EXPECT_NEAR(fit.cause_coefficient, 0.2, 4 * fit.standard_error);
    EXPECT_NEAR(fit.coefficients[1], 0.3, 0.05);  // loop keeps its normal value
}

TEST(Scm, ZeroSizeIsANoOp) {
    Rng rng(9);
    const Scm base(chain_abcd(), chain_coeffs(), 100, {}, rng);
    Rng irng(10);
    const auto same = inject_structural(base, 1, 40, 0, irng);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_TRUE(std::ranges::equal(base.data().column(j), same.data().column(j)));
    EXPECT_TRUE(same.truth().intervened.empty());
}

TEST(Scm, Errors) {
    Rng rng(11);
    Scm scm(chain_abcd(), chain_coeffs(), 100, {}, rng);
    EXPECT_EQ(kind_of([&] { scm.inject_parametric(0, 0, 10, 0.1, 1.0, rng); }), ErrorKind::NoParents);
    EXPECT_EQ(kind_of([&] { scm.inject_structural(1, 95, 10, rng); }), ErrorKind::WindowOutOfRange);
    EXPECT_EQ(kind_of([&] { scm.inject_parametric(2, 0, 10, Coefficients{{{0, 2}, 0.5}}); }), ErrorKind::NoSuchEdge);
    EXPECT_EQ(kind_of([&] { Scm bad(chain_abcd(), {}, 10, {}, rng); }), ErrorKind::InvalidInput);
}

TEST(Scm, CoefficientsRecoveredByRegression) {
    SimConfig cfg;
    Rng rng(12);
    const auto g = random_ascgl(cfg, rng);
    const auto c = draw_coefficients(g, cfg.coeff_low, cfg.coeff_high, rng);
    const Scm scm(g, c, 20000, {}, rng);
    int outside = 0, total = 0;
    for (VertexId v = 0; v < g.size(); ++v) {
        std::vector<LaggedVariable> regs{{v, 1}};
        for (auto p : g.parents(v)) regs.push_back({p, 1});
        const auto d = build_lagged_design(scm.data(), {v, 0}, regs, {0, 20000});
        for (std::size_t k = 0; k < regs.size(); ++k) {
            const auto fit = ols_fit(d.matrix, d.response, k);
            const double truth = c.at({regs[k].vertex, v});
            outside += std::abs(fit.cause_coefficient - truth) > 4 * fit.standard_error ? 1 : 0;
            ++total;
        }
    }
    EXPECT_GT(total, 6);
    EXPECT_EQ(outside, 0);
}

TEST(F1, Examples) {
    EXPECT_DOUBLE_EQ(f1_score({"a", "b"}, {"a", "c"}), 0.5);
    EXPECT_DOUBLE_EQ(f1_score({}, {}), 1.0);
    EXPECT_DOUBLE_EQ(f1_score({}, {"a"}), 0.0);
    EXPECT_DOUBLE_EQ(f1_score({"a"}, {}), 0.0);
    EXPECT_DOUBLE_EQ(f1_score({"a", "b"}, {"b", "a"}), 1.0);
    EXPECT_DOUBLE_EQ(f1_score({"a"}, {"a", "b", "c"}), 0.5);
}

TEST(RandomGraph, Properties) {
    SimConfig cfg;
    for (std::uint64_t s = 0; s < 200; ++s) {
        Rng rng(derive_seed(99, s));
        const auto g = random_ascgl(cfg, rng);
        ASSERT_EQ(g.size(), 6u);
        EXPECT_EQ(g.loops().size(), 6u);
        int roots = 0, max_degree = 0;
        for (VertexId v = 0; v < g.size(); ++v) {
            roots += g.parents(v).empty() ? 1 : 0;
            max_degree = std::max(max_degree, static_cast<int>(g.parents(v).size() + g.children(v).size()));
        }
        EXPECT_EQ(roots, 1);
        EXPECT_GE(max_degree, 4);
        EXPECT_LE(max_degree, 5);
        std::vector<VertexId> all(g.size());
        std::iota(all.begin(), all.end(), VertexId{0});
        EXPECT_EQ(weakly_connected_components(g, all).size(), 1u);
    }
}

TEST(RandomGraph, ImpossibleBoundsFail) {
    SimConfig cfg;
    cfg.n_vertices = 3;  // largest possible degree is 2
    Rng rng(1);
    EXPECT_EQ(kind_of([&] { (void)random_ascgl(cfg, rng); }), ErrorKind::GenerationFailed);
}

TEST(DeriveSeed, DistinctStreams) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(0, s));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(derive_seed(0, 1), derive_seed(1, 0));
}

TEST(SimulateEpisode, ArrivalTimesFollowHops) {
    const auto g = chain_abcd();
    SimConfig cfg;
    Rng rng(13);
    const auto sim = simulate_episode(g, chain_coeffs(),
                                      {{2, InterventionType::Parametric}, {0, InterventionType::Structural}}, 1000,
                                      100, cfg, rng);
    EXPECT_EQ(sim.normal.length(), 1000u);
    EXPECT_EQ(sim.anomalous.length(), 100u);
    EXPECT_EQ(sim.episode.interval_length, 100);
    EXPECT_EQ(sim.episode.appearance_time, (std::map<std::string, long>{{"A", 0}, {"B", 1}, {"C", 2}}));
    EXPECT_EQ(sim.truth.intervened, (std::set<std::string>{"A", "C"}));
    EXPECT_EQ(sim.truth.start_times.at("A"), 0);
    EXPECT_EQ(sim.truth.start_times.at("C"), 2);
    EXPECT_EQ(sim.truth.intervention_type.at("C"), InterventionType::Parametric);
}

TEST(SimulateEpisode, DuplicateInterventionRejected) {
    SimConfig cfg;
    Rng rng(14);
    EXPECT_EQ(kind_of([&] {
                  (void)simulate_episode(chain_abcd(), chain_coeffs(),
                                         {{1, InterventionType::Structural}, {1, InterventionType::Parametric}}, 100,
                                         10, cfg, rng);
              }),
              ErrorKind::InvalidInput);
}

TEST(BenchmarkCase, ProtocolInvariants) {
    SimConfig cfg;
    EngineConfig engine;
    for (int i = 0; i < 20; ++i) {
        const auto c = make_benchmark_case(cfg, engine, i, 200, InterventionType::Parametric);
        EXPECT_TRUE(c.graph.parents(c.root, false).empty());
        EXPECT_NE(c.root, c.target);
        EXPECT_EQ(c.normal.length(), 2000u);
        EXPECT_EQ(c.anomalous.length(), 200u);
        EXPECT_EQ(c.truth.intervened, (std::set<std::string>{c.root, c.target}));
        EXPECT_EQ(c.truth.intervention_type.at(c.target), InterventionType::Parametric);
        EXPECT_EQ(c.episode.time_of(c.root), 0);
        for (const auto& lag : decompose(c.graph, c.episode)) {
            EXPECT_EQ(find_sub_roots(lag), (std::vector<VertexId>{c.graph.id(c.root)}));
            EXPECT_TRUE(find_time_defying(c.graph, lag, c.episode).empty());
        }
    }
}

TEST(BenchmarkCase, Deterministic) {
    SimConfig cfg;
    cfg.seed = 5;
    const auto a = make_benchmark_case(cfg, {}, 3, 100, InterventionType::Structural);
    const auto b = make_benchmark_case(cfg, {}, 3, 100, InterventionType::Structural);
    EXPECT_EQ(a.graph, b.graph);
    EXPECT_TRUE(std::ranges::equal(a.anomalous.column(0), b.anomalous.column(0)));
    const auto other = make_benchmark_case(cfg, {}, 3, 100, InterventionType::Parametric);
    EXPECT_EQ(other.graph, a.graph);
    EXPECT_EQ(other.target, a.target);
}

TEST(ScoreReport, GraphIdentifiedCausesAreExcluded) {
    RootCauseReport r;
    LagReport l;
    l.sub_roots = {"R"};
    l.data_driven.push_back({"T", Classification::Structural, "R", 1, {}, 0, 0, 0, 0});
    r.lags.push_back(l);
    GroundTruth truth;
    truth.intervened = {"R", "T"};
    EXPECT_DOUBLE_EQ(score_report(r, truth), 1.0);
    truth.intervened = {"R", "Q"};
    EXPECT_DOUBLE_EQ(score_report(r, truth), 0.0);
    truth.intervened = {"R"};
    r.lags[0].data_driven.clear();
    EXPECT_DOUBLE_EQ(score_report(r, truth), 1.0);
}

TEST(Benchmark, ParallelMatchesSequentialAndUsesSampleSd) {
    SimConfig cfg;
    cfg.n_graphs = 4;
    cfg.anomaly_sizes = {300};
    EngineConfig seq, par;
    par.parallel = true;
    const auto a = run_benchmark(cfg, seq, {InterventionType::Structural});
    const auto b = run_benchmark(cfg, par, {InterventionType::Structural});
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].scores, b[0].scores);
    const auto& s = a[0].scores;
    const double m = mean(s);
    EXPECT_DOUBLE_EQ(a[0].mean_f1, m);
    EXPECT_NEAR(a[0].std_f1, std::sqrt(variance(s)), 1e-12);
    EXPECT_EQ(a[0].n_seeds, 4);
}
