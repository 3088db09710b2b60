#pragma once

#include <easyrca/dataset.hpp>
#include <easyrca/error.hpp>
#include <easyrca/graph.hpp>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace easyrca {

/// Lagged variables to condition on when regressing `effect` on `cause`.
struct AdjustmentSet {
    LaggedVariable cause;
    LaggedVariable effect;
    std::vector<LaggedVariable> variables;  // sorted

    friend bool operator==(const AdjustmentSet&, const AdjustmentSet&) = default;
};

namespace detail {

inline void check_pair(const Ascgl& graph, VertexId x, VertexId y, int gamma_xy, int gamma_max) {
    if (!graph.has_edge(x, y))
        throw Error(ErrorKind::NoSuchEdge, graph.name(x) + "->" + graph.name(y) + " is not an edge");
    if (gamma_max < 0 || gamma_xy < 0 || gamma_xy > gamma_max)
        throw Error(ErrorKind::LagOutOfRange, "need 0 <= gamma_xy (" + std::to_string(gamma_xy) +
                                                  ") <= gamma_max (" + std::to_string(gamma_max) + ")");
}

}  // namespace detail

/// Adjustment set for the total effect of X at lag gamma_xy on Y_t: the
/// other parents of X over lags gamma_xy..gamma_xy+gamma_max, plus the past
/// of X over the same span when X has a loop.
[[nodiscard]] inline AdjustmentSet total_effect_adjustment_set(const Ascgl& graph, VertexId x, VertexId y,
                                                               int gamma_xy, int gamma_max) {
    detail::check_pair(graph, x, y, gamma_xy, gamma_max);
    AdjustmentSet out{{x, gamma_xy}, {y, 0}, {}};
    for (auto b : graph.parents(x))
        for (int k = gamma_xy; k <= gamma_xy + gamma_max; ++k) out.variables.push_back({b, k});
    if (graph.has_loop(x))
        for (int k = gamma_xy + 1; k <= gamma_xy + gamma_max; ++k) out.variables.push_back({x, k});
    std::sort(out.variables.begin(), out.variables.end());
    return out;
}

/// Adjustment set for the direct effect of X at lag gamma_xy on Y_t: every
/// other parent of Y at lags 0..gamma_max and, when Y has a loop, X at its
/// remaining lags plus Y's own past.
[[nodiscard]] inline AdjustmentSet direct_effect_adjustment_set(const Ascgl& graph, VertexId x, VertexId y,
                                                                int gamma_xy, int gamma_max) {
    detail::check_pair(graph, x, y, gamma_xy, gamma_max);
    AdjustmentSet out{{x, gamma_xy}, {y, 0}, {}};
    for (auto b : graph.parents(y)) {
        if (b == x) continue;
        for (int k = 0; k <= gamma_max; ++k) out.variables.push_back({b, k});
    }
    if (graph.has_loop(y)) {
        for (int k = 0; k <= gamma_max; ++k)
            if (k != gamma_xy) out.variables.push_back({x, k});
        for (int k = 1; k <= gamma_max; ++k) out.variables.push_back({y, k});
    }
    std::sort(out.variables.begin(), out.variables.end());
    return out;
}

/// Half-open range of reference times [begin, end) within a dataset.
struct SampleWindow {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct LaggedDesign {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd response;
    std::vector<LaggedVariable> columns;  // regressors, in matrix column order
    bool intercept = false;               // if set, it is the last column
};

/// Materializes the lagged regression of `effect` on `regressors` inside
/// `window`. Rows are reference times t in [begin + max_lag, end), so lagged
/// values never reach before the window. Column vertex ids index `data`
/// columns directly.
[[nodiscard]] inline LaggedDesign build_lagged_design(const Dataset& data, LaggedVariable effect,
                                                      std::span<const LaggedVariable> regressors,
                                                      SampleWindow window, bool intercept = true) {
    if (window.end > data.length() || window.begin > window.end)
        throw Error(ErrorKind::InsufficientSamples, "window [" + std::to_string(window.begin) + ", " +
                                                        std::to_string(window.end) + ") outside data of length " +
                                                        std::to_string(data.length()));
    int max_lag = effect.lag;
    for (const auto& r : regressors) {
        if (r.lag < 0) throw Error(ErrorKind::LagOutOfRange, "negative lag");
        max_lag = std::max(max_lag, r.lag);
    }
    (void)data.column(effect.vertex);
    for (const auto& r : regressors) (void)data.column(r.vertex);

    const std::size_t first = window.begin + static_cast<std::size_t>(max_lag);
    const std::size_t rows = window.end > first ? window.end - first : 0;
    if (rows < regressors.size() + 2)
        throw Error(ErrorKind::InsufficientSamples, std::to_string(rows) + " usable rows for " +
                                                        std::to_string(regressors.size()) + " regressors");

    LaggedDesign d;
    d.columns.assign(regressors.begin(), regressors.end());
    d.intercept = intercept;
    const auto cols = static_cast<Eigen::Index>(regressors.size() + (intercept ? 1 : 0));
    d.matrix.resize(static_cast<Eigen::Index>(rows), cols);
    d.response.resize(static_cast<Eigen::Index>(rows));
    const auto y = data.column(effect.vertex);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        const auto row = static_cast<Eigen::Index>(r);
        d.response(row) = y[t - static_cast<std::size_t>(effect.lag)];
        for (std::size_t j = 0; j < regressors.size(); ++j)
            d.matrix(row, static_cast<Eigen::Index>(j)) =
                data.column(regressors[j].vertex)[t - static_cast<std::size_t>(regressors[j].lag)];
        if (intercept) d.matrix(row, cols - 1) = 1.0;
    }
    return d;
}

struct RegressionFit {
    std::vector<double> coefficients;  // one per design column
    double cause_coefficient = 0.0;
    double standard_error = 0.0;      // of the cause coefficient
    double residual_variance = 0.0;
    int dof = 0;
    std::size_t n_samples = 0;
};

/// Ordinary least squares via column-pivoting QR. Fails on rank-deficient
/// designs instead of dropping columns.
[[nodiscard]] inline RegressionFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                           std::size_t cause_column) {
    const auto n = design.rows();
    const auto p = design.cols();
    if (response.size() != n) throw Error(ErrorKind::InvalidInput, "response length differs from design rows");
    if (static_cast<Eigen::Index>(cause_column) >= p) throw Error(ErrorKind::InvalidInput, "cause column out of range");
    if (n <= p)
        throw Error(ErrorKind::InsufficientSamples,
                    std::to_string(n) + " rows for " + std::to_string(p) + " columns");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < p)
        throw Error(ErrorKind::RankDeficient, "design has rank " + std::to_string(qr.rank()) + " < " + std::to_string(p));

    const Eigen::VectorXd beta = qr.solve(response);
    const Eigen::VectorXd residual = response - design * beta;

    RegressionFit fit;
    fit.n_samples = static_cast<std::size_t>(n);
    fit.dof = static_cast<int>(n - p);
    fit.residual_variance = residual.squaredNorm() / fit.dof;
    fit.coefficients.assign(beta.data(), beta.data() + p);
    fit.cause_coefficient = beta(static_cast<Eigen::Index>(cause_column));

    // (X'X)^-1 = P R^-1 R^-T P'; the diagonal entry for column j is the squared
    // norm of row k of R^-1, with k the pivoted position of j.
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const auto& perm = qr.colsPermutation().indices();
    Eigen::Index k = 0;
    while (perm(k) != static_cast<Eigen::Index>(cause_column)) ++k;
    fit.standard_error = std::sqrt(fit.residual_variance * r_inv.row(k).squaredNorm());
    return fit;
}

namespace detail {

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidInput, "alpha must lie in (0, 1)");
}

/// Upper-tail quantile of Student's t.
inline double t_upper_quantile(double dof, double tail) {
    boost::math::students_t dist(dof);
    return boost::math::quantile(boost::math::complement(dist, tail));
}

}  // namespace detail

/// Two-sided Grubbs critical value for n values at level alpha.
[[nodiscard]] inline double grubbs_critical_value(std::size_t n, double alpha) {
    if (n < 3) throw Error(ErrorKind::InvalidInput, "Grubbs test needs at least 3 values");
    detail::check_alpha(alpha);
    const double nn = static_cast<double>(n);
    const double t = detail::t_upper_quantile(nn - 2.0, alpha / (2.0 * nn));
    return (nn - 1.0) / std::sqrt(nn) * std::sqrt(t * t / (nn - 2.0 + t * t));
}

struct GrubbsStatistic {
    double g = 0.0;               // |x_c - mean| / s, 0 when s == 0
    bool candidate_is_max = false;
};

[[nodiscard]] inline GrubbsStatistic grubbs_statistic(std::span<const double> values, std::size_t candidate) {
    if (values.size() < 3) throw Error(ErrorKind::InvalidInput, "Grubbs test needs at least 3 values");
    if (candidate >= values.size()) throw Error(ErrorKind::InvalidInput, "candidate index out of range");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0, max_dev = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
        max_dev = std::max(max_dev, std::abs(v - mean));
    }
    const double s = std::sqrt(ss / (n - 1.0));
    const double dev = std::abs(values[candidate] - mean);
    GrubbsStatistic out;
    out.candidate_is_max = dev >= max_dev;
    out.g = s > 0.0 ? dev / s : 0.0;
    return out;
}

/// True iff the candidate is the largest deviant from the mean and exceeds
/// the two-sided Grubbs critical value.
[[nodiscard]] inline bool grubbs_outlier_test(std::span<const double> values, std::size_t candidate, double alpha) {
    const auto stat = grubbs_statistic(values, candidate);
    if (stat.g == 0.0) return false;
    return stat.candidate_is_max && stat.g > grubbs_critical_value(values.size(), alpha);
}

/// Two-sided t-test of "cause coefficient is zero". A zero standard error with a
/// non-zero coefficient is a degenerate fit and tests as non-zero.
[[nodiscard]] inline bool coefficient_zero_test(const RegressionFit& fit, double alpha) {
    detail::check_alpha(alpha);
    if (fit.cause_coefficient == 0.0) return true;
    if (fit.standard_error == 0.0) return false;
    if (fit.dof < 1) throw Error(ErrorKind::InsufficientSamples, "fit has no residual degrees of freedom");
    const double t = std::abs(fit.cause_coefficient / fit.standard_error);
    return t <= detail::t_upper_quantile(fit.dof, alpha / 2.0);
}

enum class Classification { None, Structural, Parametric };

[[nodiscard]] constexpr std::string_view to_string(Classification c) noexcept {
    switch (c) {
        case Classification::None: return "none";
        case Classification::Structural: return "structural";
        case Classification::Parametric: return "parametric";
    }
    return "none";
}

struct ChangeVerdict {
    bool changed = false;
    bool anomalous_effect_zero = false;
    bool normal_effect_zero = false;  // pooled normal gate; when set, nothing is tested
    bool degenerate_fit = false;
    Classification classification = Classification::None;

    /// Cause coefficients: [0] anomalous window, then normal chunks from the
    /// most recent backwards.
    std::vector<double> coefficients;
    double grubbs_statistic = 0.0;
    double grubbs_critical = 0.0;
    double anomalous_standard_error = 0.0;
    double pooled_coefficient = 0.0;
    double pooled_standard_error = 0.0;
    std::size_t rows_per_fit = 0;
};

/// Compares the direct effect X_{t-gamma_xy} -> Y_t between regimes. Fits the
/// direct-effect regression on the whole anomalous dataset and on `n_chunks`
/// contiguous normal chunks of the same length taken from the end of the
/// normal data; a change is declared when the pooled normal effect is
/// non-zero and the anomalous coefficient is a Grubbs outlier among all fits.
/// Both datasets must have columns in graph vertex order.
[[nodiscard]] inline ChangeVerdict compare_direct_effects(const Ascgl& graph, const Dataset& normal,
                                                          const Dataset& anomalous, VertexId x, VertexId y,
                                                          int gamma_xy, int gamma_max, double alpha,
                                                          int n_chunks = 10) {
    detail::check_alpha(alpha);
    if (n_chunks < 2) throw Error(ErrorKind::ChunkingImpossible, "need at least 2 normal chunks");
    if (normal.names() != graph.names() || anomalous.names() != graph.names())
        return compare_direct_effects(graph, normal.aligned_to(graph), anomalous.aligned_to(graph), x, y, gamma_xy,
                                      gamma_max, alpha, n_chunks);

    const auto adj = direct_effect_adjustment_set(graph, x, y, gamma_xy, gamma_max);
    std::vector<LaggedVariable> regressors{adj.cause};
    regressors.insert(regressors.end(), adj.variables.begin(), adj.variables.end());

    const std::size_t len = anomalous.length();
    const auto chunks = static_cast<std::size_t>(n_chunks);
    if (normal.length() < chunks * len)
        throw Error(ErrorKind::ChunkingImpossible, "normal regime has " + std::to_string(normal.length()) +
                                                       " samples, need " + std::to_string(chunks) + " x " +
                                                       std::to_string(len));

    const auto anomalous_design = build_lagged_design(anomalous, adj.effect, regressors, {0, len});
    const auto anomalous_fit = ols_fit(anomalous_design.matrix, anomalous_design.response, 0);

    ChangeVerdict v;
    v.rows_per_fit = anomalous_fit.n_samples;
    v.coefficients.push_back(anomalous_fit.cause_coefficient);
    v.anomalous_standard_error = anomalous_fit.standard_error;

    std::vector<LaggedDesign> chunk_designs;
    const std::size_t end = normal.length();
    for (std::size_t k = 0; k < chunks; ++k) {
        chunk_designs.push_back(
            build_lagged_design(normal, adj.effect, regressors, {end - (k + 1) * len, end - k * len}));
        const auto& d = chunk_designs.back();
        v.coefficients.push_back(ols_fit(d.matrix, d.response, 0).cause_coefficient);
    }

    const auto rows = chunk_designs.front().matrix.rows();
    Eigen::MatrixXd pooled_x(rows * n_chunks, chunk_designs.front().matrix.cols());
    Eigen::VectorXd pooled_y(rows * n_chunks);
    for (Eigen::Index k = 0; k < n_chunks; ++k) {
        pooled_x.middleRows(k * rows, rows) = chunk_designs[static_cast<std::size_t>(k)].matrix;
        pooled_y.segment(k * rows, rows) = chunk_designs[static_cast<std::size_t>(k)].response;
    }
    const auto pooled = ols_fit(pooled_x, pooled_y, 0);
    v.pooled_coefficient = pooled.cause_coefficient;
    v.pooled_standard_error = pooled.standard_error;
    v.normal_effect_zero = coefficient_zero_test(pooled, alpha);

    const auto g = grubbs_statistic(v.coefficients, 0);
    v.grubbs_statistic = g.g;
    v.grubbs_critical = grubbs_critical_value(v.coefficients.size(), alpha);

    v.degenerate_fit = anomalous_fit.standard_error == 0.0 && anomalous_fit.cause_coefficient != 0.0;
    v.anomalous_effect_zero = coefficient_zero_test(anomalous_fit, alpha);
    v.changed = !v.normal_effect_zero && grubbs_outlier_test(v.coefficients, 0, alpha);
    if (v.changed)
        v.classification = v.anomalous_effect_zero ? Classification::Structural : Classification::Parametric;
    return v;
}

}  // namespace easyrca
