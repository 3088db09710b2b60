#pragma once

#include <easyrca/error.hpp>
#include <easyrca/graph.hpp>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace easyrca {

enum class Regime { Normal, Anomalous };

/// Aligned per-vertex sample sequences of one regime. Row index is the
/// sample index; every column has the same length.
class Dataset {
public:
    Dataset() = default;

    Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
            Regime regime = Regime::Normal)
        : names_(std::move(names)), columns_(std::move(columns)), regime_(regime) {
        if (names_.size() != columns_.size())
            throw Error(ErrorKind::InvalidInput, "column names and data disagree in count");
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (columns_[i].size() != columns_.front().size())
                throw Error(ErrorKind::RaggedRows, "column '" + names_[i] + "' has a different length");
            for (std::size_t j = 0; j < i; ++j)
                if (names_[i] == names_[j]) throw Error(ErrorKind::DuplicateColumn, "duplicate column '" + names_[i] + "'");
        }
    }

    [[nodiscard]] std::size_t length() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }
    [[nodiscard]] std::size_t width() const noexcept { return columns_.size(); }
    [[nodiscard]] Regime regime() const noexcept { return regime_; }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }

    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const {
        auto it = std::find(names_.begin(), names_.end(), name);
        if (it == names_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - names_.begin());
    }

    [[nodiscard]] std::span<const double> column(std::size_t i) const {
        if (i >= width()) throw Error(ErrorKind::MissingVertex, "column index " + std::to_string(i) + " out of range");
        return columns_[i];
    }

    [[nodiscard]] std::span<const double> column(std::string_view name) const {
        if (auto i = find(name)) return columns_[*i];
        throw Error(ErrorKind::MissingVertex, "no column named '" + std::string(name) + "'");
    }

    /// Columns reordered to the graph's vertex order; extra columns dropped.
    [[nodiscard]] Dataset aligned_to(const Ascgl& graph) const {
        std::vector<std::vector<double>> cols;
        cols.reserve(graph.size());
        for (const auto& n : graph.names()) {
            auto i = find(n);
            if (!i) throw Error(ErrorKind::MissingVertex, "vertex '" + n + "' has no data column");
            cols.push_back(columns_[*i]);
        }
        return Dataset(graph.names(), std::move(cols), regime_);
    }

    /// Rows [begin, end).
    [[nodiscard]] Dataset slice(std::size_t begin, std::size_t end, std::optional<Regime> regime = std::nullopt) const {
        if (begin > end || end > length())
            throw Error(ErrorKind::WindowOutOfRange, "slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                                                         ") outside dataset of length " + std::to_string(length()));
        std::vector<std::vector<double>> cols;
        cols.reserve(width());
        for (const auto& c : columns_)
            cols.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(begin), c.begin() + static_cast<std::ptrdiff_t>(end));
        return Dataset(names_, std::move(cols), regime.value_or(regime_));
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
    Regime regime_ = Regime::Normal;
};

}  // namespace easyrca
