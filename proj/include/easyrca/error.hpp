#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace easyrca {

enum class ErrorKind {
    CyclicGraph,
    UnknownVertex,
    LagOutOfRange,
    OverlappingSets,
    NoSuchEdge,
    InsufficientSamples,
    MissingVertex,
    RankDeficient,
    ChunkingImpossible,
    LagExceedsMax,
    WindowOutOfRange,
    NoParents,
    GenerationFailed,
    RaggedRows,
    NonNumericCell,
    DuplicateColumn,
    InvalidInput,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::CyclicGraph: return "CyclicGraph";
        case ErrorKind::UnknownVertex: return "UnknownVertex";
        case ErrorKind::LagOutOfRange: return "LagOutOfRange";
        case ErrorKind::OverlappingSets: return "OverlappingSets";
        case ErrorKind::NoSuchEdge: return "NoSuchEdge";
        case ErrorKind::InsufficientSamples: return "InsufficientSamples";
        case ErrorKind::MissingVertex: return "MissingVertex";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::ChunkingImpossible: return "ChunkingImpossible";
        case ErrorKind::LagExceedsMax: return "LagExceedsMax";
        case ErrorKind::WindowOutOfRange: return "WindowOutOfRange";
        case ErrorKind::NoParents: return "NoParents";
        case ErrorKind::GenerationFailed: return "GenerationFailed";
        case ErrorKind::RaggedRows: return "RaggedRows";
        case ErrorKind::NonNumericCell: return "NonNumericCell";
        case ErrorKind::DuplicateColumn: return "DuplicateColumn";
        case ErrorKind::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    /// The text without the kind prefix.
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

}  // namespace easyrca
