#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "skelfreq/harness.hpp"

namespace skelfreq {

/// FNV-1a over the IEEE-754 bit patterns of the entries, row-major, prefixed
/// by the shape. Identical matrices give identical checksums.
std::uint64_t matrix_checksum(const Matrix& m);
std::string checksum_hex(std::uint64_t checksum);

/// Comma-separated rows, 17 significant digits, '\n' line ends.
std::string matrix_to_csv(const Matrix& m);
/// Throws format-error on ragged rows or non-numeric cells.
Matrix matrix_from_csv(std::string_view text);

/// Whitespace-separated rows for gnuplot's `matrix` data format.
void write_gnuplot_matrix(const std::filesystem::path& path, const Matrix& m);

/// Writes `<stem>.csv` and `<stem>.json`; the sidecar gets rows, cols and the
/// checksum on top of `metadata`. Both files use atomic renames.
void write_matrix_artifact(const std::filesystem::path& stem, const Matrix& m, nlohmann::json metadata);

struct MatrixArtifact {
  Matrix values;
  nlohmann::json metadata;
};

/// Reads an artifact back and checks shape and checksum (format-error).
MatrixArtifact read_matrix_artifact(const std::filesystem::path& stem);

/// Heatmap as a matrix artifact whose sidecar carries every HeatmapGrid field
/// plus `config` (the caller's effective configuration, may be null).
void write_heatmap(const std::filesystem::path& stem, const HeatmapGrid& grid,
                   const nlohmann::json& config = nullptr);
/// Missing or mistyped metadata fields raise format-error.
HeatmapGrid read_heatmap(const std::filesystem::path& stem);

/// `<stem>.csv` with one row per SweepRow plus a `<stem>.json` sidecar.
void write_sweep_table(const std::filesystem::path& stem, const SweepTable& table,
                       const nlohmann::json& config = nullptr);
nlohmann::json sweep_table_json(const SweepTable& table);

}  // namespace skelfreq
