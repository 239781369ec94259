#include "skelfreq/artifacts.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "skelfreq/data_io.hpp"

namespace skelfreq {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t word) {
  for (int b = 0; b < 8; ++b) {
    h ^= (word >> (8 * b)) & 0xff;
    h *= kFnvPrime;
  }
}

void format_double(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  auto p = stem;
  p += suffix;
  return p;
}

template <class T>
T field(const nlohmann::json& meta, const char* key) {
  if (!meta.contains(key)) fail(ErrorKind::format, std::string("metadata is missing '") + key + "'");
  try {
    return meta.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::format, std::string("metadata field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::uint64_t matrix_checksum(const Matrix& m) {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, m.rows());
  fnv_mix(h, m.cols());
  for (double v : m.values()) fnv_mix(h, std::bit_cast<std::uint64_t>(v));
  return h;
}

std::string checksum_hex(std::uint64_t checksum) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checksum));
  return buf;
}

std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  out.reserve(m.size() * 24);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      format_double(out, m(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

Matrix matrix_from_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto cell = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      require(ec == std::errc{} && ptr == cell.data() + cell.size(), ErrorKind::format,
              "CSV row " + std::to_string(rows + 1) + ": bad cell '" + std::string(cell) + "'");
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) cols = count;
    require(count == cols, ErrorKind::format, "CSV row " + std::to_string(rows + 1) + " is ragged");
    ++rows;
  }
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.values().begin());
  return m;
}

void write_gnuplot_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::string out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(' ');
      format_double(out, m(r, c));
    }
    out.push_back('\n');
  }
  write_text_file_atomic(path, out);
}

void write_matrix_artifact(const std::filesystem::path& stem, const Matrix& m, nlohmann::json metadata) {
  if (metadata.is_null()) metadata = nlohmann::json::object();
  require(metadata.is_object(), ErrorKind::format, "artifact metadata must be a JSON object");
  metadata["rows"] = m.rows();
  metadata["cols"] = m.cols();
  metadata["checksum"] = checksum_hex(matrix_checksum(m));
  write_text_file_atomic(with_suffix(stem, ".csv"), matrix_to_csv(m));
  write_text_file_atomic(with_suffix(stem, ".json"), metadata.dump(2) + "\n");
}

MatrixArtifact read_matrix_artifact(const std::filesystem::path& stem) {
  MatrixArtifact out;
  const auto meta_text = read_text_file(with_suffix(stem, ".json"));
  try {
    out.metadata = nlohmann::json::parse(meta_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("artifact metadata: ") + e.what());
  }
  require(out.metadata.is_object(), ErrorKind::format, "artifact metadata must be a JSON object");
  out.values = matrix_from_csv(read_text_file(with_suffix(stem, ".csv")));
  const auto rows = field<std::size_t>(out.metadata, "rows");
  const auto cols = field<std::size_t>(out.metadata, "cols");
  require(out.values.rows() == rows && out.values.cols() == cols, ErrorKind::format,
          "artifact CSV shape disagrees with its metadata");
  require(field<std::string>(out.metadata, "checksum") == checksum_hex(matrix_checksum(out.values)),
          ErrorKind::format, "artifact checksum mismatch");
  return out;
}

void write_heatmap(const std::filesystem::path& stem, const HeatmapGrid& grid, const nlohmann::json& config) {
  nlohmann::json meta = {
      {"format", "skelfreq-heatmap"},
      {"version", 1},
      {"feature_kind", to_string(grid.feature_kind)},
      {"v", grid.v},
      {"sample_count", grid.sample_count},
      {"requested_samples", grid.requested_samples},
      {"base_seed", grid.base_seed},
      {"basis_id", grid.basis_id},
      {"model_id", grid.model_id},
      {"mirrored", grid.mirrored},
      {"rows_index", "spatial rank k = 1..N, descending eigenvalue"},
      {"cols_index", "DFT bin l = 0..T-1"},
      {"perturbation", "real F_{k,l} from the conjugate bin pair (k,l), (k,T-l), unit Frobenius norm"},
      {"config", config},
  };
  write_matrix_artifact(stem, grid.error_rates, std::move(meta));
}

HeatmapGrid read_heatmap(const std::filesystem::path& stem) {
  auto art = read_matrix_artifact(stem);
  const auto& meta = art.metadata;
  require(field<std::string>(meta, "format") == "skelfreq-heatmap", ErrorKind::format, "not a heatmap artifact");
  require(field<int>(meta, "version") == 1, ErrorKind::format, "unsupported heatmap version");
  HeatmapGrid grid;
  grid.error_rates = std::move(art.values);
  try {
    grid.feature_kind = parse_feature_kind(field<std::string>(meta, "feature_kind"));
  } catch (const Error&) {
    fail(ErrorKind::format, "heatmap metadata has an unknown feature kind");
  }
  grid.v = field<double>(meta, "v");
  grid.sample_count = field<std::size_t>(meta, "sample_count");
  grid.requested_samples = field<std::size_t>(meta, "requested_samples");
  grid.base_seed = field<std::uint64_t>(meta, "base_seed");
  grid.basis_id = field<std::string>(meta, "basis_id");
  grid.model_id = field<std::string>(meta, "model_id");
  grid.mirrored = field<bool>(meta, "mirrored");
  for (double e : grid.error_rates.values())
    require(e >= 0.0 && e <= 1.0, ErrorKind::format, "heatmap error rate outside [0, 1]");
  return grid;
}

nlohmann::json sweep_table_json(const SweepTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"mask", to_string(r.mask)},
                    {"bandwidth", r.bandwidth},
                    {"fraction", r.fraction},
                    {"model", r.model},
                    {"accuracy", std::isfinite(r.accuracy) ? nlohmann::json(r.accuracy) : nlohmann::json(nullptr)}});
  }
  return {{"model_ids", table.model_ids},
          {"subset_size", table.subset_size},
          {"scaled_norm", table.scaled_norm},
          {"rows", std::move(rows)}};
}

void write_sweep_table(const std::filesystem::path& stem, const SweepTable& table, const nlohmann::json& config) {
  std::string csv = "mask,bandwidth,fraction,model,model_id,accuracy\n";
  for (const auto& r : table.rows) {
    csv += to_string(r.mask) + "," + std::to_string(r.bandwidth) + ",";
    format_double(csv, r.fraction);
    csv += "," + std::to_string(r.model) + "," + table.model_ids.at(r.model) + ",";
    format_double(csv, r.accuracy);
    csv += "\n";
  }
  nlohmann::json meta = {{"format", "skelfreq-sweep"},
                         {"version", 1},
                         {"model_ids", table.model_ids},
                         {"subset_size", table.subset_size},
                         {"scaled_norm", table.scaled_norm},
                         {"config", config}};
  write_text_file_atomic(with_suffix(stem, ".csv"), csv);
  write_text_file_atomic(with_suffix(stem, ".json"), meta.dump(2) + "\n");
}

}  // namespace skelfreq
