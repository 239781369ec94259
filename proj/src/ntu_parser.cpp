#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <regex>

#include "skelfreq/data_io.hpp"

namespace skelfreq {
namespace {

/// Line cursor that remembers 1-based line numbers and skips blank lines.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  /// Next non-blank line split into whitespace fields.
  std::vector<std::string_view> next(const char* what) {
    while (pos_ < text_.size()) {
      auto end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      auto fields = split(line);
      if (!fields.empty()) return fields;
    }
    throw ParseError(line_ + 1, std::string("unexpected end of file, expected ") + what);
  }

  std::size_t line() const noexcept { return line_; }

  bool at_end() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
      if (c == '\n') ++line_;
      ++pos_;
    }
    return true;
  }

 private:
  static std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

long long parse_count(const std::vector<std::string_view>& fields, std::size_t line, const char* what) {
  if (fields.size() != 1) throw ParseError(line, std::string("expected a single ") + what);
  long long v = 0;
  const auto s = fields[0];
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0)
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(s) + "'");
  return v;
}

long long read_count(LineReader& reader, const char* what) {
  const auto fields = reader.next(what);
  return parse_count(fields, reader.line(), what);
}

double parse_coordinate(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(line, "non-numeric coordinate '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::vector<SkeletonSequence> parse_ntu_skeleton(std::string_view text, TopologyPtr topology) {
  require(topology != nullptr, ErrorKind::parameter, "parser needs a topology");
  const std::size_t N = topology->node_count;
  LineReader reader(text);

  const auto frame_count = static_cast<std::size_t>(read_count(reader, "frame count"));
  if (frame_count == 0) throw ParseError(reader.line(), "file declares zero frames");

  // body id → per-frame positions (empty when the body is absent)
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::vector<double>>> bodies;

  for (std::size_t f = 0; f < frame_count; ++f) {
    const auto body_count = read_count(reader, "body count");
    for (long long b = 0; b < body_count; ++b) {
      const auto info = reader.next("body info line");
      if (info.size() < 2) throw ParseError(reader.line(), "body info line has too few fields");
      const std::string id(info[0]);
      const auto joints = static_cast<std::size_t>(read_count(reader, "joint count"));
      if (joints != N)
        throw ParseError(reader.line(), "declared " + std::to_string(joints) + " joints, topology has " +
                                            std::to_string(N));
      std::vector<double> frame(N * 3);
      for (std::size_t j = 0; j < N; ++j) {
        const auto fields = reader.next("joint line");
        if (fields.size() < 3)
          throw ParseError(reader.line(), "joint " + std::to_string(j + 1) + " of " + std::to_string(joints) +
                                              ": expected at least x y z");
        for (std::size_t c = 0; c < 3; ++c) frame[j * 3 + c] = parse_coordinate(fields[c], reader.line());
      }
      auto [it, inserted] = bodies.try_emplace(id, std::vector<std::vector<double>>(frame_count));
      if (inserted) order.push_back(id);
      if (!it->second[f].empty()) throw ParseError(reader.line(), "body " + id + " appears twice in one frame");
      it->second[f] = std::move(frame);
    }
  }
  if (!reader.at_end()) throw ParseError(reader.line() + 1, "trailing content after the declared frames");

  std::vector<SkeletonSequence> out;
  for (const auto& id : order) {
    const auto& frames = bodies.at(id);
    std::vector<std::size_t> seen;
    for (std::size_t f = 0; f < frame_count; ++f)
      if (!frames[f].empty()) seen.push_back(f);
    std::vector<double> positions(frame_count * N * 3);
    for (std::size_t f = 0; f < frame_count; ++f) {
      // nearest observed frame, earlier one on ties
      auto it = std::lower_bound(seen.begin(), seen.end(), f);
      std::size_t src;
      if (it == seen.end()) {
        src = seen.back();
      } else if (*it == f || it == seen.begin()) {
        src = *it;
      } else {
        const std::size_t after = *it;
        const std::size_t before = *(it - 1);
        src = (f - before) <= (after - f) ? before : after;
      }
      std::copy(frames[src].begin(), frames[src].end(), positions.begin() + static_cast<std::ptrdiff_t>(f * N * 3));
    }
    SequenceMeta meta;
    meta.name = "body:" + id;
    out.emplace_back(topology, frame_count, std::move(positions), std::move(meta));
  }
  return out;
}

NtuSampleId parse_ntu_name(std::string_view name) {
  static const std::regex pattern(R"(S(\d{3})C(\d{3})P(\d{3})R(\d{3})A(\d{3}))");
  const std::string stem = std::filesystem::path(std::string(name)).stem().string();
  std::smatch m;
  require(std::regex_search(stem, m, pattern), ErrorKind::data, "cannot parse NTU sample name '" + stem + "'");
  return {std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3]), std::stoi(m[4]), std::stoi(m[5])};
}

std::vector<SkeletonSequence> load_ntu_file(const std::filesystem::path& path, TopologyPtr topology) {
  const auto id = parse_ntu_name(path.filename().string());
  auto seqs = parse_ntu_skeleton(read_text_file(path), std::move(topology));
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    auto& m = seqs[b].meta;
    m.label = id.action - 1;
    m.subject = id.subject;
    m.setup = id.setup;
    m.camera = id.camera;
    m.replication = id.replication;
    m.name = path.stem().string() + (seqs.size() > 1 ? "#" + std::to_string(b) : "");
  }
  return seqs;
}

const std::set<int>& ntu_cross_subject_training_ids() {
  static const std::set<int> ids = {1,  2,  4,  5,  8,  9,  13, 14, 15, 16,
                                    17, 18, 19, 25, 27, 28, 31, 34, 35, 38};
  return ids;
}

}  // namespace skelfreq
