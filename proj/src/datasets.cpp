#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "skelfreq/data_io.hpp"
#include "skelfreq/rng.hpp"

namespace skelfreq {
namespace {

int subject_of(const SkeletonSequence& seq) {
  if (seq.meta.subject >= 0) return seq.meta.subject;
  return parse_ntu_name(seq.meta.name).subject;
}

/// Rest pose in meters, Kinect joint order.
constexpr double kRestPose[25][3] = {
    {0.00, 0.00, 3.00},   {0.00, 0.30, 3.00},   {0.00, 0.62, 3.00},   {0.00, 0.80, 3.00},
    {-0.18, 0.52, 3.00},  {-0.22, 0.26, 3.00},  {-0.24, 0.02, 3.00},  {-0.25, -0.06, 3.00},
    {0.18, 0.52, 3.00},   {0.22, 0.26, 3.00},   {0.24, 0.02, 3.00},   {0.25, -0.06, 3.00},
    {-0.09, -0.02, 3.00}, {-0.10, -0.42, 3.00}, {-0.10, -0.80, 3.00}, {-0.10, -0.85, 2.92},
    {0.09, -0.02, 3.00},  {0.10, -0.42, 3.00},  {0.10, -0.80, 3.00},  {0.10, -0.85, 2.92},
    {0.00, 0.55, 3.00},   {-0.26, -0.13, 3.00}, {-0.22, -0.08, 2.98}, {0.26, -0.13, 3.00},
    {0.22, -0.08, 2.98},
};

struct Limb {
  // joints with their distance weight along the limb (1 = most distal)
  std::vector<std::pair<std::size_t, double>> joints;
};

const Limb& limb(std::size_t i) {
  static const Limb limbs[4] = {
      {{{5, 0.5}, {6, 0.9}, {7, 1.0}, {21, 1.0}, {22, 1.0}}},
      {{{9, 0.5}, {10, 0.9}, {11, 1.0}, {23, 1.0}, {24, 1.0}}},
      {{{13, 0.5}, {14, 1.0}, {15, 1.0}}},
      {{{17, 0.5}, {18, 1.0}, {19, 1.0}}},
  };
  return limbs[i % 4];
}

}  // namespace

Split split_cross_subject(const Dataset& data, const std::set<int>& training_subjects) {
  Split out;
  for (const auto& seq : data) (training_subjects.count(subject_of(seq)) ? out.train : out.test).push_back(seq);
  return out;
}

Split validation_split(const Dataset& train, double fraction, std::uint64_t seed) {
  require(fraction >= 0.0 && fraction < 1.0, ErrorKind::parameter, "validation fraction must be in [0, 1)");
  const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
  std::vector<std::size_t> idx(train.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(derive_seed(seed, 0x56414c));
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
  std::vector<bool> is_val(train.size(), false);
  for (std::size_t i = 0; i < held; ++i) is_val[idx[i]] = true;
  Split out;
  for (std::size_t i = 0; i < train.size(); ++i) (is_val[i] ? out.test : out.train).push_back(train[i]);
  return out;
}

Dataset synthetic_actions(std::size_t class_count, std::size_t per_class, std::size_t frames, std::uint64_t seed,
                          const SyntheticOptions& options) {
  require(class_count >= 2, ErrorKind::parameter, "synthetic data needs at least two classes");
  require(per_class >= 1, ErrorKind::parameter, "synthetic data needs at least one item per class");
  require(frames >= 2, ErrorKind::parameter, "synthetic sequences need at least two frames");
  require(options.noise >= 0.0 && options.amplitude >= 0.0, ErrorKind::parameter,
          "synthetic noise and amplitude must be non-negative");
  auto topo = ntu25_topology();
  constexpr std::size_t N = 25;
  const double two_pi = 2.0 * std::numbers::pi;

  Dataset out;
  out.reserve(class_count * per_class);
  for (std::size_t c = 0; c < class_count; ++c) {
    const auto& lmb = limb(c);
    const bool arm = (c % 4) < 2;
    const double cycles = 1.0 + static_cast<double>(c / 4);
    // raise: arms forward and up, legs forward
    const double raise_y = arm ? 0.35 : 0.25;
    const double raise_z = -0.35;
    for (std::size_t i = 0; i < per_class; ++i) {
      Rng rng(derive_seed(seed, c, i));
      const double phase = rng.uniform(0.0, two_pi);
      const double amp = options.amplitude * rng.uniform(0.85, 1.15);
      double shift[3];
      for (double& s : shift) s = 4.0 * options.noise * rng.normal();

      std::vector<double> pos(frames * N * 3);
      for (std::size_t t = 0; t < frames; ++t) {
        const double theta = two_pi * cycles * static_cast<double>(t) / static_cast<double>(frames) + phase;
        double* frame = pos.data() + t * N * 3;
        for (std::size_t j = 0; j < N; ++j)
          for (std::size_t k = 0; k < 3; ++k) frame[j * 3 + k] = kRestPose[j][k] + shift[k];
        for (const auto& [j, w] : lmb.joints) {
          frame[j * 3 + 1] += w * (raise_y + amp * std::sin(theta));
          frame[j * 3 + 2] += w * (raise_z + 0.5 * amp * std::cos(theta));
        }
        if (options.noise > 0.0)
          for (std::size_t q = 0; q < N * 3; ++q) frame[q] += options.noise * rng.normal();
      }
      SequenceMeta meta;
      meta.label = static_cast<int>(c);
      meta.subject = static_cast<int>(i % 40) + 1;
      meta.setup = 1;
      meta.camera = 1;
      meta.replication = static_cast<int>(i / 40) + 1;
      char name[64];
      std::snprintf(name, sizeof name, "S001C001P%03dR%03dA%03d", meta.subject, meta.replication,
                    static_cast<int>(c) + 1);
      meta.name = name;
      out.emplace_back(topo, frames, std::move(pos), std::move(meta));
    }
  }
  return out;
}

std::string sequence_to_json(const SkeletonSequence& seq) {
  nlohmann::json j;
  j["n"] = seq.nodes();
  j["t"] = seq.frames();
  j["label"] = seq.meta.label;
  j["subject"] = seq.meta.subject;
  if (!seq.meta.name.empty()) j["name"] = seq.meta.name;
  if (seq.meta.setup >= 0) j["setup"] = seq.meta.setup;
  if (seq.meta.camera >= 0) j["camera"] = seq.meta.camera;
  if (seq.meta.replication >= 0) j["replication"] = seq.meta.replication;
  if (!seq.meta.history.empty()) j["history"] = seq.meta.history;
  auto frames = nlohmann::json::array();
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    auto joints = nlohmann::json::array();
    for (std::size_t n = 0; n < seq.nodes(); ++n)
      joints.push_back({seq.at(t, n, 0), seq.at(t, n, 1), seq.at(t, n, 2)});
    frames.push_back(std::move(joints));
  }
  j["positions"] = std::move(frames);
  return j.dump();
}

SkeletonSequence sequence_from_json(std::string_view text, TopologyPtr topology) {
  require(topology != nullptr, ErrorKind::parameter, "sequence loader needs a topology");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, std::string("sequence JSON: ") + e.what());
  }
  try {
    const auto n = j.at("n").get<std::size_t>();
    const auto t = j.at("t").get<std::size_t>();
    require(n == topology->node_count, ErrorKind::data,
            "sequence has " + std::to_string(n) + " nodes, topology has " + std::to_string(topology->node_count));
    const auto& frames = j.at("positions");
    require(frames.is_array() && frames.size() == t, ErrorKind::data, "positions must hold t frames");
    std::vector<double> pos;
    pos.reserve(t * n * 3);
    for (const auto& f : frames) {
      require(f.is_array() && f.size() == n, ErrorKind::data, "each frame must hold n joints");
      for (const auto& p : f) {
        require(p.is_array() && p.size() == 3, ErrorKind::data, "each joint must be [x,y,z]");
        for (const auto& v : p) pos.push_back(v.get<double>());
      }
    }
    SequenceMeta meta;
    meta.label = j.value("label", -1);
    meta.subject = j.value("subject", -1);
    meta.name = j.value("name", std::string{});
    meta.setup = j.value("setup", -1);
    meta.camera = j.value("camera", -1);
    meta.replication = j.value("replication", -1);
    if (j.contains("history")) meta.history = j["history"].get<std::vector<std::string>>();
    return SkeletonSequence(std::move(topology), t, std::move(pos), std::move(meta));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, std::string("sequence JSON: ") + e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& path, TopologyPtr topology) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".json" || ext == ".skeleton")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    require(fs::exists(path), ErrorKind::data, "no such dataset: " + path.string());
    files.push_back(path);
  }
  Dataset out;
  for (const auto& f : files) {
    if (f.extension() == ".skeleton") {
      for (auto& s : load_ntu_file(f, topology)) out.push_back(std::move(s));
    } else {
      out.push_back(sequence_from_json(read_text_file(f), topology));
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::data, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::format, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    require(static_cast<bool>(out), ErrorKind::format, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorKind::format, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace skelfreq
