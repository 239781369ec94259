#include "skelfreq/features.hpp"

#include <algorithm>
#include <cmath>

namespace skelfreq {

SkeletonSequence::SkeletonSequence(TopologyPtr topology, std::size_t frames, std::vector<double> positions,
                                   SequenceMeta m)
    : meta(std::move(m)), topology_(std::move(topology)), frames_(frames), positions_(std::move(positions)) {
  require(topology_ != nullptr, ErrorKind::data, "sequence needs a topology");
  require(frames_ >= 1, ErrorKind::data, "sequence needs at least one frame");
  require(positions_.size() == frames_ * topology_->node_count * 3, ErrorKind::shape,
          "position buffer does not match T x N x 3");
  for (const double v : positions_) require(std::isfinite(v), ErrorKind::data, "non-finite joint coordinate");
}

SkeletonSequence::SkeletonSequence(TopologyPtr topology, std::size_t frames, SequenceMeta m)
    : SkeletonSequence(topology, frames, std::vector<double>(frames * (topology ? topology->node_count : 0) * 3, 0.0),
                       std::move(m)) {}

std::string_view to_string(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::joint: return "joint";
    case FeatureKind::joint_motion: return "joint_motion";
    case FeatureKind::bone: return "bone";
    case FeatureKind::bone_motion: return "bone_motion";
  }
  return "joint";
}

FeatureKind parse_feature_kind(std::string_view name) {
  std::string n(name);
  std::replace(n.begin(), n.end(), '-', '_');
  for (const auto k : {FeatureKind::joint, FeatureKind::joint_motion, FeatureKind::bone, FeatureKind::bone_motion})
    if (n == to_string(k)) return k;
  fail(ErrorKind::parameter, "unknown feature kind '" + std::string(name) + "'");
}

namespace {

bool is_motion(FeatureKind kind) { return kind == FeatureKind::joint_motion || kind == FeatureKind::bone_motion; }
bool is_bone(FeatureKind kind) { return kind == FeatureKind::bone || kind == FeatureKind::bone_motion; }

// In-place forward difference along time with a zero last frame.
void forward_difference(SpatioTemporalSignal& s) {
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    for (std::size_t t = 0; t + 1 < row.size(); ++t) row[t] = row[t + 1] - row[t];
    row[row.size() - 1] = 0.0;
  }
}

// Transpose of forward_difference.
void forward_difference_adjoint(SpatioTemporalSignal& g) {
  for (std::size_t i = 0; i < g.rows(); ++i) {
    auto row = g.row(i);
    const std::size_t T = row.size();
    std::vector<double> out(T, 0.0);
    for (std::size_t t = 0; t + 1 < T; ++t) {
      out[t + 1] += row[t];
      out[t] -= row[t];
    }
    std::copy(out.begin(), out.end(), row.begin());
  }
}

}  // namespace

SignalTriple extract_feature(const SkeletonSequence& seq, FeatureKind kind) {
  const std::size_t N = seq.nodes();
  const std::size_t T = seq.frames();
  require(!is_motion(kind) || T >= 2, ErrorKind::data, "motion features need at least two frames");
  SignalTriple out{Matrix(N, T), Matrix(N, T), Matrix(N, T)};
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t c = 0; c < 3; ++c) out[c](i, t) = seq.at(t, i, c);

  if (is_bone(kind)) {
    const auto parent = seq.topology().parents();
    SignalTriple joints = out;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t t = 0; t < T; ++t)
          out[c](i, t) = parent[i] == i ? 0.0 : joints[c](i, t) - joints[c](parent[i], t);
  }
  if (is_motion(kind))
    for (auto& ch : out) forward_difference(ch);
  return out;
}

std::vector<double> feature_adjoint(const SignalTriple& grad, const SkeletonTopology& topology, FeatureKind kind) {
  const std::size_t N = topology.node_count;
  const std::size_t T = grad[0].cols();
  for (const auto& g : grad)
    require(g.rows() == N && g.cols() == T, ErrorKind::shape, "feature gradient shape mismatch");
  SignalTriple g = grad;
  if (is_motion(kind))
    for (auto& ch : g) forward_difference_adjoint(ch);
  if (is_bone(kind)) {
    const auto parent = topology.parents();
    SignalTriple joints{Matrix(N, T), Matrix(N, T), Matrix(N, T)};
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < N; ++i) {
        if (parent[i] == i) continue;
        for (std::size_t t = 0; t < T; ++t) {
          joints[c](i, t) += g[c](i, t);
          joints[c](parent[i], t) -= g[c](i, t);
        }
      }
    g = std::move(joints);
  }
  std::vector<double> out(T * N * 3);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t c = 0; c < 3; ++c) out[(t * N + i) * 3 + c] = g[c](i, t);
  return out;
}

namespace {

struct Tap {
  std::size_t lo;
  double frac;
};

std::vector<Tap> resample_taps(std::size_t from, std::size_t to) {
  std::vector<Tap> taps(to);
  for (std::size_t i = 0; i < to; ++i) {
    if (from == 1 || i == 0) {
      taps[i] = {0, 0.0};
      continue;
    }
    if (i + 1 == to) {
      taps[i] = {from - 1, 0.0};
      continue;
    }
    const double pos = static_cast<double>(i) * static_cast<double>(from - 1) / static_cast<double>(to - 1);
    const auto lo = std::min(static_cast<std::size_t>(std::floor(pos)), from - 1);
    taps[i] = {lo, pos - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

SpatioTemporalSignal resample_temporal(const SpatioTemporalSignal& signal, std::size_t frames) {
  require(frames >= 1, ErrorKind::parameter, "resampled length must be at least 1");
  require(signal.cols() >= 1, ErrorKind::shape, "cannot resample an empty signal");
  const std::size_t T = signal.cols();
  if (T == frames) return signal;
  const auto taps = resample_taps(T, frames);
  Matrix out(signal.rows(), frames);
  for (std::size_t r = 0; r < signal.rows(); ++r) {
    const auto in = signal.row(r);
    auto dst = out.row(r);
    for (std::size_t i = 0; i < frames; ++i) {
      const auto [lo, frac] = taps[i];
      dst[i] = frac == 0.0 ? in[lo] : (1.0 - frac) * in[lo] + frac * in[lo + 1];
    }
  }
  return out;
}

SpatioTemporalSignal resample_adjoint(const SpatioTemporalSignal& grad, std::size_t original_frames) {
  require(original_frames >= 1, ErrorKind::parameter, "original length must be at least 1");
  const std::size_t frames = grad.cols();
  if (frames == original_frames) return grad;
  const auto taps = resample_taps(original_frames, frames);
  Matrix out(grad.rows(), original_frames);
  for (std::size_t r = 0; r < grad.rows(); ++r) {
    const auto g = grad.row(r);
    auto dst = out.row(r);
    for (std::size_t i = 0; i < frames; ++i) {
      const auto [lo, frac] = taps[i];
      if (frac == 0.0) {
        dst[lo] += g[i];
      } else {
        dst[lo] += (1.0 - frac) * g[i];
        dst[lo + 1] += frac * g[i];
      }
    }
  }
  return out;
}

double head_length(const SkeletonSequence& seq) {
  const auto& hp = seq.topology().head_pair;
  require(hp.has_value(), ErrorKind::parameter, "topology has no head pair configured");
  const auto [neck, head] = *hp;
  double total = 0.0;
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = seq.at(t, head, c) - seq.at(t, neck, c);
      d2 += d * d;
    }
    total += std::sqrt(d2);
  }
  const double mean = total / static_cast<double>(seq.frames());
  require(mean > 0.0, ErrorKind::data, "head length is zero in every frame");
  return mean;
}

SignalTriple InputPipeline::operator()(const SkeletonSequence& seq) const {
  auto channels = extract_feature(seq, kind);
  for (auto& ch : channels) ch = resample_temporal(ch, frames);
  return channels;
}

std::vector<double> InputPipeline::backprop(const SignalTriple& grad, const SkeletonSequence& seq) const {
  SignalTriple g;
  for (std::size_t c = 0; c < 3; ++c) g[c] = resample_adjoint(grad[c], seq.frames());
  return feature_adjoint(g, seq.topology(), kind);
}

}  // namespace skelfreq
