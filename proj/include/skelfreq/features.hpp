#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "skelfreq/skeleton_graph.hpp"
#include "skelfreq/transforms.hpp"

namespace skelfreq {

struct SequenceMeta {
  int label = -1;
  int subject = -1;
  int setup = -1;
  int camera = -1;
  int replication = -1;
  std::string name;
  /// One JSON object per corruption applied, oldest first.
  std::vector<std::string> history;

  friend bool operator==(const SequenceMeta&, const SequenceMeta&) = default;
};

/// Per-frame 3D joint positions (meters) of one body, stored frame-major:
/// positions[(t * N + joint) * 3 + axis].
class SkeletonSequence {
 public:
  SkeletonSequence() = default;
  SkeletonSequence(TopologyPtr topology, std::size_t frames, std::vector<double> positions, SequenceMeta meta = {});
  /// All-zero sequence.
  SkeletonSequence(TopologyPtr topology, std::size_t frames, SequenceMeta meta = {});

  const SkeletonTopology& topology() const { return *topology_; }
  const TopologyPtr& topology_ptr() const noexcept { return topology_; }
  std::size_t frames() const noexcept { return frames_; }
  std::size_t nodes() const noexcept { return topology_ ? topology_->node_count : 0; }

  double& at(std::size_t t, std::size_t joint, std::size_t axis) noexcept {
    return positions_[(t * nodes() + joint) * 3 + axis];
  }
  double at(std::size_t t, std::size_t joint, std::size_t axis) const noexcept {
    return positions_[(t * nodes() + joint) * 3 + axis];
  }

  std::vector<double>& positions() noexcept { return positions_; }
  const std::vector<double>& positions() const noexcept { return positions_; }

  SequenceMeta meta;

  friend bool operator==(const SkeletonSequence& a, const SkeletonSequence& b) {
    return a.topology_ == b.topology_ && a.frames_ == b.frames_ && a.positions_ == b.positions_ && a.meta == b.meta;
  }

 private:
  TopologyPtr topology_;
  std::size_t frames_ = 0;
  std::vector<double> positions_;
};

enum class FeatureKind { joint, joint_motion, bone, bone_motion };

std::string_view to_string(FeatureKind kind) noexcept;
/// Accepts "joint", "joint_motion", "bone", "bone_motion" (also with '-').
FeatureKind parse_feature_kind(std::string_view name);

/// Joint positions, their forward differences, bone vectors (joint minus
/// parent joint), or forward differences of bones. Motion features pad the
/// last frame with zeros so every channel stays N × T.
SignalTriple extract_feature(const SkeletonSequence& seq, FeatureKind kind);

/// Transpose of extract_feature as a linear map from positions to features:
/// takes a gradient with respect to the feature channels and returns the
/// gradient with respect to positions (frame-major layout).
std::vector<double> feature_adjoint(const SignalTriple& grad, const SkeletonTopology& topology, FeatureKind kind);

/// Piecewise-linear resampling of every node row onto `frames` points
/// t'_i = i (T - 1) / (frames - 1); both endpoints are copied exactly.
SpatioTemporalSignal resample_temporal(const SpatioTemporalSignal& signal, std::size_t frames);

/// Transpose of resample_temporal from `original_frames` frames.
SpatioTemporalSignal resample_adjoint(const SpatioTemporalSignal& grad, std::size_t original_frames);

/// Mean neck-to-head distance over all frames. Throws data-error when it is
/// zero and parameter-error when the topology has no head pair.
double head_length(const SkeletonSequence& seq);

/// Default analysis length T'.
inline constexpr std::size_t default_resampled_frames = 64;

/// Raw positions → feature channels → resampled to `frames`.
struct InputPipeline {
  FeatureKind kind = FeatureKind::joint;
  std::size_t frames = default_resampled_frames;

  SignalTriple operator()(const SkeletonSequence& seq) const;
  /// Pulls a gradient with respect to the model input back to positions.
  std::vector<double> backprop(const SignalTriple& grad, const SkeletonSequence& seq) const;

  friend bool operator==(const InputPipeline&, const InputPipeline&) = default;
};

}  // namespace skelfreq
