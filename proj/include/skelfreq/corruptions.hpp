#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "skelfreq/features.hpp"

namespace skelfreq {

/// Adds i.i.d. N(0, sigma²) noise to every coordinate.
SkeletonSequence gaussian_corrupt(const SkeletonSequence& seq, double sigma, std::uint64_t seed);

/// Drops each interior frame independently with probability p (first and last
/// frames are always kept) and linearly interpolates the lost frames back from
/// their surviving neighbours. Requires 0 <= p < 1.
SkeletonSequence frame_loss(const SkeletonSequence& seq, double p, std::uint64_t seed);

/// frame_loss with the loss rate itself drawn from U[0, 1) using `seed`.
SkeletonSequence frame_loss_sampled(const SkeletonSequence& seq, std::uint64_t seed);

/// Zeroes every coordinate of the joints in part_sets[part_id] on raw
/// positions; all other values are left untouched.
SkeletonSequence part_occlusion(const SkeletonSequence& seq, int part_id);

enum class CorruptionKind { none, gaussian, frame_loss, frame_loss_sampled, part_occlusion };

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::none;
  /// sigma for gaussian, p for frame_loss; unused otherwise.
  double parameter = 0.0;
  int part = 0;
  std::uint64_t seed = 0;

  /// Parses "none", "gaussian:0.05", "frame_loss:0.4", "frame_loss:sample",
  /// "occlusion:3".
  static CorruptionSpec parse(std::string_view text);
  std::string describe() const;
};

SkeletonSequence apply_corruption(const SkeletonSequence& seq, const CorruptionSpec& spec);

}  // namespace skelfreq
