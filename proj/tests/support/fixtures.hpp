#pragma once

#include <random>

#include "skelfreq/features.hpp"

namespace fixture {

/// NTU-shaped sequence with coordinates uniform in [-scale, scale] and the
/// head joint lifted so head length is positive.
inline skelfreq::SkeletonSequence random_sequence(std::size_t frames, std::uint64_t seed, double scale = 0.5,
                                                  int label = 0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  skelfreq::SkeletonSequence seq(skelfreq::ntu25_topology(), frames);
  for (double& v : seq.positions()) v = u(gen);
  for (std::size_t t = 0; t < frames; ++t) {
    seq.at(t, 2, 0) = 0.0;
    seq.at(t, 2, 1) = 0.6;
    seq.at(t, 2, 2) = 3.0;
    seq.at(t, 3, 0) = 0.0;
    seq.at(t, 3, 1) = 0.8;
    seq.at(t, 3, 2) = 3.0;
  }
  seq.meta.label = label;
  seq.meta.subject = 1;
  return seq;
}

/// Sequence whose every coordinate is an affine function of time.
inline skelfreq::SkeletonSequence linear_ramp(std::size_t frames) {
  skelfreq::SkeletonSequence seq(skelfreq::ntu25_topology(), frames);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t j = 0; j < 25; ++j)
      for (std::size_t c = 0; c < 3; ++c)
        seq.at(t, j, c) = 0.1 * static_cast<double>(j) - 0.3 * static_cast<double>(c) +
                          (0.01 + 0.002 * static_cast<double>(j + c)) * static_cast<double>(t);
  return seq;
}

}  // namespace fixture
