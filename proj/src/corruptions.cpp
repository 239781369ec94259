#include "skelfreq/corruptions.hpp"

#include <cmath>
#include <charconv>
#include <json.hpp>

#include "skelfreq/rng.hpp"

namespace skelfreq {
namespace {

void record(SkeletonSequence& seq, const nlohmann::json& entry) { seq.meta.history.push_back(entry.dump()); }

}  // namespace

SkeletonSequence gaussian_corrupt(const SkeletonSequence& seq, double sigma, std::uint64_t seed) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::parameter, "gaussian sigma must be positive");
  SkeletonSequence out = seq;
  Rng rng(seed);
  for (double& v : out.positions()) v += rng.normal(0.0, sigma);
  record(out, {{"kind", "gaussian"}, {"sigma", sigma}, {"seed", seed}});
  return out;
}

namespace {

SkeletonSequence drop_and_interpolate(const SkeletonSequence& seq, double p, std::uint64_t seed, bool sampled) {
  require(p >= 0.0 && p < 1.0, ErrorKind::parameter, "frame loss rate must lie in [0, 1)");
  const std::size_t T = seq.frames();
  std::vector<std::size_t> kept;
  Rng rng(seed);
  for (std::size_t t = 0; t < T; ++t) {
    const bool endpoint = t == 0 || t + 1 == T;
    // draw for every interior frame so the pattern depends only on (seed, T)
    const bool lost = !endpoint && rng.bernoulli(p);
    if (!lost) kept.push_back(t);
  }

  SkeletonSequence out = seq;
  const std::size_t N = seq.nodes();
  for (std::size_t s = 0; s + 1 < kept.size(); ++s) {
    const std::size_t a = kept[s];
    const std::size_t b = kept[s + 1];
    for (std::size_t t = a + 1; t < b; ++t) {
      const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t c = 0; c < 3; ++c) out.at(t, i, c) = (1.0 - w) * seq.at(a, i, c) + w * seq.at(b, i, c);
    }
  }
  nlohmann::json entry{{"kind", "frame_loss"}, {"p", p}, {"seed", seed}, {"frames_lost", T - kept.size()}};
  if (sampled) entry["p_mode"] = "sampled";
  record(out, entry);
  return out;
}

}  // namespace

SkeletonSequence frame_loss(const SkeletonSequence& seq, double p, std::uint64_t seed) {
  return drop_and_interpolate(seq, p, seed, false);
}

SkeletonSequence frame_loss_sampled(const SkeletonSequence& seq, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  const double p = rng.uniform(0.0, 1.0);
  return drop_and_interpolate(seq, p, derive_seed(seed, 1), true);
}

SkeletonSequence part_occlusion(const SkeletonSequence& seq, int part_id) {
  const auto& parts = seq.topology().part_sets;
  const auto it = parts.find(part_id);
  require(it != parts.end(), ErrorKind::parameter, "unknown body part " + std::to_string(part_id));
  SkeletonSequence out = seq;
  for (std::size_t t = 0; t < out.frames(); ++t)
    for (const auto j : it->second)
      for (std::size_t c = 0; c < 3; ++c) out.at(t, j, c) = 0.0;
  record(out, {{"kind", "part_occlusion"}, {"part", part_id}, {"applied_to", "raw_positions"}});
  return out;
}

CorruptionSpec CorruptionSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc{} && ptr == s.data() + s.size(), ErrorKind::parameter,
            "bad corruption parameter '" + std::string(s) + "'");
    return v;
  };
  CorruptionSpec spec;
  if (name == "none" || name == "identity") {
    spec.kind = CorruptionKind::none;
  } else if (name == "gaussian") {
    spec.kind = CorruptionKind::gaussian;
    spec.parameter = number(arg);
    require(spec.parameter > 0.0, ErrorKind::parameter, "gaussian sigma must be positive");
  } else if (name == "frame_loss" || name == "frame-loss") {
    if (arg == "sample" || arg == "sampled") {
      spec.kind = CorruptionKind::frame_loss_sampled;
    } else {
      spec.kind = CorruptionKind::frame_loss;
      spec.parameter = number(arg);
      require(spec.parameter >= 0.0 && spec.parameter < 1.0, ErrorKind::parameter, "frame loss rate must be in [0, 1)");
    }
  } else if (name == "occlusion" || name == "part_occlusion") {
    spec.kind = CorruptionKind::part_occlusion;
    const double part = number(arg);
    require(part == std::floor(part), ErrorKind::parameter, "occlusion part must be an integer");
    spec.part = static_cast<int>(part);
  } else {
    fail(ErrorKind::parameter, "unknown corruption '" + std::string(text) + "'");
  }
  return spec;
}

std::string CorruptionSpec::describe() const {
  switch (kind) {
    case CorruptionKind::none: return "none";
    case CorruptionKind::gaussian: return "gaussian:" + nlohmann::json(parameter).dump();
    case CorruptionKind::frame_loss: return "frame_loss:" + nlohmann::json(parameter).dump();
    case CorruptionKind::frame_loss_sampled: return "frame_loss:sample";
    case CorruptionKind::part_occlusion: return "occlusion:" + std::to_string(part);
  }
  return "none";
}

SkeletonSequence apply_corruption(const SkeletonSequence& seq, const CorruptionSpec& spec) {
  switch (spec.kind) {
    case CorruptionKind::none: return seq;
    case CorruptionKind::gaussian: return gaussian_corrupt(seq, spec.parameter, spec.seed);
    case CorruptionKind::frame_loss: return frame_loss(seq, spec.parameter, spec.seed);
    case CorruptionKind::frame_loss_sampled: return frame_loss_sampled(seq, spec.seed);
    case CorruptionKind::part_occlusion: return part_occlusion(seq, spec.part);
  }
  return seq;
}

}  // namespace skelfreq
