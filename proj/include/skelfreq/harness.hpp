#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skelfreq/classifier.hpp"
#include "skelfreq/corruptions.hpp"
#include "skelfreq/transforms.hpp"

namespace skelfreq {

/// Error rates under single-frequency perturbations. Row k-1 holds spatial
/// rank k (descending λ); column l holds DFT bin l. Columns past T'/2 mirror
/// their conjugate bin because F_{k,l} = F_{k,T'-l}.
struct HeatmapGrid {
  Matrix error_rates;
  FeatureKind feature_kind = FeatureKind::joint;
  double v = 0.0;
  std::size_t sample_count = 0;     ///< items actually evaluated per cell
  std::size_t requested_samples = 0;
  std::uint64_t base_seed = 0;
  std::string basis_id;
  std::string model_id;
  bool mirrored = true;

  friend bool operator==(const HeatmapGrid&, const HeatmapGrid&) = default;
};

struct HeatmapOptions {
  std::size_t jobs = 1;
};

/// Draws min(sample_count, |dataset|) items once without replacement, then
/// for every cell (k, l) adds r_c·v·F_{k,l} to each channel c of each item's
/// model input, with r_c = ±1 from derive_seed(seed, k, l, item, c), and
/// records the error rate. Bit-identical for any `jobs`.
HeatmapGrid fourier_heatmap(const Classifier& model, const Dataset& dataset, const InputPipeline& pipeline,
                            double v, std::size_t sample_count, std::uint64_t seed,
                            const HeatmapOptions& options = {});

/// Indices of the items every model labels correctly on clean input, in
/// dataset order. An empty result only triggers a warning.
std::vector<std::size_t> jointly_correct_indices(std::span<const Classifier* const> models, const Dataset& dataset,
                                                 const InputPipeline& pipeline);
Dataset jointly_correct_subset(const Classifier& a, const Classifier& b, const Dataset& dataset,
                               const InputPipeline& pipeline);

enum class SweepMask { spatial_low, spatial_high, temporal_low, temporal_high, spatiotemporal_low, spatiotemporal_high };

std::string to_string(SweepMask mask);
/// Accepts "spatial-low", "temporal_high", ...; parameter-error otherwise.
SweepMask parse_sweep_mask(std::string_view text);
const std::vector<SweepMask>& all_sweep_masks();

struct SweepRow {
  SweepMask mask = SweepMask::spatial_low;
  std::size_t bandwidth = 0;
  double fraction = 0.0;
  std::size_t model = 0;
  double accuracy = 0.0;
};

struct SweepTable {
  std::vector<std::string> model_ids;
  std::size_t subset_size = 0;
  double scaled_norm = 0.0;
  std::vector<SweepRow> rows;
};

const std::vector<double>& default_sweep_fractions();
inline constexpr std::size_t default_sweep_bandwidth = 2;

/// Accuracy of every model on the jointly-correct subset under band-limited
/// noise of norm fraction × scaled_norm, added per channel to the model input.
/// The noise direction for an (item, channel) depends on the mask and
/// bandwidth only, so fractions rescale one draw and all models see the same
/// noise. Fraction 0 adds nothing.
SweepTable noise_robustness_sweep(std::span<const Classifier* const> models, const Dataset& dataset,
                                  const InputPipeline& pipeline, std::span<const SweepMask> masks,
                                  double scaled_norm, std::span<const double> fractions,
                                  std::span<const std::size_t> bandwidths, std::uint64_t seed);

struct CorruptionReport {
  std::vector<std::string> model_ids;
  std::vector<double> accuracies;
  std::size_t subset_size = 0;
  /// Mean |JFT| of (corrupted - clean) features over the subset (the whole
  /// dataset when the subset is empty), N × pipeline.frames.
  Matrix difference_spectrum;
};

/// Item i is corrupted with seed derive_seed(seed, i).
CorruptionReport corruption_accuracy(std::span<const Classifier* const> models, const Dataset& dataset,
                                     const InputPipeline& pipeline, const CorruptionSpec& spec, std::uint64_t seed);

struct AttackSummary {
  std::vector<AttackResult> results;
  double accuracy = 0.0;  ///< fraction of items still classified correctly
};

/// ℓ2-PGD on every item; item i uses seed derive_seed(spec.seed, i).
AttackSummary attack_accuracy(const Classifier& model, const Dataset& dataset, const AttackSpec& spec,
                              const InputPipeline& pipeline);

}  // namespace skelfreq
