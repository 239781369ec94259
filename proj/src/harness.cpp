#include "skelfreq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "skelfreq/log.hpp"
#include "skelfreq/perturbations.hpp"
#include "skelfreq/rng.hpp"

namespace skelfreq {
namespace {

std::vector<SignalTriple> model_inputs(const Dataset& data, const InputPipeline& pipeline) {
  std::vector<SignalTriple> out;
  out.reserve(data.size());
  for (const auto& seq : data) out.push_back(pipeline(seq));
  return out;
}

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> threads;
  for (std::size_t j = 0; j < jobs; ++j) {
    threads.emplace_back([&, j] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
      (void)j;
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

double accuracy_of(const Classifier& model, std::span<const SignalTriple> inputs, std::span<const int> labels) {
  if (inputs.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto scores = model.predict(inputs);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) correct += argmax(scores[i]) == labels[i];
  return static_cast<double>(correct) / static_cast<double>(inputs.size());
}

}  // namespace

HeatmapGrid fourier_heatmap(const Classifier& model, const Dataset& dataset, const InputPipeline& pipeline,
                            double v, std::size_t sample_count, std::uint64_t seed, const HeatmapOptions& options) {
  require(!dataset.empty(), ErrorKind::data, "heatmap needs a non-empty dataset");
  require(sample_count >= 1, ErrorKind::parameter, "heatmap needs at least one sample per cell");
  require(v >= 0.0 && std::isfinite(v), ErrorKind::parameter, "heatmap norm v must be non-negative");

  const auto& topology = dataset.front().topology();
  const auto basis = graph_basis(topology);
  const std::size_t N = basis.size();
  const std::size_t T = pipeline.frames;

  // one sample for the whole grid: partial Fisher-Yates
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t m = std::min(sample_count, dataset.size());
  Rng rng(derive_seed(seed, 0x53414d50));
  for (std::size_t i = 0; i < m; ++i) std::swap(order[i], order[i + rng.index(order.size() - i)]);
  order.resize(m);

  std::vector<SignalTriple> clean;
  std::vector<int> labels;
  for (auto idx : order) {
    clean.push_back(pipeline(dataset[idx]));
    labels.push_back(dataset[idx].meta.label);
  }

  HeatmapGrid grid;
  grid.error_rates = Matrix(N, T);
  grid.feature_kind = pipeline.kind;
  grid.v = v;
  grid.sample_count = m;
  grid.requested_samples = sample_count;
  grid.base_seed = seed;
  grid.basis_id = basis.id();
  grid.model_id = model.id();

  const std::size_t unique_l = T / 2 + 1;
  parallel_for(N * unique_l, options.jobs, [&](std::size_t cell) {
    const std::size_t k = cell / unique_l + 1;
    const std::size_t l = cell % unique_l;
    const auto direction = fourier_basis_perturbation(k, l, basis, T);
    std::vector<SignalTriple> batch(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < 3; ++c)
        batch[i][c] = perturb_with_basis(clean[i][c], direction, v, derive_seed(seed, k, l, i, c));
    const double acc = accuracy_of(model, batch, labels);
    grid.error_rates(k - 1, l) = 1.0 - acc;
    if (l != 0) grid.error_rates(k - 1, (T - l) % T) = 1.0 - acc;
  });
  return grid;
}

std::vector<std::size_t> jointly_correct_indices(std::span<const Classifier* const> models, const Dataset& dataset,
                                                 const InputPipeline& pipeline) {
  require(!models.empty(), ErrorKind::parameter, "jointly-correct subset needs at least one model");
  const auto inputs = model_inputs(dataset, pipeline);
  std::vector<bool> keep(dataset.size(), true);
  for (const auto* model : models) {
    const auto scores = model->predict(inputs);
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (argmax(scores[i]) != dataset[i].meta.label) keep[i] = false;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i]) out.push_back(i);
  if (out.empty()) warn("jointly-correct subset is empty");
  return out;
}

Dataset jointly_correct_subset(const Classifier& a, const Classifier& b, const Dataset& dataset,
                               const InputPipeline& pipeline) {
  const Classifier* models[] = {&a, &b};
  Dataset out;
  for (auto i : jointly_correct_indices(models, dataset, pipeline)) out.push_back(dataset[i]);
  return out;
}

std::string to_string(SweepMask mask) {
  switch (mask) {
    case SweepMask::spatial_low: return "spatial-low";
    case SweepMask::spatial_high: return "spatial-high";
    case SweepMask::temporal_low: return "temporal-low";
    case SweepMask::temporal_high: return "temporal-high";
    case SweepMask::spatiotemporal_low: return "spatiotemporal-low";
    case SweepMask::spatiotemporal_high: return "spatiotemporal-high";
  }
  return "unknown";
}

SweepMask parse_sweep_mask(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '_', '-');
  for (auto m : all_sweep_masks())
    if (to_string(m) == s) return m;
  fail(ErrorKind::parameter, "unknown mask '" + std::string(text) + "'");
}

const std::vector<SweepMask>& all_sweep_masks() {
  static const std::vector<SweepMask> masks = {SweepMask::spatial_low,        SweepMask::spatial_high,
                                               SweepMask::temporal_low,       SweepMask::temporal_high,
                                               SweepMask::spatiotemporal_low, SweepMask::spatiotemporal_high};
  return masks;
}

const std::vector<double>& default_sweep_fractions() {
  static const std::vector<double> f = {0.2, 0.4, 0.6, 0.8, 1.0};
  return f;
}

SweepTable noise_robustness_sweep(std::span<const Classifier* const> models, const Dataset& dataset,
                                  const InputPipeline& pipeline, std::span<const SweepMask> masks,
                                  double scaled_norm, std::span<const double> fractions,
                                  std::span<const std::size_t> bandwidths, std::uint64_t seed) {
  require(scaled_norm > 0.0 && std::isfinite(scaled_norm), ErrorKind::parameter, "scaled norm must be positive");
  require(!masks.empty() && !fractions.empty() && !bandwidths.empty(), ErrorKind::parameter,
          "sweep grid is empty");
  for (double f : fractions) require(f >= 0.0 && std::isfinite(f), ErrorKind::parameter, "fractions must be >= 0");
  require(!dataset.empty(), ErrorKind::data, "sweep needs a non-empty dataset");

  SweepTable table;
  for (const auto* m : models) table.model_ids.push_back(m->id());
  table.scaled_norm = scaled_norm;
  const auto subset = jointly_correct_indices(models, dataset, pipeline);
  table.subset_size = subset.size();

  const auto basis = graph_basis(dataset.front().topology());
  const std::size_t N = basis.size();
  const std::size_t T = pipeline.frames;
  std::vector<SignalTriple> clean;
  std::vector<int> labels;
  for (auto i : subset) {
    clean.push_back(pipeline(dataset[i]));
    labels.push_back(dataset[i].meta.label);
  }

  for (std::size_t mi = 0; mi < masks.size(); ++mi) {
    const SweepMask mask = masks[mi];
    const bool spatial = mask != SweepMask::temporal_low && mask != SweepMask::temporal_high;
    const bool temporal = mask != SweepMask::spatial_low && mask != SweepMask::spatial_high;
    const MaskKind kind = (mask == SweepMask::spatial_low || mask == SweepMask::temporal_low ||
                           mask == SweepMask::spatiotemporal_low)
                              ? MaskKind::low
                              : MaskKind::high;
    for (std::size_t bw : bandwidths) {
      std::optional<SpectralMask> sm, tm;
      if (spatial) sm = make_mask(MaskAxis::spatial, kind, bw, N);
      if (temporal) tm = make_mask(MaskAxis::temporal, kind, bw, T);
      // unit-norm noise per (item, channel), rescaled per fraction
      std::vector<SignalTriple> noise(clean.size());
      for (std::size_t i = 0; i < clean.size(); ++i)
        for (std::size_t c = 0; c < 3; ++c)
          noise[i][c] = band_limited_noise(N, T, basis, sm, tm, 1.0,
                                           derive_seed(seed, static_cast<std::uint64_t>(mask), bw, subset[i], c));
      for (double fraction : fractions) {
        std::vector<SignalTriple> batch = clean;
        const double norm = fraction * scaled_norm;
        if (norm > 0.0)
          for (std::size_t i = 0; i < batch.size(); ++i)
            for (std::size_t c = 0; c < 3; ++c) add_scaled(batch[i][c], norm, noise[i][c]);
        for (std::size_t m = 0; m < models.size(); ++m)
          table.rows.push_back({mask, bw, fraction, m, accuracy_of(*models[m], batch, labels)});
      }
    }
  }
  return table;
}

CorruptionReport corruption_accuracy(std::span<const Classifier* const> models, const Dataset& dataset,
                                     const InputPipeline& pipeline, const CorruptionSpec& spec, std::uint64_t seed) {
  require(!dataset.empty(), ErrorKind::data, "corruption accuracy needs a non-empty dataset");
  CorruptionReport report;
  for (const auto* m : models) report.model_ids.push_back(m->id());
  const auto subset = jointly_correct_indices(models, dataset, pipeline);
  report.subset_size = subset.size();

  std::vector<std::size_t> population = subset;
  if (population.empty())
    for (std::size_t i = 0; i < dataset.size(); ++i) population.push_back(i);

  std::vector<SignalTriple> clean_features, corrupt_features, corrupt_inputs;
  std::vector<int> labels;
  const std::vector<bool> in_subset = [&] {
    std::vector<bool> v(dataset.size(), false);
    for (auto i : subset) v[i] = true;
    return v;
  }();
  for (auto i : population) {
    CorruptionSpec item_spec = spec;
    item_spec.seed = derive_seed(seed, i);
    const auto corrupted = apply_corruption(dataset[i], item_spec);
    clean_features.push_back(extract_feature(dataset[i], pipeline.kind));
    corrupt_features.push_back(extract_feature(corrupted, pipeline.kind));
    if (in_subset[i]) {
      corrupt_inputs.push_back(pipeline(corrupted));
      labels.push_back(dataset[i].meta.label);
    }
  }
  for (const auto* m : models) report.accuracies.push_back(accuracy_of(*m, corrupt_inputs, labels));
  const auto basis = graph_basis(dataset.front().topology());
  report.difference_spectrum = difference_spectrum(clean_features, corrupt_features, basis, pipeline.frames);
  return report;
}

AttackSummary attack_accuracy(const Classifier& model, const Dataset& dataset, const AttackSpec& spec,
                              const InputPipeline& pipeline) {
  AttackSummary summary;
  std::size_t robust = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    AttackSpec item = spec;
    item.seed = derive_seed(spec.seed, i);
    summary.results.push_back(pgd_attack(model, dataset[i], dataset[i].meta.label, item, pipeline));
    robust += !summary.results.back().success;
  }
  summary.accuracy = dataset.empty() ? std::numeric_limits<double>::quiet_NaN()
                                     : static_cast<double>(robust) / static_cast<double>(dataset.size());
  return summary;
}

}  // namespace skelfreq
