#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "skelfreq/data_io.hpp"
#include "skelfreq/error.hpp"
#include "skelfreq/harness.hpp"
#include "skelfreq/rng.hpp"

using namespace skelfreq;

namespace {

/// Items carry their index in the x coordinate of joint 0 at frame 0, which
/// the joint pipeline copies through resampling unchanged.
Dataset tagged_dataset(std::size_t n, std::size_t classes) {
  Dataset out;
  for (std::size_t i = 0; i < n; ++i) {
    auto seq = fixture::random_sequence(20, 100 + i, 0.5, static_cast<int>(i % classes));
    seq.at(0, 0, 0) = static_cast<double>(i);
    out.push_back(seq);
  }
  return out;
}

/// Stub whose answer for item i comes from a fixed key.
class AnswerKeyClassifier final : public Classifier {
 public:
  AnswerKeyClassifier(std::vector<int> key, std::size_t classes) : key_(std::move(key)), classes_(classes) {}
  std::size_t class_count() const override { return classes_; }
  std::vector<Scores> predict(std::span<const SignalTriple> batch) const override {
    std::vector<Scores> out;
    for (const auto& x : batch) {
      const auto i = static_cast<std::size_t>(std::llround(x[0](0, 0)));
      Scores s(classes_, 0.0);
      s[static_cast<std::size_t>(key_.at(i))] = 1.0;
      out.push_back(s);
    }
    return out;
  }
  std::string id() const override { return "answer-key"; }

 private:
  std::vector<int> key_;
  std::size_t classes_;
};

class ConstantClassifier final : public Classifier {
 public:
  explicit ConstantClassifier(int label) : label_(label) {}
  std::size_t class_count() const override { return 3; }
  std::vector<Scores> predict(std::span<const SignalTriple> batch) const override {
    Scores s(3, 0.0);
    s[static_cast<std::size_t>(label_)] = 1.0;
    return std::vector<Scores>(batch.size(), s);
  }
  std::string id() const override { return "constant"; }

 private:
  int label_;
};

std::vector<int> random_key(const Dataset& d, std::size_t classes, double p_correct, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> key;
  for (const auto& s : d)
    key.push_back(rng.bernoulli(p_correct) ? s.meta.label : static_cast<int>(rng.index(classes)));
  return key;
}

ReferenceClassifier small_model(const Dataset& train) {
  ReferenceClassifier m(25, 3, 8, 5, InputPipeline{FeatureKind::joint, 16});
  std::vector<SignalTriple> inputs;
  for (const auto& s : train) inputs.push_back(m.pipeline()(s));
  m.fit_normalization(inputs);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 2;
  return train_standard(m, train, cfg);
}

}  // namespace

TEST_CASE("jointly-correct subset equals the set intersection of the answer keys") {
  const auto data = tagged_dataset(60, 3);
  const AnswerKeyClassifier a(random_key(data, 3, 0.7, 1), 3);
  const AnswerKeyClassifier b(random_key(data, 3, 0.7, 2), 3);
  const InputPipeline pipe{FeatureKind::joint, 16};

  std::set<std::size_t> correct_a, correct_b, expected;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (a.predict_label(pipe(data[i])) == data[i].meta.label) correct_a.insert(i);
    if (b.predict_label(pipe(data[i])) == data[i].meta.label) correct_b.insert(i);
  }
  std::set_intersection(correct_a.begin(), correct_a.end(), correct_b.begin(), correct_b.end(),
                        std::inserter(expected, expected.end()));
  const Classifier* models[] = {&a, &b};
  const auto idx = jointly_correct_indices(models, data, pipe);
  CHECK(std::set<std::size_t>(idx.begin(), idx.end()) == expected);
  CHECK(jointly_correct_subset(a, b, data, pipe).size() == expected.size());

  // identical models → that model's correct set, all correct on it
  const auto same = jointly_correct_subset(a, a, data, pipe);
  CHECK(same.size() == correct_a.size());
  CHECK(clean_accuracy(a, same, pipe) == 1.0);

  // an always-wrong model empties the subset
  std::vector<int> wrong;
  for (const auto& s : data) wrong.push_back((s.meta.label + 1) % 3);
  const AnswerKeyClassifier never(wrong, 3);
  CHECK(jointly_correct_subset(a, never, data, pipe).empty());
}

TEST_CASE("heatmap at v = 0 is the plain error rate everywhere") {
  const auto data = synthetic_actions(3, 8, 30, 1);
  const auto model = small_model(data);
  const auto grid = fourier_heatmap(model, data, model.pipeline(), 0.0, 1000, 3);
  const double err = 1.0 - clean_accuracy(model, data, model.pipeline());
  CHECK(grid.error_rates.rows() == 25);
  CHECK(grid.error_rates.cols() == 16);
  CHECK(grid.sample_count == data.size());
  CHECK(grid.requested_samples == 1000);
  for (double e : grid.error_rates.values()) CHECK(e == doctest::Approx(err));
}

TEST_CASE("constant model gives a constant heatmap at its class error rate") {
  const auto data = tagged_dataset(30, 3);
  const ConstantClassifier c(2);
  const auto grid = fourier_heatmap(c, data, InputPipeline{FeatureKind::joint, 8}, 1.5, 30, 4);
  for (double e : grid.error_rates.values()) CHECK(e == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("heatmap is deterministic, mirrored and independent of job count") {
  const auto data = synthetic_actions(3, 10, 30, 2);
  const auto model = small_model(data);
  const auto a = fourier_heatmap(model, data, model.pipeline(), 1.5, 12, 7);
  const auto b = fourier_heatmap(model, data, model.pipeline(), 1.5, 12, 7);
  const auto c = fourier_heatmap(model, data, model.pipeline(), 1.5, 12, 7, HeatmapOptions{3});
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a.sample_count == 12);
  CHECK(a.model_id == model.id());
  CHECK(a.basis_id == graph_basis(SkeletonTopology::ntu25()).id());
  for (std::size_t k = 0; k < 25; ++k)
    for (std::size_t l = 1; l < 16; ++l) CHECK(a.error_rates(k, l) == a.error_rates(k, 16 - l));
  for (double e : a.error_rates.values()) CHECK((e >= 0.0 && e <= 1.0));
  CHECK_THROWS_AS(fourier_heatmap(model, Dataset{}, model.pipeline(), 1.5, 12, 7), Error);
}

TEST_CASE("noise sweep grid and the zero-fraction identity") {
  const auto data = synthetic_actions(3, 10, 30, 3);
  const auto a = small_model(data);
  auto b_init = a;
  const Classifier* models[] = {&a, &b_init};
  const SweepMask masks[] = {SweepMask::spatial_low, SweepMask::temporal_high, SweepMask::spatiotemporal_low};
  const double fractions[] = {0.0, 0.5, 1.0};
  const std::size_t bandwidths[] = {1, 2};
  const auto table = noise_robustness_sweep(models, data, a.pipeline(), masks, 17.0, fractions, bandwidths, 5);
  CHECK(table.rows.size() == 3 * 2 * 3 * 2);
  CHECK(table.subset_size > 0);
  for (const auto& r : table.rows) {
    if (r.fraction == 0.0) CHECK(r.accuracy == 1.0);
    CHECK((r.accuracy >= 0.0 && r.accuracy <= 1.0));
  }
  CHECK(noise_robustness_sweep(models, data, a.pipeline(), masks, 17.0, fractions, bandwidths, 5).rows.size() ==
        table.rows.size());
  CHECK_THROWS_AS(noise_robustness_sweep(models, data, a.pipeline(), masks, 0.0, fractions, bandwidths, 5), Error);
  CHECK_THROWS_AS(noise_robustness_sweep(models, data, a.pipeline(), {}, 1.0, fractions, bandwidths, 5), Error);
  CHECK(parse_sweep_mask("spatiotemporal_high") == SweepMask::spatiotemporal_high);
  CHECK(to_string(SweepMask::temporal_low) == "temporal-low");
  CHECK_THROWS_AS(parse_sweep_mask("diagonal"), Error);
  CHECK(default_sweep_fractions().size() == 5);
}

TEST_CASE("corruption accuracy") {
  const auto data = synthetic_actions(3, 10, 30, 4);
  const auto m = small_model(data);
  const Classifier* models[] = {&m, &m};
  const auto identity = corruption_accuracy(models, data, m.pipeline(), CorruptionSpec{}, 1);
  CHECK(identity.accuracies == std::vector<double>{1.0, 1.0});
  CHECK(frobenius_norm(identity.difference_spectrum) == 0.0);

  const auto occ = corruption_accuracy(models, data, m.pipeline(), CorruptionSpec::parse("occlusion:3"), 1);
  CHECK(occ.difference_spectrum.rows() == 25);
  CHECK(occ.difference_spectrum.cols() == 16);
  CHECK(frobenius_norm(occ.difference_spectrum) > 0.0);

  const auto g1 = corruption_accuracy(models, data, m.pipeline(), CorruptionSpec::parse("gaussian:0.05"), 2);
  const auto g2 = corruption_accuracy(models, data, m.pipeline(), CorruptionSpec::parse("gaussian:0.05"), 2);
  CHECK(g1.accuracies == g2.accuracies);
  CHECK(g1.difference_spectrum == g2.difference_spectrum);
}

TEST_CASE("attack accuracy evaluates every item") {
  const auto data = synthetic_actions(3, 4, 30, 5);
  const auto m = small_model(data);
  AttackSpec spec;
  spec.epsilon_head = 1.0;
  spec.seed = 3;
  const auto summary = attack_accuracy(m, data, spec, m.pipeline());
  CHECK(summary.results.size() == data.size());
  for (const auto& r : summary.results) CHECK(r.delta_norm <= r.epsilon + 1e-9);
}
