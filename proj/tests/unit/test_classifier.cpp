#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "skelfreq/classifier.hpp"
#include "skelfreq/data_io.hpp"
#include "skelfreq/error.hpp"
#include "skelfreq/rng.hpp"

using namespace skelfreq;

namespace {

SignalTriple random_input(std::size_t T, std::uint64_t seed) {
  return {oracle::random_matrix(25, T, seed, 0.5), oracle::random_matrix(25, T, seed + 1, 0.5),
          oracle::random_matrix(25, T, seed + 2, 0.5)};
}

/// Model with a non-trivial standardisation fitted on random inputs.
ReferenceClassifier fitted_model(std::size_t classes, std::uint64_t seed, std::size_t hidden = 8) {
  ReferenceClassifier m(25, classes, hidden, seed);
  std::vector<SignalTriple> inputs;
  for (std::uint64_t s = 0; s < 6; ++s) inputs.push_back(random_input(16, 500 + 3 * s));
  m.fit_normalization(inputs);
  return m;
}

/// Independent forward pass from the JSON weights.
Scores forward_oracle(const ReferenceClassifier& m, const SignalTriple& x) {
  const auto j = nlohmann::json::parse(m.to_json());
  const auto mean = j["embed_mean"].get<std::vector<double>>();
  const auto scale = j["embed_scale"].get<std::vector<double>>();
  const auto w1 = j["w1"].get<std::vector<double>>();
  const auto b1 = j["b1"].get<std::vector<double>>();
  const auto w2 = j["w2"].get<std::vector<double>>();
  const auto b2 = j["b2"].get<std::vector<double>>();
  const std::size_t N = 25, D = 150, H = b1.size(), K = b2.size();
  std::vector<double> z(D);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t T = x[c].cols();
      double s = 0.0, e = 0.0;
      for (std::size_t t = 0; t < T; ++t) s += x[c](i, t);
      for (std::size_t t = 0; t + 1 < T; ++t) e += std::pow(x[c](i, t + 1) - x[c](i, t), 2);
      const std::size_t q = (c * N + i) * 2;
      z[q] = (s / T - mean[q]) / scale[q];
      z[q + 1] = (std::sqrt(e / (T - 1) + 1e-8) - mean[q + 1]) / scale[q + 1];
    }
  std::vector<double> h(H);
  for (std::size_t r = 0; r < H; ++r) {
    double a = b1[r];
    for (std::size_t d = 0; d < D; ++d) a += w1[r * D + d] * z[d];
    h[r] = std::tanh(a);
  }
  Scores out(K);
  for (std::size_t r = 0; r < K; ++r) {
    out[r] = b2[r];
    for (std::size_t q = 0; q < H; ++q) out[r] += w2[r * H + q] * h[q];
  }
  return out;
}

double loss_at(const ReferenceClassifier& m, const SignalTriple& x, int label) {
  return cross_entropy(m.predict_one(x), label);
}

bool close(double fd, double g) { return std::abs(fd - g) <= 1e-4 * std::max(std::abs(fd), std::abs(g)) + 1e-9; }

class ConstantClassifier final : public Classifier {
 public:
  explicit ConstantClassifier(int label) : label_(label) {}
  std::size_t class_count() const override { return 3; }
  std::vector<Scores> predict(std::span<const SignalTriple> batch) const override {
    Scores s(3, 0.0);
    s[static_cast<std::size_t>(label_)] = 1.0;
    return std::vector<Scores>(batch.size(), s);
  }

 private:
  int label_;
};

Dataset two_class_data(std::uint64_t seed) { return synthetic_actions(2, 30, 40, seed); }

}  // namespace

TEST_CASE("forward pass matches an independent reimplementation") {
  const auto m = fitted_model(4, 1);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto x = random_input(16 + s, 40 + s);
    const auto a = m.predict_one(x);
    const auto b = forward_oracle(m, x);
    REQUIRE(a.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
  }
  const auto x = random_input(16, 99);
  const SignalTriple batch[] = {x, x};
  const auto both = m.predict(batch);
  CHECK(both[0] == both[1]);
  CHECK(argmax({1.0, 3.0, 3.0}) == 1);
}

TEST_CASE("input gradient matches central differences on 20 probes") {
  const auto m = fitted_model(3, 2);
  const auto x = random_input(16, 7);
  const int label = 1;
  const auto g = m.input_gradient(x, label);
  Rng rng(3);
  const double h = 1e-5;
  for (int p = 0; p < 20; ++p) {
    const std::size_t c = rng.index(3), i = rng.index(25), t = rng.index(16);
    auto plus = x, minus = x;
    plus[c](i, t) += h;
    minus[c](i, t) -= h;
    const double fd = (loss_at(m, plus, label) - loss_at(m, minus, label)) / (2 * h);
    CAPTURE(fd);
    CAPTURE(g[c](i, t));
    CHECK(close(fd, g[c](i, t)));
  }
}

TEST_CASE("parameter gradient matches central differences") {
  auto m = fitted_model(3, 4);
  const auto x = random_input(12, 8);
  const auto g = m.loss_gradients(x, 2, false);
  CHECK(g.loss == doctest::Approx(loss_at(m, x, 2)));
  CHECK(g.input[0].size() == 0);
  Rng rng(5);
  const double h = 1e-6;
  for (int p = 0; p < 20; ++p) {
    const std::size_t q = rng.index(m.parameters().size());
    const double keep = m.parameters()[q];
    m.parameters()[q] = keep + h;
    const double up = loss_at(m, x, 2);
    m.parameters()[q] = keep - h;
    const double down = loss_at(m, x, 2);
    m.parameters()[q] = keep;
    CHECK(close((up - down) / (2 * h), g.parameters[q]));
  }
}

TEST_CASE("duplicating a class equals shifting its bias by ln 2") {
  const auto a = fitted_model(3, 6);
  auto j = nlohmann::json::parse(a.to_json());
  const std::size_t H = j["hidden"];
  const int dup = 1;

  auto b = j;  // K+1 classes, class 3 copies class `dup`
  auto w2 = j["w2"].get<std::vector<double>>();
  for (std::size_t q = 0; q < H; ++q) w2.push_back(w2[dup * H + q]);
  auto b2 = j["b2"].get<std::vector<double>>();
  b2.push_back(b2[dup]);
  b["w2"] = w2;
  b["b2"] = b2;
  b["classes"] = 4;
  const auto dup_model = ReferenceClassifier::from_json(b.dump());

  auto c = j;  // original with b2[dup] += ln 2
  auto b2c = j["b2"].get<std::vector<double>>();
  b2c[dup] += std::log(2.0);
  c["b2"] = b2c;
  const auto shifted = ReferenceClassifier::from_json(c.dump());

  const auto x = random_input(16, 12);
  for (int label : {0, 2}) {
    const auto g1 = dup_model.input_gradient(x, label);
    const auto g2 = shifted.input_gradient(x, label);
    for (std::size_t ch = 0; ch < 3; ++ch) CHECK(max_abs_difference(g1[ch], g2[ch]) < 1e-12);
  }
}

TEST_CASE("single-class model has zero loss and gradient") {
  const auto m = fitted_model(1, 7);
  const auto x = random_input(10, 3);
  const auto g = m.loss_gradients(x, 0, true);
  CHECK(g.loss == 0.0);
  for (const auto& ch : g.input) CHECK(frobenius_norm(ch) == 0.0);
}

TEST_CASE("JSON round trip and format errors") {
  const auto m = fitted_model(3, 8);
  const auto back = ReferenceClassifier::from_json(m.to_json());
  CHECK(back == m);
  CHECK(back.id() == m.id());
  auto j = nlohmann::json::parse(m.to_json());
  j.erase("b2");
  try {
    (void)ReferenceClassifier::from_json(j.dump());
    FAIL("expected format-error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
  }
  CHECK_THROWS_AS(ReferenceClassifier::from_json("{"), Error);
  CHECK_THROWS_AS(ReferenceClassifier(25, 0, 4, 1), Error);
}

TEST_CASE("standard training fits a separable set and is deterministic") {
  const auto data = two_class_data(3);
  ReferenceClassifier init(25, 2, 16, 11);
  std::vector<SignalTriple> inputs;
  for (const auto& s : data) inputs.push_back(init.pipeline()(s));
  init.fit_normalization(inputs);

  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 8;
  cfg.seed = 5;
  TrainReport report;
  const auto model = train_standard(init, data, cfg, &report);
  CHECK(report.train_accuracy >= 0.95);
  REQUIRE(report.epoch_loss.size() == 10);
  for (std::size_t e = 1; e < 5; ++e) CHECK(report.epoch_loss[e] < report.epoch_loss[e - 1]);
  CHECK(train_standard(init, data, cfg) == model);

  TrainConfig frozen = cfg;
  frozen.learning_rate = 0.0;
  frozen.epochs = 1;
  CHECK(train_standard(init, data, frozen) == init);

  CHECK_THROWS_AS(train_standard(init, Dataset{}, cfg), Error);
}

TEST_CASE("Free training with one hop and vanishing radius is standard training") {
  const auto data = two_class_data(4);
  ReferenceClassifier init(25, 2, 8, 12);
  std::vector<SignalTriple> inputs;
  for (const auto& s : data) inputs.push_back(init.pipeline()(s));
  init.fit_normalization(inputs);
  FreeConfig free;
  free.train.epochs = 3;
  free.train.batch_size = 8;
  free.train.seed = 9;
  free.hop_steps = 1;
  free.epsilon_head = 1e-12;
  const auto a = train_free(init, data, free);
  const auto b = train_standard(init, data, free.train);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.parameters().size(); ++i)
    diff = std::max(diff, std::abs(a.parameters()[i] - b.parameters()[i]));
  CHECK(diff < 1e-8);

  free.hop_steps = 0;
  CHECK_THROWS_AS(train_free(init, data, free), Error);
}

TEST_CASE("projection onto the l2 ball") {
  auto v = oracle::random_vector(50, 1, 3.0);
  const auto before = v;
  project_l2(v, 0.7);
  double n = 0.0, d = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    n += v[i] * v[i];
    nb += before[i] * before[i];
    d += v[i] * before[i];
  }
  CHECK(std::abs(std::sqrt(n) - 0.7) < 1e-12);
  CHECK(d / std::sqrt(n * nb) == doctest::Approx(1.0).epsilon(1e-12));
  auto small = std::vector<double>{0.1, 0.2};
  project_l2(small, 1.0);
  CHECK(small == std::vector<double>{0.1, 0.2});
}

TEST_CASE("PGD respects the budget and needs gradients") {
  const auto m = fitted_model(3, 10);
  const InputPipeline pipe{FeatureKind::joint, 16};
  const auto seq = fixture::random_sequence(20, 3);
  for (double eps_head : {1.0, 3.0, 5.0}) {
    AttackSpec spec;
    spec.epsilon_head = eps_head;
    spec.seed = 4;
    const auto r = pgd_attack(m, seq, 0, spec, pipe);
    CHECK(r.epsilon == doctest::Approx(0.2 * eps_head));
    CHECK(r.delta_norm <= r.epsilon + 1e-9);
    CHECK(r.clean_prediction == m.predict_label(pipe(seq)));
  }
  AttackSpec tiny;
  tiny.epsilon_head = 1e-12;
  const auto r = pgd_attack(m, seq, 0, tiny, pipe);
  for (std::size_t i = 0; i < seq.positions().size(); ++i)
    CHECK(std::abs(r.adversarial.positions()[i] - seq.positions()[i]) < 1e-9);

  const ConstantClassifier constant(1);
  try {
    (void)pgd_attack(constant, seq, 0, AttackSpec{}, pipe);
    FAIL("expected capability-error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::capability);
  }
}
