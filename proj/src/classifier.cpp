#include "skelfreq/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "skelfreq/kernels.hpp"
#include "skelfreq/rng.hpp"

namespace skelfreq {

SignalTriple Classifier::input_gradient(const SignalTriple&, int) const {
  fail(ErrorKind::capability, id() + " does not provide input gradients");
}

Scores Classifier::predict_one(const SignalTriple& input) const {
  auto out = predict(std::span<const SignalTriple>(&input, 1));
  require(out.size() == 1, ErrorKind::data, "classifier returned the wrong number of score vectors");
  return std::move(out.front());
}

int Classifier::predict_label(const SignalTriple& input) const { return argmax(predict_one(input)); }

int argmax(const Scores& scores) {
  require(!scores.empty(), ErrorKind::data, "empty score vector");
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

double cross_entropy(const Scores& scores, int label) {
  require(label >= 0 && static_cast<std::size_t>(label) < scores.size(), ErrorKind::parameter,
          "label out of range");
  const double peak = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (const double s : scores) sum += std::exp(s - peak);
  return peak + std::log(sum) - scores[static_cast<std::size_t>(label)];
}

ReferenceClassifier::ReferenceClassifier(std::size_t nodes, std::size_t classes, std::size_t hidden,
                                         std::uint64_t seed, InputPipeline pipeline)
    : nodes_(nodes), classes_(classes), hidden_(hidden), pipeline_(pipeline) {
  require(nodes >= 1 && classes >= 1 && hidden >= 1, ErrorKind::parameter, "model sizes must be positive");
  mean_.assign(embedding_size(), 0.0);
  scale_.assign(embedding_size(), 1.0);
  params_.assign(b2_offset() + classes_, 0.0);
  Rng rng(seed);
  const double r1 = std::sqrt(6.0 / static_cast<double>(embedding_size() + hidden_));
  const double r2 = std::sqrt(6.0 / static_cast<double>(hidden_ + classes_));
  for (std::size_t i = 0; i < hidden_ * embedding_size(); ++i) params_[w1_offset() + i] = rng.uniform(-r1, r1);
  for (std::size_t i = 0; i < classes_ * hidden_; ++i) params_[w2_offset() + i] = rng.uniform(-r2, r2);
}

// Keeps the RMS difference differentiable on static joints.
constexpr double kRmsFloor = 1e-8;

std::vector<double> ReferenceClassifier::embedding(const SignalTriple& input) const {
  std::vector<double> e(embedding_size());
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& ch = input[c];
    require(ch.rows() == nodes_ && ch.cols() >= 1, ErrorKind::shape, "input does not match the model's node count");
    const std::size_t T = ch.cols();
    for (std::size_t i = 0; i < nodes_; ++i) {
      const auto row = ch.row(i);
      double sum = 0.0;
      for (const double x : row) sum += x;
      double energy = 0.0;
      for (std::size_t t = 0; t + 1 < T; ++t) {
        const double d = row[t + 1] - row[t];
        energy += d * d;
      }
      e[(c * nodes_ + i) * 2] = sum / static_cast<double>(T);
      e[(c * nodes_ + i) * 2 + 1] = T > 1 ? std::sqrt(energy / static_cast<double>(T - 1) + kRmsFloor) : 0.0;
    }
  }
  return e;
}

namespace {

struct Forward {
  std::vector<double> z;
  std::vector<double> h;
  Scores scores;
};

}  // namespace

Scores ReferenceClassifier::scores_from_embedding(std::span<const double> embedding) const {
  require(embedding.size() == embedding_size(), ErrorKind::shape, "embedding size mismatch");
  const auto& k = kernels::active();
  const std::size_t D = embedding_size();
  std::vector<double> z(D);
  for (std::size_t j = 0; j < D; ++j) z[j] = (embedding[j] - mean_[j]) / scale_[j];
  std::vector<double> h(hidden_);
  for (std::size_t r = 0; r < hidden_; ++r)
    h[r] = std::tanh(k.dot(&params_[w1_offset() + r * D], z.data(), D) + params_[b1_offset() + r]);
  Scores s(classes_);
  for (std::size_t r = 0; r < classes_; ++r)
    s[r] = k.dot(&params_[w2_offset() + r * hidden_], h.data(), hidden_) + params_[b2_offset() + r];
  return s;
}

std::vector<Scores> ReferenceClassifier::predict(std::span<const SignalTriple> batch) const {
  std::vector<Scores> out;
  out.reserve(batch.size());
  for (const auto& item : batch) out.push_back(scores_from_embedding(embedding(item)));
  return out;
}

ReferenceClassifier::Gradients ReferenceClassifier::loss_gradients(const SignalTriple& input, int label,
                                                                   bool want_input) const {
  require(label >= 0 && static_cast<std::size_t>(label) < classes_, ErrorKind::parameter, "label out of range");
  const auto& k = kernels::active();
  const std::size_t D = embedding_size();
  const auto e = embedding(input);

  std::vector<double> z(D);
  for (std::size_t j = 0; j < D; ++j) z[j] = (e[j] - mean_[j]) / scale_[j];
  std::vector<double> h(hidden_);
  for (std::size_t r = 0; r < hidden_; ++r)
    h[r] = std::tanh(k.dot(&params_[w1_offset() + r * D], z.data(), D) + params_[b1_offset() + r]);
  Scores s(classes_);
  for (std::size_t r = 0; r < classes_; ++r)
    s[r] = k.dot(&params_[w2_offset() + r * hidden_], h.data(), hidden_) + params_[b2_offset() + r];

  Gradients g;
  g.loss = cross_entropy(s, label);
  g.parameters.assign(params_.size(), 0.0);

  // dL/ds = softmax(s) - onehot(label)
  const double peak = *std::max_element(s.begin(), s.end());
  double norm = 0.0;
  std::vector<double> ds(classes_);
  for (std::size_t r = 0; r < classes_; ++r) norm += ds[r] = std::exp(s[r] - peak);
  for (std::size_t r = 0; r < classes_; ++r) ds[r] /= norm;
  ds[static_cast<std::size_t>(label)] -= 1.0;

  std::vector<double> dh(hidden_, 0.0);
  for (std::size_t r = 0; r < classes_; ++r) {
    k.axpy(ds[r], h.data(), &g.parameters[w2_offset() + r * hidden_], hidden_);
    g.parameters[b2_offset() + r] = ds[r];
    k.axpy(ds[r], &params_[w2_offset() + r * hidden_], dh.data(), hidden_);
  }
  std::vector<double> dz(D, 0.0);
  for (std::size_t r = 0; r < hidden_; ++r) {
    const double da = dh[r] * (1.0 - h[r] * h[r]);
    if (da == 0.0) continue;
    k.axpy(da, z.data(), &g.parameters[w1_offset() + r * D], D);
    g.parameters[b1_offset() + r] = da;
    k.axpy(da, &params_[w1_offset() + r * D], dz.data(), D);
  }

  if (want_input) {
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& ch = input[c];
      const std::size_t T = ch.cols();
      Matrix grad(nodes_, T);
      for (std::size_t i = 0; i < nodes_; ++i) {
        const std::size_t j = (c * nodes_ + i) * 2;
        const double d_mean = dz[j] / scale_[j] / static_cast<double>(T);
        const double d_energy = T > 1 ? dz[j + 1] / scale_[j + 1] / e[j + 1] / static_cast<double>(T - 1) : 0.0;
        const auto x = ch.row(i);
        auto out = grad.row(i);
        for (std::size_t t = 0; t < T; ++t) {
          double v = d_mean;
          if (t >= 1) v += d_energy * (x[t] - x[t - 1]);
          if (t + 1 < T) v -= d_energy * (x[t + 1] - x[t]);
          out[t] = v;
        }
      }
      g.input[c] = std::move(grad);
    }
  }
  return g;
}

SignalTriple ReferenceClassifier::input_gradient(const SignalTriple& input, int label) const {
  return loss_gradients(input, label, true).input;
}

void ReferenceClassifier::fit_normalization(std::span<const SignalTriple> inputs) {
  require(!inputs.empty(), ErrorKind::data, "cannot fit normalisation on an empty set");
  const std::size_t D = embedding_size();
  std::vector<double> sum(D, 0.0);
  std::vector<double> sum_sq(D, 0.0);
  for (const auto& item : inputs) {
    const auto e = embedding(item);
    for (std::size_t j = 0; j < D; ++j) {
      sum[j] += e[j];
      sum_sq[j] += e[j] * e[j];
    }
  }
  const double n = static_cast<double>(inputs.size());
  std::vector<double> stddev(D);
  double type_total[2] = {0.0, 0.0};
  for (std::size_t j = 0; j < D; ++j) {
    mean_[j] = sum[j] / n;
    stddev[j] = std::sqrt(std::max(0.0, sum_sq[j] / n - mean_[j] * mean_[j]));
    type_total[j % 2] += stddev[j];
  }
  // Features are scaled by at least the mean spread of their type, so joints
  // that barely move in the training data are not amplified.
  const double per_type = static_cast<double>(D / 2);
  for (std::size_t j = 0; j < D; ++j)
    scale_[j] = std::max({stddev[j], type_total[j % 2] / per_type, 1e-12});
}

std::string ReferenceClassifier::id() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto* v : {&mean_, &scale_, &params_})
    for (const double x : *v) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(x));
  std::ostringstream out;
  out << "reference-" << std::hex << h;
  return out.str();
}

std::string ReferenceClassifier::to_json() const {
  nlohmann::json j;
  j["format"] = "skelfreq-reference-classifier";
  j["version"] = 1;
  j["nodes"] = nodes_;
  j["classes"] = classes_;
  j["hidden"] = hidden_;
  j["feature"] = std::string(to_string(pipeline_.kind));
  j["frames"] = pipeline_.frames;
  j["embed_mean"] = mean_;
  j["embed_scale"] = scale_;
  const auto slice = [&](std::size_t from, std::size_t to) {
    return std::vector<double>(params_.begin() + static_cast<std::ptrdiff_t>(from),
                               params_.begin() + static_cast<std::ptrdiff_t>(to));
  };
  j["w1"] = slice(w1_offset(), b1_offset());
  j["b1"] = slice(b1_offset(), w2_offset());
  j["w2"] = slice(w2_offset(), b2_offset());
  j["b2"] = slice(b2_offset(), params_.size());
  return j.dump(1);
}

ReferenceClassifier ReferenceClassifier::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    require(j.at("format").get<std::string>() == "skelfreq-reference-classifier", ErrorKind::format,
            "not a reference classifier file");
    InputPipeline pipeline{parse_feature_kind(j.at("feature").get<std::string>()), j.at("frames").get<std::size_t>()};
    ReferenceClassifier m(j.at("nodes").get<std::size_t>(), j.at("classes").get<std::size_t>(),
                          j.at("hidden").get<std::size_t>(), 0, pipeline);
    m.mean_ = j.at("embed_mean").get<std::vector<double>>();
    m.scale_ = j.at("embed_scale").get<std::vector<double>>();
    std::vector<double> params;
    for (const char* key : {"w1", "b1", "w2", "b2"}) {
      const auto part = j.at(key).get<std::vector<double>>();
      params.insert(params.end(), part.begin(), part.end());
    }
    require(m.mean_.size() == m.embedding_size() && m.scale_.size() == m.embedding_size() &&
                params.size() == m.params_.size(),
            ErrorKind::format, "reference classifier arrays have the wrong length");
    m.params_ = std::move(params);
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("reference classifier: ") + e.what());
  }
}

void ReferenceClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::data, "cannot write " + path.string());
  out << to_json() << '\n';
}

ReferenceClassifier ReferenceClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::data, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace skelfreq
