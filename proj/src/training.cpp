#include <cmath>
#include <numeric>

#include "skelfreq/classifier.hpp"
#include "skelfreq/kernels.hpp"
#include "skelfreq/rng.hpp"

namespace skelfreq {
namespace {

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  return order;
}

void check_dataset(const ReferenceClassifier& model, const Dataset& data) {
  require(!data.empty(), ErrorKind::data, "training set is empty");
  for (const auto& item : data) {
    require(item.meta.label >= 0 && static_cast<std::size_t>(item.meta.label) < model.class_count(),
            ErrorKind::data, "training label out of range: " + std::to_string(item.meta.label));
    require(item.nodes() == model.nodes(), ErrorKind::shape, "sequence node count differs from model");
  }
}

/// SGD with classical momentum: v = μv + g; θ -= lr·v.
class MomentumSgd {
 public:
  MomentumSgd(std::size_t size, const TrainConfig& config)
      : velocity_(size, 0.0), lr_(config.learning_rate), momentum_(config.momentum) {}

  void step(std::span<double> params, const std::vector<double>& grad) {
    const auto& k = kernels::active();
    k.scale(momentum_, velocity_.data(), velocity_.size());
    k.axpy(1.0, grad.data(), velocity_.data(), velocity_.size());
    k.axpy(-lr_, velocity_.data(), params.data(), params.size());
  }

 private:
  std::vector<double> velocity_;
  double lr_;
  double momentum_;
};

double l2_norm(const std::vector<double>& v) {
  return std::sqrt(kernels::active().sum_squares(v.data(), v.size()));
}

void finish_report(TrainReport* report, const ReferenceClassifier& model, const Dataset& data) {
  if (report != nullptr) report->train_accuracy = clean_accuracy(model, data, model.pipeline());
}

}  // namespace

double clean_accuracy(const Classifier& model, const Dataset& data, const InputPipeline& pipeline) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& item : data) correct += model.predict_label(pipeline(item)) == item.meta.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

ReferenceClassifier train_standard(ReferenceClassifier model, const Dataset& data, const TrainConfig& config,
                                   TrainReport* report) {
  check_dataset(model, data);
  require(config.batch_size >= 1, ErrorKind::parameter, "batch size must be positive");
  const auto& pipeline = model.pipeline();
  std::vector<SignalTriple> inputs;
  inputs.reserve(data.size());
  for (const auto& item : data) inputs.push_back(pipeline(item));

  MomentumSgd optimizer(model.parameters().size(), config);
  Rng rng(derive_seed(config.seed, 0x5354));
  const auto& k = kernels::active();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = shuffled(data.size(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      std::vector<double> grad(model.parameters().size(), 0.0);
      double loss = 0.0;
      for (std::size_t b = begin; b < end; ++b) {
        const auto idx = order[b];
        const auto g = model.loss_gradients(inputs[idx], data[idx].meta.label, false);
        k.axpy(inv, g.parameters.data(), grad.data(), grad.size());
        loss += g.loss * inv;
      }
      optimizer.step(model.parameters(), grad);
      loss_sum += loss;
      ++batches;
    }
    if (report != nullptr) report->epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }
  finish_report(report, model, data);
  return model;
}

ReferenceClassifier train_free(ReferenceClassifier model, const Dataset& data, const FreeConfig& config,
                               TrainReport* report) {
  check_dataset(model, data);
  require(config.hop_steps >= 1, ErrorKind::parameter, "hop_steps must be at least 1");
  require(config.epsilon_head > 0.0, ErrorKind::parameter, "epsilon_head must be positive");
  require(config.train.batch_size >= 1, ErrorKind::parameter, "batch size must be positive");
  const auto& pipeline = model.pipeline();
  const auto& tc = config.train;

  std::vector<double> radius(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) radius[i] = head_length(data[i]) * config.epsilon_head;

  // One perturbation per minibatch slot, reused across minibatches.
  std::vector<std::vector<double>> slot_delta(tc.batch_size);

  MomentumSgd optimizer(model.parameters().size(), tc);
  Rng rng(derive_seed(tc.seed, 0x5354));
  const auto& k = kernels::active();
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    const auto order = shuffled(data.size(), rng);
    double loss_sum = 0.0;
    std::size_t replays = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += tc.batch_size) {
      const std::size_t end = std::min(order.size(), begin + tc.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (std::size_t hop = 0; hop < config.hop_steps; ++hop) {
        std::vector<double> grad(model.parameters().size(), 0.0);
        double loss = 0.0;
        std::vector<std::vector<double>> input_grads(end - begin);
        for (std::size_t b = begin; b < end; ++b) {
          const auto idx = order[b];
          const auto& seq = data[idx];
          auto& delta = slot_delta[b - begin];
          if (delta.size() != seq.positions().size()) delta.assign(seq.positions().size(), 0.0);
          project_l2(delta, radius[idx]);

          SkeletonSequence adv = seq;
          k.axpy(1.0, delta.data(), adv.positions().data(), delta.size());
          const auto g = model.loss_gradients(pipeline(adv), seq.meta.label, true);
          k.axpy(inv, g.parameters.data(), grad.data(), grad.size());
          loss += g.loss * inv;
          input_grads[b - begin] = pipeline.backprop(g.input, seq);
        }
        optimizer.step(model.parameters(), grad);
        for (std::size_t b = begin; b < end; ++b) {
          const auto idx = order[b];
          auto& delta = slot_delta[b - begin];
          const auto& g = input_grads[b - begin];
          const double gn = l2_norm(g);
          if (gn > 0.0) k.axpy(radius[idx] / gn, g.data(), delta.data(), delta.size());
          project_l2(delta, radius[idx]);
        }
        loss_sum += loss;
        ++replays;
      }
    }
    if (report != nullptr) report->epoch_loss.push_back(loss_sum / static_cast<double>(replays));
  }
  finish_report(report, model, data);
  return model;
}

}  // namespace skelfreq
