#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "skelfreq/features.hpp"
#include "skelfreq/transforms.hpp"

namespace skelfreq {

using Scores = std::vector<double>;

/// Anything that maps channel triples to per-class scores. Gradient support is
/// optional; attacks check differentiable() first.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::size_t class_count() const = 0;
  virtual std::vector<Scores> predict(std::span<const SignalTriple> batch) const = 0;

  virtual bool differentiable() const { return false; }
  /// Gradient of the cross-entropy loss at `label` with respect to the input.
  virtual SignalTriple input_gradient(const SignalTriple& input, int label) const;

  virtual std::string id() const { return "classifier"; }

  Scores predict_one(const SignalTriple& input) const;
  /// argmax of the scores, lowest index on ties.
  int predict_label(const SignalTriple& input) const;
};

int argmax(const Scores& scores);

/// Numerically stable -log softmax(scores)[label].
double cross_entropy(const Scores& scores, int label);

/// Desk-scale differentiable model: pooled embedding → affine → tanh → affine.
///
/// The embedding holds, for every channel and node, the temporal mean and the
/// root-mean-square forward difference (6N values). It is standardised with a
/// fixed per-feature affine map fitted once on clean training data.
class ReferenceClassifier final : public Classifier {
 public:
  ReferenceClassifier() = default;
  /// Random (Xavier-uniform) weights, identity standardisation.
  ReferenceClassifier(std::size_t nodes, std::size_t classes, std::size_t hidden, std::uint64_t seed,
                      InputPipeline pipeline = {});

  std::size_t class_count() const override { return classes_; }
  std::vector<Scores> predict(std::span<const SignalTriple> batch) const override;
  bool differentiable() const override { return true; }
  SignalTriple input_gradient(const SignalTriple& input, int label) const override;
  std::string id() const override;

  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t embedding_size() const noexcept { return 6 * nodes_; }
  const InputPipeline& pipeline() const noexcept { return pipeline_; }

  std::vector<double> embedding(const SignalTriple& input) const;
  /// Scores for a raw (unstandardised) embedding vector.
  Scores scores_from_embedding(std::span<const double> embedding) const;

  /// Fits the standardisation to the embeddings of `inputs`.
  void fit_normalization(std::span<const SignalTriple> inputs);

  struct Gradients {
    double loss = 0.0;
    std::vector<double> parameters;  ///< same layout as parameters()
    SignalTriple input;              ///< filled only when requested
  };
  Gradients loss_gradients(const SignalTriple& input, int label, bool want_input) const;

  /// Trainable parameters, flat: w1 (hidden × 6N, row-major), b1, w2
  /// (classes × hidden), b2.
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<const double> embed_mean() const noexcept { return mean_; }
  std::span<const double> embed_scale() const noexcept { return scale_; }

  void save(const std::filesystem::path& path) const;
  static ReferenceClassifier load(const std::filesystem::path& path);
  std::string to_json() const;
  static ReferenceClassifier from_json(const std::string& text);

  friend bool operator==(const ReferenceClassifier& a, const ReferenceClassifier& b) {
    return a.nodes_ == b.nodes_ && a.classes_ == b.classes_ && a.hidden_ == b.hidden_ &&
           a.pipeline_ == b.pipeline_ && a.mean_ == b.mean_ && a.scale_ == b.scale_ && a.params_ == b.params_;
  }

 private:
  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return hidden_ * embedding_size(); }
  std::size_t w2_offset() const { return b1_offset() + hidden_; }
  std::size_t b2_offset() const { return w2_offset() + classes_ * hidden_; }

  std::size_t nodes_ = 0;
  std::size_t classes_ = 0;
  std::size_t hidden_ = 0;
  InputPipeline pipeline_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> params_;
};

/// Dataset items are labelled raw sequences (label in meta.label).
using Dataset = std::vector<SkeletonSequence>;

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> epoch_loss;  ///< mean minibatch loss per epoch
  double train_accuracy = 0.0;     ///< clean accuracy after the last epoch
};

/// Minibatch SGD with momentum on mean cross-entropy over I(feature(X)).
ReferenceClassifier train_standard(ReferenceClassifier model, const Dataset& data, const TrainConfig& config,
                                   TrainReport* report = nullptr);

struct FreeConfig {
  TrainConfig train;
  std::size_t hop_steps = 4;
  double epsilon_head = 3.0;
};

/// "Free" adversarial training: every minibatch is replayed hop_steps times;
/// each replay takes one parameter step and reuses the same backward pass to
/// move the per-slot perturbation δ by ε·g/‖g‖ before projecting it onto the
/// ℓ2 ball of radius ε = head_length × epsilon_head. δ lives on raw positions
/// and carries over between minibatches.
ReferenceClassifier train_free(ReferenceClassifier model, const Dataset& data, const FreeConfig& config,
                               TrainReport* report = nullptr);

/// Fraction of `data` the classifier labels correctly through `pipeline`.
double clean_accuracy(const Classifier& model, const Dataset& data, const InputPipeline& pipeline);

struct AttackSpec {
  double epsilon_head = 3.0;
  std::size_t steps = 10;
  /// ≤ 0 selects the default 2ε / steps.
  double step_size = 0.0;
  /// Start from a random point on the sphere of radius ε/2.
  bool random_init = true;
  std::uint64_t seed = 0;
};

struct AttackResult {
  SkeletonSequence adversarial;
  double epsilon = 0.0;
  double delta_norm = 0.0;
  int clean_prediction = -1;
  int adversarial_prediction = -1;
  bool success = false;
};

/// Scales δ in place onto the ℓ2 ball of radius `epsilon` when it lies outside.
void project_l2(std::span<double> delta, double epsilon);

/// ℓ2-PGD on raw positions: ascend the cross-entropy of
/// model(pipeline(X + δ)), projecting after every step.
AttackResult pgd_attack(const Classifier& model, const SkeletonSequence& seq, int label, const AttackSpec& spec,
                        const InputPipeline& pipeline);

}  // namespace skelfreq
