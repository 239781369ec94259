#include <cmath>

#include "skelfreq/classifier.hpp"
#include "skelfreq/kernels.hpp"
#include "skelfreq/rng.hpp"

namespace skelfreq {

void project_l2(std::span<double> delta, double epsilon) {
  const auto& k = kernels::active();
  const double norm = std::sqrt(k.sum_squares(delta.data(), delta.size()));
  if (norm > epsilon && norm > 0.0) k.scale(epsilon / norm, delta.data(), delta.size());
}

AttackResult pgd_attack(const Classifier& model, const SkeletonSequence& seq, int label, const AttackSpec& spec,
                        const InputPipeline& pipeline) {
  require(model.differentiable(), ErrorKind::capability, model.id() + " cannot be attacked without gradients");
  require(spec.epsilon_head > 0.0, ErrorKind::parameter, "epsilon_head must be positive");
  require(spec.steps >= 1, ErrorKind::parameter, "attack needs at least one step");

  const auto& k = kernels::active();
  AttackResult result;
  result.epsilon = head_length(seq) * spec.epsilon_head;
  const double eps = result.epsilon;
  const double step = spec.step_size > 0.0 ? spec.step_size : 2.0 * eps / static_cast<double>(spec.steps);
  const std::size_t n = seq.positions().size();

  std::vector<double> delta(n, 0.0);
  if (spec.random_init) {
    Rng rng(spec.seed);
    for (double& d : delta) d = rng.normal();
    const double norm = std::sqrt(k.sum_squares(delta.data(), n));
    k.scale(0.5 * eps / norm, delta.data(), n);
  }

  auto perturbed = [&](const std::vector<double>& d) {
    SkeletonSequence out = seq;
    k.axpy(1.0, d.data(), out.positions().data(), n);
    return out;
  };

  for (std::size_t it = 0; it < spec.steps; ++it) {
    const auto input_grad = model.input_gradient(pipeline(perturbed(delta)), label);
    const auto g = pipeline.backprop(input_grad, seq);
    const double gn = std::sqrt(k.sum_squares(g.data(), n));
    if (gn > 0.0) k.axpy(step / gn, g.data(), delta.data(), n);
    project_l2(delta, eps);
  }

  result.adversarial = perturbed(delta);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = result.adversarial.positions()[i] - seq.positions()[i];
    d2 += d * d;
  }
  result.delta_norm = std::sqrt(d2);
  result.clean_prediction = model.predict_label(pipeline(seq));
  result.adversarial_prediction = model.predict_label(pipeline(result.adversarial));
  result.success = result.adversarial_prediction != label;
  return result;
}

}  // namespace skelfreq
