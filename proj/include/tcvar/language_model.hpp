#ifndef TCVAR_LANGUAGE_MODEL_HPP
#define TCVAR_LANGUAGE_MODEL_HPP

#include "tcvar/common.hpp"

#include <concepts>
#include <span>

namespace tcvar {

/// What the trainer and evaluator need from a model.
///
/// `forward` scores a minibatch and keeps whatever the backward pass needs;
/// `accumulate_gradient` adds sum_i scale_i * grad nll(x_i) into a flat
/// gradient laid out like `params()`.
template <typename M>
concept LanguageModel = requires(M& m, const M& cm, const EncodedSentence& x,
                                 std::span<const EncodedSentence> batch, const typename M::Cache& cache,
                                 std::span<const double> scales, Vector<typename M::Scalar>& grad) {
  typename M::Scalar;
  typename M::Cache;
  { cm.nll(x) } -> std::convertible_to<double>;
  { cm.forward(batch) } -> std::same_as<typename M::Cache>;
  { cache.sentence_nll } -> std::convertible_to<std::vector<double>>;
  { cm.accumulate_gradient(cache, scales, grad) };
  { cm.params() } -> std::convertible_to<const Vector<typename M::Scalar>&>;
  { m.params() } -> std::same_as<Vector<typename M::Scalar>&>;
};

/// Full gradient of nll(x) with respect to the flat parameter vector.
template <LanguageModel M>
Vector<typename M::Scalar> gradient(const M& model, const EncodedSentence& x) {
  Vector<typename M::Scalar> grad = Vector<typename M::Scalar>::Zero(model.params().size());
  const auto cache = model.forward(std::span<const EncodedSentence>(&x, 1));
  const double one = 1.0;
  model.accumulate_gradient(cache, std::span<const double>(&one, 1), grad);
  return grad;
}

/// theta <- theta - lr / B * sum_i weight_i * grad nll(x_i), from an existing
/// forward cache of the minibatch.
template <LanguageModel M>
void weighted_step(M& model, const typename M::Cache& cache, std::span<const double> weights, double lr,
                   Vector<typename M::Scalar>& grad_buffer) {
  using Scalar = typename M::Scalar;
  if (weights.empty()) {
    return;
  }
  std::vector<double> scales(weights.begin(), weights.end());
  const double inv_b = 1.0 / static_cast<double>(weights.size());
  for (double& s : scales) {
    s *= inv_b;
  }
  grad_buffer.setZero(model.params().size());
  model.accumulate_gradient(cache, scales, grad_buffer);
  model.params().noalias() -= static_cast<Scalar>(lr) * grad_buffer;
}

template <LanguageModel M>
void weighted_step(M& model, std::span<const EncodedSentence> batch, std::span<const double> weights, double lr) {
  Vector<typename M::Scalar> grad;
  weighted_step(model, model.forward(batch), weights, lr, grad);
}

/// Single-example update theta <- theta - lr * weight * grad nll(x).
template <LanguageModel M>
void sgd_step(M& model, const EncodedSentence& x, double weight, double lr) {
  weighted_step(model, std::span<const EncodedSentence>(&x, 1), std::span<const double>(&weight, 1), lr);
}

template <LanguageModel M>
std::vector<double> batch_nll(const M& model, std::span<const EncodedSentence> batch) {
  return model.forward(batch).sentence_nll;
}

} // namespace tcvar

#endif
