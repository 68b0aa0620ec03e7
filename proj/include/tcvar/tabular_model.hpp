#ifndef TCVAR_TABULAR_MODEL_HPP
#define TCVAR_TABULAR_MODEL_HPP

#include "tcvar/language_model.hpp"

#include <cmath>
#include <map>

namespace tcvar {

/// Softmax over a finite enumerated set of sentences, one logit per outcome.
template <typename Scalar_ = double>
class TabularModel {
public:
  using Scalar = Scalar_;

  struct Cache {
    std::vector<double> sentence_nll;
    std::vector<std::size_t> outcome;
    Vector<Scalar> probs;
  };

  explicit TabularModel(std::vector<std::vector<TokenId>> outcomes)
      : outcomes_(std::move(outcomes)), logits_(Vector<Scalar>::Zero(static_cast<Eigen::Index>(outcomes_.size()))) {
    if (outcomes_.empty()) {
      throw Error("tabular model needs at least one outcome");
    }
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
      if (!index_.emplace(outcomes_[i], i).second) {
        throw Error("duplicate outcome in tabular model");
      }
    }
  }

  std::size_t num_outcomes() const { return outcomes_.size(); }
  const std::vector<std::vector<TokenId>>& outcomes() const { return outcomes_; }

  std::size_t index_of(const EncodedSentence& x) const {
    auto it = index_.find(x.ids);
    if (it == index_.end()) {
      throw Error("sentence is not one of the tabular model's outcomes");
    }
    return it->second;
  }

  Vector<Scalar> probabilities() const {
    const Scalar m = logits_.maxCoeff();
    Vector<Scalar> p = (logits_.array() - m).exp().matrix();
    return p / p.sum();
  }

  double log_normalizer() const {
    const double m = static_cast<double>(logits_.maxCoeff());
    return m + std::log((logits_.template cast<double>().array() - m).exp().sum());
  }

  double nll(const EncodedSentence& x) const {
    return log_normalizer() - static_cast<double>(logits_(static_cast<Eigen::Index>(index_of(x))));
  }

  Cache forward(std::span<const EncodedSentence> batch) const {
    Cache c;
    c.probs = probabilities();
    const double lz = log_normalizer();
    c.sentence_nll.reserve(batch.size());
    c.outcome.reserve(batch.size());
    for (const auto& x : batch) {
      const std::size_t i = index_of(x);
      c.outcome.push_back(i);
      c.sentence_nll.push_back(lz - static_cast<double>(logits_(static_cast<Eigen::Index>(i))));
    }
    return c;
  }

  // d nll / d logits = softmax(logits) - onehot(x)
  void accumulate_gradient(const Cache& c, std::span<const double> scales, Vector<Scalar>& grad) const {
    double total = 0.0;
    for (std::size_t i = 0; i < c.outcome.size(); ++i) {
      total += scales[i];
      grad(static_cast<Eigen::Index>(c.outcome[i])) -= static_cast<Scalar>(scales[i]);
    }
    grad += static_cast<Scalar>(total) * c.probs;
  }

  const Vector<Scalar>& params() const { return logits_; }
  Vector<Scalar>& params() { return logits_; }

  static constexpr std::string_view kind() { return "tabular"; }

private:
  std::vector<std::vector<TokenId>> outcomes_;
  std::map<std::vector<TokenId>, std::size_t> index_;
  Vector<Scalar> logits_;
};

} // namespace tcvar

#endif
