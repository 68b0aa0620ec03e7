#ifndef TCVAR_BASELINE_HPP
#define TCVAR_BASELINE_HPP

#include "tcvar/common.hpp"

#include <filesystem>
#include <span>
#include <unordered_map>

namespace tcvar {

/// Interpolated add-k bigram model used as a per-topic entropy baseline.
///
///   p(w | prev) = lambda * (c(prev, w) + k) / (c(prev) + k V)
///               + (1 - lambda) * (c(w) + k) / (N + k V)
///
/// The first token of a sentence is conditioned on a begin-of-sentence
/// context; <eos> is predicted like any other token.
class BigramModel {
public:
  static constexpr double kDefaultAddK = 0.01;
  static constexpr double kDefaultLambda = 0.9;

  BigramModel() = default;
  BigramModel(TopicId topic, int vocab_size, double add_k, double interpolation_lambda);

  void observe(const EncodedSentence& x);

  double prob(TokenId next, TokenId prev) const;
  double prob_after_bos(TokenId next) const { return prob(next, bos()); }
  TokenId bos() const { return vocab_size_; }

  TopicId topic_id() const { return topic_; }
  int vocab_size() const { return vocab_size_; }
  double add_k() const { return add_k_; }
  double interpolation_lambda() const { return lambda_; }
  std::int64_t total_tokens() const { return total_; }
  std::int64_t bigram_count(TokenId prev, TokenId next) const;
  std::int64_t context_count(TokenId prev) const { return context_counts_[static_cast<std::size_t>(prev)]; }
  std::int64_t unigram_count(TokenId w) const { return unigram_counts_[static_cast<std::size_t>(w)]; }

  std::string to_json() const;
  static BigramModel from_json(const std::string& text);

private:
  std::uint64_t key(TokenId prev, TokenId next) const {
    return static_cast<std::uint64_t>(prev) * static_cast<std::uint64_t>(vocab_size_ + 1) +
           static_cast<std::uint64_t>(next);
  }

  TopicId topic_ = 0;
  int vocab_size_ = 0;
  double add_k_ = kDefaultAddK;
  double lambda_ = kDefaultLambda;
  std::unordered_map<std::uint64_t, std::int64_t> bigram_counts_;
  std::vector<std::int64_t> context_counts_;  // V + 1 entries, last is BOS
  std::vector<std::int64_t> unigram_counts_;
  std::int64_t total_ = 0;
};

BigramModel fit_bigram(std::span<const EncodedSentence> topic_sentences, TopicId topic, int vocab_size,
                       double add_k = BigramModel::kDefaultAddK,
                       double interpolation_lambda = BigramModel::kDefaultLambda);

/// -sum_t log p(x_t | x_{t-1}) over all positions including <eos>.
double bigram_nll(const BigramModel& model, const EncodedSentence& x);

struct BaselinedLoss {
  double value = 0.0;
};

/// model_nll - baseline_nll, i.e. log p_baseline(x|z) - log p_model(x).
BaselinedLoss baselined_loss(double model_nll, double baseline_nll);

/// Source of frozen per-topic reference log likelihoods.
class BaselineScorer {
public:
  virtual ~BaselineScorer() = default;
  virtual int num_topics() const = 0;
  virtual double nll(const EncodedSentence& x, TopicId topic) const = 0;
};

class BigramBaselines final : public BaselineScorer {
public:
  explicit BigramBaselines(std::vector<BigramModel> models) : models_(std::move(models)) {}

  int num_topics() const override { return static_cast<int>(models_.size()); }
  double nll(const EncodedSentence& x, TopicId topic) const override {
    return bigram_nll(models_.at(static_cast<std::size_t>(topic)), x);
  }
  const BigramModel& model(TopicId topic) const { return models_.at(static_cast<std::size_t>(topic)); }

  /// Writes one `baseline.topic<k>` JSON file per topic into `dir`.
  void save(const std::filesystem::path& dir) const;
  static BigramBaselines load(const std::filesystem::path& dir, int num_topics);

private:
  std::vector<BigramModel> models_;
};

/// Fits one bigram model per topic on the topic-partitioned corpus.
BigramBaselines fit_baselines(std::span<const TopicSentence> corpus, int num_topics, int vocab_size,
                              double add_k = BigramModel::kDefaultAddK,
                              double interpolation_lambda = BigramModel::kDefaultLambda);

} // namespace tcvar

#endif
