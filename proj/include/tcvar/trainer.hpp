#ifndef TCVAR_TRAINER_HPP
#define TCVAR_TRAINER_HPP

#include "tcvar/baseline.hpp"
#include "tcvar/language_model.hpp"
#include "tcvar/worst_case.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace tcvar {

enum class Objective { Mle, TopicCvar, TopicCvarLogloss, SentenceCvar };

std::string to_string(Objective o);
Objective parse_objective(std::string_view name);

inline bool uses_topic_weights(Objective o) { return o == Objective::TopicCvar || o == Objective::TopicCvarLogloss; }

struct DroConfig {
  Objective objective = Objective::TopicCvar;
  double alpha = 0.2;
  double lr = 0.01;
  std::size_t steps = 1000;
  std::size_t batch_size = 500;
  double ewma_decay = 0.95;
  double min_ratio = 0.1;
  std::uint64_t seed = 0;
  // Requested alphas below this are raised to it; 0 disables the clamp.
  double alpha_floor = 0.2;
  // When nonempty, used as the topic prior instead of the streaming estimate.
  std::vector<double> topic_prior;

  double effective_alpha() const;
  void validate() const;
};

/// Running statistics of the minimax game: EWMA topic losses, streaming
/// topic counts and the current worst-case topic distribution.
struct TrainerState {
  Eigen::VectorXd ewma_losses;
  std::vector<bool> ewma_initialized;
  std::vector<std::int64_t> topic_counts;
  std::size_t step = 0;
  WorstCaseWeights<double> p_z;
  double alpha = 1.0;
  double ewma_decay = 0.95;
  double min_ratio = 0.1;
  Eigen::VectorXd fixed_prior;  // empty unless supplied

  TrainerState(int num_topics, double alpha, double ewma_decay, double min_ratio);

  int num_topics() const { return static_cast<int>(ewma_losses.size()); }

  /// Laplace-smoothed (count + 1) / (total + K), or the fixed prior.
  Eigen::VectorXd p_train_hat() const;

  /// EWMA losses with topics that have not been observed yet set to the mean
  /// of the observed ones (0 when nothing has been observed).
  Eigen::VectorXd solver_losses() const;

  void refresh_worst_case();
};

void update_loss_history(TrainerState& state, TopicId topic, double loss);

/// max(min_ratio, p_z[topic] / p_train_hat[topic]).
double example_weight(const TrainerState& state, TopicId topic);

struct StepRecord {
  std::size_t step = 0;
  Eigen::VectorXd ewma_losses;
  Eigen::VectorXd p_z;
  double mean_weighted_loss = 0.0;
  double lr = 0.0;
};

struct TrainLog {
  Objective objective = Objective::Mle;
  int num_topics = 0;
  double requested_alpha = 0.0;
  double effective_alpha = 0.0;
  double final_eta = 0.0;
  std::vector<StepRecord> records;

  /// step,objective,L_0..L_{K-1},p_0..p_{K-1},mean_weighted_loss,lr
  /// For mle and sentence-cvar the p columns hold the topic prior estimate.
  std::string to_csv() const;
};

namespace detail {

inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1));
  return v[idx];
}

} // namespace detail

/// Online minimax training.
///
/// Every step draws batch_size examples uniformly with replacement and
///   1. recomputes p_z from the EWMA losses (topic-CVaR objectives),
///   2. scores the batch (baselined loss for topic-cvar, raw NLL otherwise),
///   3. takes one SGD step on the mean of weight_i * grad nll(x_i),
///   4. folds every example's loss into the EWMA history.
/// Sentence CVaR uses the Rockafellar-Uryasev form eta + E[(l - eta)_+] / alpha
/// with eta moved by a subgradient step of size lr per batch.
template <LanguageModel M>
TrainLog train(const DroConfig& config, std::span<const TopicSentence> corpus, M& model,
               const BaselineScorer* baselines, int num_topics = 0) {
  config.validate();
  if (corpus.empty()) {
    throw Error("training corpus is empty");
  }
  int K = num_topics;
  for (const auto& ex : corpus) {
    if (ex.topic < 0) {
      throw Error("negative topic id in training corpus");
    }
    K = std::max(K, ex.topic + 1);
  }
  if (num_topics > 0 && K > num_topics) {
    throw Error("training corpus has topic ids beyond the declared " + std::to_string(num_topics));
  }
  const Objective obj = config.objective;
  if (obj == Objective::TopicCvar) {
    if (baselines == nullptr) {
      throw Error("topic-cvar needs baselines for every topic");
    }
    if (baselines->num_topics() < K) {
      throw Error("topic-cvar needs baselines for every topic (have " + std::to_string(baselines->num_topics()) +
                  ", need " + std::to_string(K) + ")");
    }
  }
  if (!config.topic_prior.empty() && static_cast<int>(config.topic_prior.size()) != K) {
    throw Error("fixed topic prior has the wrong number of topics");
  }

  const double alpha = obj == Objective::Mle ? 1.0 : config.effective_alpha();
  TrainerState state(K, alpha, config.ewma_decay, config.min_ratio);
  if (!config.topic_prior.empty()) {
    state.fixed_prior = Eigen::Map<const Eigen::VectorXd>(config.topic_prior.data(), K);
  }

  std::vector<double> baseline_nll;
  if (obj == Objective::TopicCvar) {
    baseline_nll.reserve(corpus.size());
    for (const auto& ex : corpus) {
      baseline_nll.push_back(baselines->nll(ex.sentence, ex.topic));
    }
  }

  TrainLog log;
  log.objective = obj;
  log.num_topics = K;
  log.requested_alpha = config.alpha;
  log.effective_alpha = alpha;
  log.records.reserve(config.steps);

  std::mt19937_64 rng(config.seed);
  const std::size_t B = config.batch_size;
  std::vector<std::size_t> picks(B);
  std::vector<EncodedSentence> batch(B);
  std::vector<double> losses(B);
  std::vector<double> weights(B);
  Vector<typename M::Scalar> grad;
  double eta = 0.0;
  bool eta_initialized = false;

  for (std::size_t t = 0; t < config.steps; ++t) {
    for (std::size_t i = 0; i < B; ++i) {
      picks[i] = static_cast<std::size_t>(rng() % corpus.size());
      batch[i] = corpus[picks[i]].sentence;
    }
    if (uses_topic_weights(obj)) {
      state.refresh_worst_case();
    }
    const auto cache = model.forward(batch);
    for (std::size_t i = 0; i < B; ++i) {
      const double nll = cache.sentence_nll[i];
      losses[i] = obj == Objective::TopicCvar ? baselined_loss(nll, baseline_nll[picks[i]]).value : nll;
      if (!std::isfinite(losses[i])) {
        throw Error("non-finite loss at step " + std::to_string(t));
      }
    }
    switch (obj) {
    case Objective::Mle:
      std::fill(weights.begin(), weights.end(), 1.0);
      break;
    case Objective::TopicCvar:
    case Objective::TopicCvarLogloss:
      for (std::size_t i = 0; i < B; ++i) {
        weights[i] = example_weight(state, corpus[picks[i]].topic);
      }
      break;
    case Objective::SentenceCvar: {
      if (!eta_initialized) {
        eta = detail::quantile(losses, 1.0 - alpha);
        eta_initialized = true;
      }
      std::size_t above = 0;
      for (std::size_t i = 0; i < B; ++i) {
        const bool tail = losses[i] > eta;
        above += tail ? 1 : 0;
        weights[i] = std::max(config.min_ratio, tail ? 1.0 / alpha : 0.0);
      }
      eta -= config.lr * (1.0 - static_cast<double>(above) / (alpha * static_cast<double>(B)));
      break;
    }
    }

    StepRecord rec;
    rec.step = t;
    rec.lr = config.lr;
    double weighted = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
      weighted += weights[i] * losses[i];
    }
    rec.mean_weighted_loss = weighted / static_cast<double>(B);

    weighted_step(model, cache, weights, config.lr, grad);
    for (std::size_t i = 0; i < B; ++i) {
      update_loss_history(state, corpus[picks[i]].topic, losses[i]);
    }
    ++state.step;
    rec.ewma_losses = state.ewma_losses;
    rec.p_z = uses_topic_weights(obj) ? state.p_z.p_z : state.p_train_hat();
    log.records.push_back(std::move(rec));
  }
  log.final_eta = eta;
  return log;
}

} // namespace tcvar

#endif
