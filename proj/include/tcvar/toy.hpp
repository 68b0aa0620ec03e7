#ifndef TCVAR_TOY_HPP
#define TCVAR_TOY_HPP

#include "tcvar/baseline.hpp"
#include "tcvar/corpus.hpp"
#include "tcvar/tabular_model.hpp"
#include "tcvar/trainer.hpp"

namespace tcvar {

/// Six one-word sentences A-F: topic 0 (reviews) = {A, B}, topic 1 (news) =
/// {C, D, E, F}, with F a rare, ungrammatical news sentence.
struct ToyInstance {
  static constexpr int kOutcomes = 6;
  static constexpr int kTopics = 2;

  Vocabulary vocab;
  std::vector<std::string> names;            // "A" .. "F"
  std::vector<EncodedSentence> outcomes;     // id sequence of each sentence
  std::vector<TopicId> outcome_topic;
  Eigen::VectorXd p_train;                   // joint training distribution
  Eigen::VectorXd topic_prior;               // p(z)
  Eigen::MatrixXd conditional;               // K x 6, p(x | z)
  std::vector<TopicSentence> corpus;         // 100 sentences in exact proportion

  std::vector<std::vector<TokenId>> outcome_ids() const;
};

ToyInstance make_toy_instance();

/// -log p(x | z) from the instance's exact topic conditionals.
class ExactTopicBaseline final : public BaselineScorer {
public:
  explicit ExactTopicBaseline(const ToyInstance& toy) : toy_(&toy) {}
  int num_topics() const override { return ToyInstance::kTopics; }
  double nll(const EncodedSentence& x, TopicId topic) const override;

private:
  const ToyInstance* toy_;
};

/// KL(p(. | z) || model) in nats.
double topic_kl(const ToyInstance& toy, const Eigen::VectorXd& model_probs, TopicId topic);

struct ToyOptions {
  double alpha = 0.2;           // topic-cvar and topic-cvar-logloss
  double sentence_alpha = 0.2;  // sentence-cvar
  double lr = 0.05;
  std::size_t steps = 20000;
  std::size_t batch_size = 500;
  double ewma_decay = 0.95;
  double min_ratio = 0.1;
  std::uint64_t seed = 1;
};

struct ToyModeResult {
  Objective objective = Objective::Mle;
  Eigen::VectorXd probs;
  Eigen::Vector2d topic_kl;
  TrainLog log;
};

struct ToyReport {
  std::vector<ToyModeResult> modes;

  const ToyModeResult& mode(Objective o) const;
  std::string to_json(const ToyInstance& toy) const;
};

ToyModeResult run_toy_mode(const ToyInstance& toy, Objective objective, const ToyOptions& options);

/// Trains all four objectives on the built-in instance.
ToyReport run_toy(const ToyOptions& options);

} // namespace tcvar

#endif
