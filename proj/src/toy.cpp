#include "tcvar/toy.hpp"

#include <json.hpp>

#include <cmath>

namespace tcvar {

std::vector<std::vector<TokenId>> ToyInstance::outcome_ids() const {
  std::vector<std::vector<TokenId>> out;
  for (const auto& x : outcomes) {
    out.push_back(x.ids);
  }
  return out;
}

ToyInstance make_toy_instance() {
  ToyInstance t;
  t.names = {"A", "B", "C", "D", "E", "F"};
  t.outcome_topic = {0, 0, 1, 1, 1, 1};
  // reviews 10%, news 90%, F nearly absent
  const int counts[ToyInstance::kOutcomes] = {5, 5, 30, 30, 29, 1};
  t.p_train.resize(ToyInstance::kOutcomes);
  t.topic_prior = Eigen::VectorXd::Zero(ToyInstance::kTopics);
  for (int i = 0; i < ToyInstance::kOutcomes; ++i) {
    const auto id = t.vocab.add(t.names[static_cast<std::size_t>(i)]);
    EncodedSentence x{{id, kEosId}, t.outcome_topic[static_cast<std::size_t>(i)] == 0 ? "review" : "news"};
    t.outcomes.push_back(x);
    t.p_train(i) = counts[i] / 100.0;
    t.topic_prior(t.outcome_topic[static_cast<std::size_t>(i)]) += t.p_train(i);
    for (int c = 0; c < counts[i]; ++c) {
      t.corpus.push_back({x, t.outcome_topic[static_cast<std::size_t>(i)]});
    }
  }
  t.conditional = Eigen::MatrixXd::Zero(ToyInstance::kTopics, ToyInstance::kOutcomes);
  for (int i = 0; i < ToyInstance::kOutcomes; ++i) {
    const TopicId z = t.outcome_topic[static_cast<std::size_t>(i)];
    t.conditional(z, i) = t.p_train(i) / t.topic_prior(z);
  }
  return t;
}

double ExactTopicBaseline::nll(const EncodedSentence& x, TopicId topic) const {
  for (int i = 0; i < ToyInstance::kOutcomes; ++i) {
    if (toy_->outcomes[static_cast<std::size_t>(i)].ids == x.ids) {
      const double p = toy_->conditional(topic, i);
      if (!(p > 0.0)) {
        throw Error("toy sentence " + toy_->names[static_cast<std::size_t>(i)] + " has no mass under topic " +
                    std::to_string(topic));
      }
      return -std::log(p);
    }
  }
  throw Error("sentence is not part of the toy instance");
}

double topic_kl(const ToyInstance& toy, const Eigen::VectorXd& model_probs, TopicId topic) {
  double kl = 0.0;
  for (int i = 0; i < ToyInstance::kOutcomes; ++i) {
    const double p = toy.conditional(topic, i);
    if (p > 0.0) {
      kl += p * std::log(p / model_probs(i));
    }
  }
  return kl;
}

ToyModeResult run_toy_mode(const ToyInstance& toy, Objective objective, const ToyOptions& options) {
  TabularModel<double> model(toy.outcome_ids());
  DroConfig cfg;
  cfg.objective = objective;
  cfg.alpha = objective == Objective::SentenceCvar ? options.sentence_alpha : options.alpha;
  cfg.alpha_floor = 0.0;
  cfg.lr = options.lr;
  cfg.steps = options.steps;
  cfg.batch_size = options.batch_size;
  cfg.ewma_decay = options.ewma_decay;
  cfg.min_ratio = objective == Objective::Mle ? 0.0 : options.min_ratio;
  cfg.seed = options.seed;
  ExactTopicBaseline baseline(toy);
  ToyModeResult r;
  r.objective = objective;
  r.log = train(cfg, toy.corpus, model, &baseline, ToyInstance::kTopics);
  r.probs = model.probabilities();
  r.topic_kl = {topic_kl(toy, r.probs, 0), topic_kl(toy, r.probs, 1)};
  return r;
}

ToyReport run_toy(const ToyOptions& options) {
  const auto toy = make_toy_instance();
  ToyReport report;
  for (auto o : {Objective::Mle, Objective::SentenceCvar, Objective::TopicCvarLogloss, Objective::TopicCvar}) {
    report.modes.push_back(run_toy_mode(toy, o, options));
  }
  return report;
}

const ToyModeResult& ToyReport::mode(Objective o) const {
  for (const auto& m : modes) {
    if (m.objective == o) {
      return m;
    }
  }
  throw Error("toy report has no " + to_string(o) + " run");
}

std::string ToyReport::to_json(const ToyInstance& toy) const {
  nlohmann::ordered_json j;
  j["sentences"] = toy.names;
  j["p_train"] = std::vector<double>(toy.p_train.data(), toy.p_train.data() + toy.p_train.size());
  auto arr = nlohmann::ordered_json::array();
  for (const auto& m : modes) {
    nlohmann::ordered_json e;
    e["objective"] = to_string(m.objective);
    e["alpha"] = m.log.effective_alpha;
    e["probabilities"] = std::vector<double>(m.probs.data(), m.probs.data() + m.probs.size());
    e["kl_review"] = m.topic_kl(0);
    e["kl_news"] = m.topic_kl(1);
    e["mass_review"] = m.probs(0) + m.probs(1);
    e["mass_news"] = m.probs.tail(4).sum();
    arr.push_back(std::move(e));
  }
  j["modes"] = std::move(arr);
  return j.dump(2) + "\n";
}

} // namespace tcvar
