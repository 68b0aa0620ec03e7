#include "tcvar/trainer.hpp"

#include "tcvar/io.hpp"

namespace tcvar {

std::string to_string(Objective o) {
  switch (o) {
  case Objective::Mle:
    return "mle";
  case Objective::TopicCvar:
    return "topic-cvar";
  case Objective::TopicCvarLogloss:
    return "topic-cvar-logloss";
  case Objective::SentenceCvar:
    return "sentence-cvar";
  }
  return "unknown";
}

Objective parse_objective(std::string_view name) {
  for (auto o : {Objective::Mle, Objective::TopicCvar, Objective::TopicCvarLogloss, Objective::SentenceCvar}) {
    if (to_string(o) == name) {
      return o;
    }
  }
  throw Error("unknown objective '" + std::string(name) + "'");
}

double DroConfig::effective_alpha() const { return alpha_floor > 0.0 ? std::max(alpha, alpha_floor) : alpha; }

void DroConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error("alpha must lie in (0, 1]");
  }
  if (!(alpha_floor >= 0.0 && alpha_floor <= 1.0)) {
    throw Error("alpha floor must lie in [0, 1]");
  }
  if (!(min_ratio >= 0.0 && min_ratio <= 1.0 / effective_alpha())) {
    throw Error("min_ratio must lie in [0, 1/alpha]");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw Error("learning rate must be positive");
  }
  if (!(ewma_decay > 0.0 && ewma_decay < 1.0)) {
    throw Error("ewma decay must lie in (0, 1)");
  }
  if (batch_size == 0) {
    throw Error("batch size must be positive");
  }
  for (double p : topic_prior) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw Error("fixed topic prior entries must be positive");
    }
  }
}

TrainerState::TrainerState(int num_topics, double alpha_, double ewma_decay_, double min_ratio_)
    : ewma_losses(Eigen::VectorXd::Zero(num_topics)), ewma_initialized(static_cast<std::size_t>(num_topics), false),
      topic_counts(static_cast<std::size_t>(num_topics), 0), alpha(alpha_), ewma_decay(ewma_decay_),
      min_ratio(min_ratio_) {
  if (num_topics < 1) {
    throw Error("trainer needs at least one topic");
  }
  refresh_worst_case();
}

Eigen::VectorXd TrainerState::p_train_hat() const {
  if (fixed_prior.size() > 0) {
    return fixed_prior;
  }
  const int K = num_topics();
  double total = 0.0;
  for (auto c : topic_counts) {
    total += static_cast<double>(c);
  }
  Eigen::VectorXd p(K);
  for (int k = 0; k < K; ++k) {
    p(k) = (static_cast<double>(topic_counts[static_cast<std::size_t>(k)]) + 1.0) / (total + K);
  }
  return p;
}

Eigen::VectorXd TrainerState::solver_losses() const {
  double sum = 0.0;
  int seen = 0;
  for (int k = 0; k < num_topics(); ++k) {
    if (ewma_initialized[static_cast<std::size_t>(k)]) {
      sum += ewma_losses(k);
      ++seen;
    }
  }
  const double fill = seen > 0 ? sum / seen : 0.0;
  Eigen::VectorXd out = ewma_losses;
  for (int k = 0; k < num_topics(); ++k) {
    if (!ewma_initialized[static_cast<std::size_t>(k)]) {
      out(k) = fill;
    }
  }
  return out;
}

void TrainerState::refresh_worst_case() { p_z = worst_case_topic_distribution(solver_losses(), p_train_hat(), alpha); }

void update_loss_history(TrainerState& state, TopicId topic, double loss) {
  if (topic < 0 || topic >= state.num_topics()) {
    throw Error("topic id " + std::to_string(topic) + " out of range");
  }
  if (!std::isfinite(loss)) {
    throw Error("non-finite loss for topic " + std::to_string(topic) + " (training diverged)");
  }
  const auto k = static_cast<std::size_t>(topic);
  if (!state.ewma_initialized[k]) {
    state.ewma_losses(topic) = loss;
    state.ewma_initialized[k] = true;
  } else {
    state.ewma_losses(topic) = state.ewma_decay * state.ewma_losses(topic) + (1.0 - state.ewma_decay) * loss;
  }
  ++state.topic_counts[k];
}

double example_weight(const TrainerState& state, TopicId topic) {
  return std::max(state.min_ratio, state.p_z.p_z(topic) / state.p_train_hat()(topic));
}

std::string TrainLog::to_csv() const {
  std::string out = "step,objective";
  for (int k = 0; k < num_topics; ++k) {
    out += ",L_" + std::to_string(k);
  }
  for (int k = 0; k < num_topics; ++k) {
    out += ",p_" + std::to_string(k);
  }
  out += ",mean_weighted_loss,lr\n";
  const std::string name = to_string(objective);
  for (const auto& r : records) {
    out += std::to_string(r.step);
    out += ',';
    out += name;
    for (int k = 0; k < num_topics; ++k) {
      out += ',' + format_double(r.ewma_losses(k));
    }
    for (int k = 0; k < num_topics; ++k) {
      out += ',' + format_double(r.p_z(k));
    }
    out += ',' + format_double(r.mean_weighted_loss);
    out += ',' + format_double(r.lr);
    out += '\n';
  }
  return out;
}

} // namespace tcvar
