#include "tcvar/sweep.hpp"

#include <cmath>

namespace tcvar {

std::string SweepResult::to_csv() const {
  std::string out = "alpha_train,objective,alpha,perplexity,seed,checkpoint\n";
  for (const auto& r : rows) {
    out += format_double(r.alpha_train) + ',' + to_string(r.objective) + ',' + format_double(r.alpha) + ',' +
           format_double(r.perplexity) + ',' + std::to_string(r.seed) + ',' + r.checkpoint + '\n';
  }
  return out;
}

const SweepRow& SweepResult::find(double alpha_train, Objective objective) const {
  for (const auto& r : rows) {
    if (std::abs(r.alpha_train - alpha_train) < 1e-12 && r.objective == objective) {
      return r;
    }
  }
  throw Error("no sweep row for alpha_train=" + format_double(alpha_train) + " objective=" + to_string(objective));
}

std::pair<std::vector<TopicSentence>, int> label_topics(const std::vector<EncodedSentence>& mixture, int vocab_size,
                                                        TopicSource source, const LdaOptions& lda) {
  std::vector<TopicSentence> out;
  out.reserve(mixture.size());
  if (source == TopicSource::Oracle) {
    std::vector<std::string> labels;
    labels.reserve(mixture.size());
    for (const auto& x : mixture) {
      labels.push_back(x.source_label.value_or(""));
    }
    const auto oracle = load_oracle_topics(labels);
    for (std::size_t i = 0; i < mixture.size(); ++i) {
      out.push_back({mixture[i], oracle.assignments[i].topic_id});
    }
    return {std::move(out), oracle.num_topics};
  }
  const auto state = fit_lda(mixture, vocab_size, lda);
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    out.push_back({mixture[i], assign_topic(i, state).topic_id});
  }
  return {std::move(out), lda.num_topics};
}

} // namespace tcvar
