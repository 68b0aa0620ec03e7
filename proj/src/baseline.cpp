#include "tcvar/baseline.hpp"

#include "tcvar/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace tcvar {

BigramModel::BigramModel(TopicId topic, int vocab_size, double add_k, double interpolation_lambda)
    : topic_(topic), vocab_size_(vocab_size), add_k_(add_k), lambda_(interpolation_lambda),
      context_counts_(static_cast<std::size_t>(vocab_size) + 1, 0),
      unigram_counts_(static_cast<std::size_t>(vocab_size), 0) {
  if (vocab_size < 1) {
    throw Error("bigram model needs a nonempty vocabulary");
  }
  if (!(add_k > 0.0)) {
    throw Error("add_k must be positive");
  }
  if (!(interpolation_lambda > 0.0 && interpolation_lambda < 1.0)) {
    throw Error("interpolation lambda must lie in (0, 1)");
  }
}

void BigramModel::observe(const EncodedSentence& x) {
  TokenId prev = bos();
  for (TokenId w : x.ids) {
    if (w < 0 || w >= vocab_size_) {
      throw Error("token id " + std::to_string(w) + " outside vocabulary");
    }
    ++bigram_counts_[key(prev, w)];
    ++context_counts_[static_cast<std::size_t>(prev)];
    ++unigram_counts_[static_cast<std::size_t>(w)];
    ++total_;
    prev = w;
  }
}

std::int64_t BigramModel::bigram_count(TokenId prev, TokenId next) const {
  auto it = bigram_counts_.find(key(prev, next));
  return it == bigram_counts_.end() ? 0 : it->second;
}

double BigramModel::prob(TokenId next, TokenId prev) const {
  const double kv = add_k_ * vocab_size_;
  const double bigram = (static_cast<double>(bigram_count(prev, next)) + add_k_) /
                        (static_cast<double>(context_count(prev)) + kv);
  const double unigram = (static_cast<double>(unigram_count(next)) + add_k_) / (static_cast<double>(total_) + kv);
  return lambda_ * bigram + (1.0 - lambda_) * unigram;
}

std::string BigramModel::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = "bigram";
  j["topic"] = topic_;
  j["vocab_size"] = vocab_size_;
  j["add_k"] = add_k_;
  j["interpolation_lambda"] = lambda_;
  j["total_tokens"] = total_;
  std::vector<std::pair<std::uint64_t, std::int64_t>> entries(bigram_counts_.begin(), bigram_counts_.end());
  std::sort(entries.begin(), entries.end());
  auto arr = nlohmann::ordered_json::array();
  const auto stride = static_cast<std::uint64_t>(vocab_size_ + 1);
  for (const auto& [k, c] : entries) {
    arr.push_back({k / stride, k % stride, c});
  }
  j["bigrams"] = std::move(arr);
  return j.dump() + "\n";
}

BigramModel BigramModel::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("kind", "") != "bigram") {
    throw Error("not a bigram baseline file");
  }
  BigramModel m(j.at("topic").get<TopicId>(), j.at("vocab_size").get<int>(), j.at("add_k").get<double>(),
                j.at("interpolation_lambda").get<double>());
  for (const auto& e : j.at("bigrams")) {
    const auto prev = e.at(0).get<TokenId>();
    const auto next = e.at(1).get<TokenId>();
    const auto c = e.at(2).get<std::int64_t>();
    m.bigram_counts_[m.key(prev, next)] = c;
    m.context_counts_[static_cast<std::size_t>(prev)] += c;
    m.unigram_counts_[static_cast<std::size_t>(next)] += c;
    m.total_ += c;
  }
  if (m.total_ != j.at("total_tokens").get<std::int64_t>()) {
    throw Error("bigram baseline file is inconsistent (token total)");
  }
  return m;
}

BigramModel fit_bigram(std::span<const EncodedSentence> topic_sentences, TopicId topic, int vocab_size,
                       double add_k, double interpolation_lambda) {
  if (topic_sentences.empty()) {
    throw Error("topic " + std::to_string(topic) + " has no sentences");
  }
  BigramModel m(topic, vocab_size, add_k, interpolation_lambda);
  for (const auto& x : topic_sentences) {
    m.observe(x);
  }
  return m;
}

double bigram_nll(const BigramModel& model, const EncodedSentence& x) {
  double nll = 0.0;
  TokenId prev = model.bos();
  for (TokenId w : x.ids) {
    nll -= std::log(model.prob(w, prev));
    prev = w;
  }
  return nll;
}

BaselinedLoss baselined_loss(double model_nll, double baseline_nll) {
  if (!std::isfinite(model_nll) || !std::isfinite(baseline_nll)) {
    throw Error("baselined loss needs finite inputs");
  }
  return {model_nll - baseline_nll};
}

void BigramBaselines::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& m : models_) {
    write_file_atomic(dir / ("baseline.topic" + std::to_string(m.topic_id())), m.to_json());
  }
}

BigramBaselines BigramBaselines::load(const std::filesystem::path& dir, int num_topics) {
  std::vector<BigramModel> models;
  for (int k = 0; k < num_topics; ++k) {
    models.push_back(BigramModel::from_json(read_file(dir / ("baseline.topic" + std::to_string(k)))));
  }
  return BigramBaselines(std::move(models));
}

BigramBaselines fit_baselines(std::span<const TopicSentence> corpus, int num_topics, int vocab_size, double add_k,
                              double interpolation_lambda) {
  std::vector<std::vector<EncodedSentence>> slices(static_cast<std::size_t>(num_topics));
  for (const auto& ex : corpus) {
    if (ex.topic < 0 || ex.topic >= num_topics) {
      throw Error("topic id " + std::to_string(ex.topic) + " outside [0, " + std::to_string(num_topics) + ")");
    }
    slices[static_cast<std::size_t>(ex.topic)].push_back(ex.sentence);
  }
  std::vector<BigramModel> models;
  models.reserve(slices.size());
  for (int k = 0; k < num_topics; ++k) {
    models.push_back(fit_bigram(slices[static_cast<std::size_t>(k)], k, vocab_size, add_k, interpolation_lambda));
  }
  return BigramBaselines(std::move(models));
}

} // namespace tcvar
