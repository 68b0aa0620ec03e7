#ifndef TCVAR_EVAL_HPP
#define TCVAR_EVAL_HPP

#include "tcvar/baseline.hpp"
#include "tcvar/corpus.hpp"
#include "tcvar/language_model.hpp"

#include <cmath>
#include <map>

namespace tcvar {

struct TopicStats {
  double mean_nll = 0.0;
  double mean_baselined_loss = 0.0;  // NaN without baselines
  std::size_t count = 0;
};

struct EvalReport {
  std::string corpus_name;
  double total_nll = 0.0;
  std::size_t token_count = 0;  // includes one <eos> per sentence
  std::size_t sentence_count = 0;
  std::size_t unk_count = 0;
  double perplexity = 0.0;
  std::map<TopicId, TopicStats> per_topic;

  double unk_rate() const { return token_count == 0 ? 0.0 : static_cast<double>(unk_count) / token_count; }
  double mean_sentence_nll() const { return total_nll / static_cast<double>(sentence_count); }
  std::string to_json() const;
};

namespace detail {
inline constexpr std::size_t kEvalChunk = 256;
}

/// Scores every sentence once; returns per-sentence NLL in corpus order.
template <LanguageModel M>
std::vector<double> sentence_nlls(const M& model, std::span<const EncodedSentence> corpus) {
  std::vector<double> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); i += detail::kEvalChunk) {
    const auto n = std::min(detail::kEvalChunk, corpus.size() - i);
    const auto chunk = model.forward(corpus.subspan(i, n));
    out.insert(out.end(), chunk.sentence_nll.begin(), chunk.sentence_nll.end());
  }
  return out;
}

/// Token-level perplexity exp(sum nll / sum tokens). Per-topic statistics are
/// filled when `topics` is nonempty; baselined means also need `baselines`.
template <LanguageModel M>
EvalReport perplexity(const M& model, std::span<const EncodedSentence> corpus, std::string corpus_name = "",
                      std::span<const TopicId> topics = {}, const BaselineScorer* baselines = nullptr) {
  if (corpus.empty()) {
    throw Error("cannot evaluate on an empty corpus");
  }
  if (!topics.empty() && topics.size() != corpus.size()) {
    throw Error("topic labels do not match the corpus size");
  }
  EvalReport r;
  r.corpus_name = std::move(corpus_name);
  const auto nlls = sentence_nlls(model, corpus);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    r.total_nll += nlls[i];
    r.token_count += corpus[i].ids.size();
    r.unk_count += static_cast<std::size_t>(std::count(corpus[i].ids.begin(), corpus[i].ids.end(), kUnkId));
    if (!topics.empty()) {
      auto& ts = r.per_topic[topics[i]];
      ts.mean_nll += nlls[i];
      ts.mean_baselined_loss += baselines ? baselined_loss(nlls[i], baselines->nll(corpus[i], topics[i])).value : 0.0;
      ++ts.count;
    }
  }
  for (auto& [topic, ts] : r.per_topic) {
    ts.mean_nll /= static_cast<double>(ts.count);
    ts.mean_baselined_loss = baselines ? ts.mean_baselined_loss / static_cast<double>(ts.count) : std::nan("");
  }
  r.sentence_count = corpus.size();
  r.perplexity = std::exp(r.total_nll / static_cast<double>(r.token_count));
  return r;
}

struct ScatterRow {
  std::size_t sentence_index = 0;
  std::string source_label;
  double nll_a = 0.0;
  double nll_b = 0.0;
};

template <LanguageModel MA, LanguageModel MB>
std::vector<ScatterRow> loss_scatter(const MA& model_a, const MB& model_b, std::span<const EncodedSentence> corpus) {
  const auto a = sentence_nlls(model_a, corpus);
  const auto b = sentence_nlls(model_b, corpus);
  std::vector<ScatterRow> rows;
  rows.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    rows.push_back({i, corpus[i].source_label.value_or(""), a[i], b[i]});
  }
  return rows;
}

std::string scatter_csv(const std::vector<ScatterRow>& rows);

} // namespace tcvar

#endif
