#include "tcvar/topics.hpp"

#include "tcvar/corpus.hpp"
#include "tcvar/io.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace tcvar {

void TopicModelState::check_invariants() const {
  const auto K = num_topics;
  if (doc_topic_counts.rows() != static_cast<Eigen::Index>(num_docs()) || doc_topic_counts.cols() != K ||
      topic_word_counts.rows() != K || topic_word_counts.cols() != vocab_size || topic_totals.size() != K) {
    throw Error("topic model tables have inconsistent shapes");
  }
  if ((doc_topic_counts.array() < 0).any() || (topic_word_counts.array() < 0).any()) {
    throw Error("negative topic count");
  }
  if (topic_word_counts.rowwise().sum() != topic_totals) {
    throw Error("topic totals disagree with topic-word counts");
  }
  for (std::size_t d = 0; d < num_docs(); ++d) {
    if (doc_topic_counts.row(static_cast<Eigen::Index>(d)).sum() != static_cast<int>(doc_words[d].size())) {
      throw Error("document " + std::to_string(d) + " topic counts disagree with its length");
    }
  }
}

TopicModelState init_lda(std::span<const EncodedSentence> corpus, int vocab_size, const LdaOptions& options,
                         std::mt19937_64& rng) {
  if (options.num_topics < 2) {
    throw Error("LDA needs at least 2 topics");
  }
  if (options.iterations < 1) {
    throw Error("LDA needs at least 1 iteration");
  }
  if (corpus.empty()) {
    throw Error("empty corpus");
  }
  if (static_cast<std::size_t>(options.num_topics) > corpus.size()) {
    throw Error("more topics than sentences");
  }
  if (!(options.alpha_prior > 0.0) || !(options.beta_prior > 0.0)) {
    throw Error("LDA priors must be positive");
  }
  TopicModelState s;
  s.num_topics = options.num_topics;
  s.vocab_size = vocab_size;
  s.alpha_prior = options.alpha_prior;
  s.beta_prior = options.beta_prior;
  const auto D = static_cast<Eigen::Index>(corpus.size());
  s.doc_topic_counts = Eigen::MatrixXi::Zero(D, s.num_topics);
  s.topic_word_counts = Eigen::MatrixXi::Zero(s.num_topics, vocab_size);
  s.topic_totals = Eigen::VectorXi::Zero(s.num_topics);
  s.doc_words.resize(corpus.size());
  s.token_assignments.resize(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (TokenId w : corpus[d].ids) {
      if (w == kUnkId || w == kEosId) {
        continue;
      }
      if (w < 0 || w >= vocab_size) {
        throw Error("token id " + std::to_string(w) + " outside vocabulary");
      }
      const auto k = static_cast<TopicId>(rng() % static_cast<std::uint64_t>(s.num_topics));
      s.doc_words[d].push_back(w);
      s.token_assignments[d].push_back(k);
      ++s.doc_topic_counts(static_cast<Eigen::Index>(d), k);
      ++s.topic_word_counts(k, w);
      ++s.topic_totals(k);
    }
  }
  return s;
}

namespace {

void remove_token(TopicModelState& s, std::size_t d, std::size_t pos) {
  const TopicId k = s.token_assignments[d][pos];
  const TokenId w = s.doc_words[d][pos];
  --s.doc_topic_counts(static_cast<Eigen::Index>(d), k);
  --s.topic_word_counts(k, w);
  --s.topic_totals(k);
}

void add_token(TopicModelState& s, std::size_t d, std::size_t pos, TopicId k) {
  const TokenId w = s.doc_words[d][pos];
  s.token_assignments[d][pos] = k;
  ++s.doc_topic_counts(static_cast<Eigen::Index>(d), k);
  ++s.topic_word_counts(k, w);
  ++s.topic_totals(k);
}

// Conditional weights with the token already removed from the tables.
void conditional_weights(const TopicModelState& s, std::size_t d, TokenId w, Eigen::VectorXd& out) {
  const double vbeta = s.vocab_size * s.beta_prior;
  out.resize(s.num_topics);
  for (int k = 0; k < s.num_topics; ++k) {
    out(k) = (s.doc_topic_counts(static_cast<Eigen::Index>(d), k) + s.alpha_prior) *
             (s.topic_word_counts(k, w) + s.beta_prior) / (s.topic_totals(k) + vbeta);
  }
}

} // namespace

Eigen::VectorXd collapsed_conditional(const TopicModelState& state, std::size_t doc, std::size_t pos) {
  TopicModelState s = state;
  remove_token(s, doc, pos);
  Eigen::VectorXd w;
  conditional_weights(s, doc, s.doc_words[doc][pos], w);
  return w / w.sum();
}

namespace {

void resample_with_buffer(TopicModelState& s, std::size_t d, std::size_t pos, std::mt19937_64& rng,
                          Eigen::VectorXd& weights) {
  remove_token(s, d, pos);
  conditional_weights(s, d, s.doc_words[d][pos], weights);
  double u = unit_uniform(rng) * weights.sum();
  TopicId chosen = s.num_topics - 1;
  for (int k = 0; k < s.num_topics; ++k) {
    u -= weights(k);
    if (u < 0.0) {
      chosen = k;
      break;
    }
  }
  add_token(s, d, pos, chosen);
}

} // namespace

void resample_token(TopicModelState& state, std::size_t doc, std::size_t pos, std::mt19937_64& rng) {
  Eigen::VectorXd weights;
  resample_with_buffer(state, doc, pos, rng, weights);
}

void gibbs_sweep(TopicModelState& state, std::mt19937_64& rng) {
  Eigen::VectorXd weights(state.num_topics);
  for (std::size_t d = 0; d < state.num_docs(); ++d) {
    for (std::size_t i = 0; i < state.doc_words[d].size(); ++i) {
      resample_with_buffer(state, d, i, rng, weights);
    }
  }
}

TopicModelState fit_lda(std::span<const EncodedSentence> corpus, int vocab_size, const LdaOptions& options) {
  std::mt19937_64 rng(options.seed);
  TopicModelState state = init_lda(corpus, vocab_size, options, rng);
  for (int it = 0; it < options.iterations; ++it) {
    gibbs_sweep(state, rng);
  }
  return state;
}

TopicAssignment assign_topic(std::size_t sentence_index, const TopicModelState& state) {
  if (sentence_index >= state.num_docs()) {
    throw Error("sentence index " + std::to_string(sentence_index) + " out of range");
  }
  const auto row = state.doc_topic_counts.row(static_cast<Eigen::Index>(sentence_index));
  TopicId best = 0;
  double best_score = row(0) + state.alpha_prior;
  for (int k = 1; k < state.num_topics; ++k) {
    const double score = row(k) + state.alpha_prior;
    if (score > best_score) {
      best = k;
      best_score = score;
    }
  }
  return {sentence_index, best};
}

std::vector<TopicAssignment> assign_topics(const TopicModelState& state) {
  std::vector<TopicAssignment> out;
  out.reserve(state.num_docs());
  for (std::size_t d = 0; d < state.num_docs(); ++d) {
    out.push_back(assign_topic(d, state));
  }
  return out;
}

OracleTopics load_oracle_topics(std::span<const std::string> labels, std::span<const std::string> declared) {
  std::set<std::string> tagset;
  if (declared.empty()) {
    tagset.insert(labels.begin(), labels.end());
  } else {
    tagset.insert(declared.begin(), declared.end());
  }
  OracleTopics out;
  out.tags.assign(tagset.begin(), tagset.end());
  out.num_topics = static_cast<int>(out.tags.size());
  out.assignments.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::lower_bound(out.tags.begin(), out.tags.end(), labels[i]);
    if (it == out.tags.end() || *it != labels[i]) {
      throw Error("unknown topic tag '" + labels[i] + "'");
    }
    out.assignments.push_back({i, static_cast<TopicId>(it - out.tags.begin())});
  }
  return out;
}

void write_topic_assignments(const std::filesystem::path& path, int num_topics,
                             std::span<const TopicAssignment> assignments) {
  std::string body = "#K=" + std::to_string(num_topics) + "\n";
  for (const auto& a : assignments) {
    if (a.topic_id < 0 || a.topic_id >= num_topics) {
      throw Error("topic id " + std::to_string(a.topic_id) + " outside [0, " + std::to_string(num_topics) + ")");
    }
    body += std::to_string(a.sentence_index);
    body += '\t';
    body += std::to_string(a.topic_id);
    body += '\n';
  }
  write_file_atomic(path, body);
}

std::pair<int, std::vector<TopicAssignment>> read_topic_assignments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open topic file " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("#K=", 0) != 0) {
    throw Error("topic file " + path.string() + " lacks the #K= header");
  }
  const int K = std::stoi(line.substr(3));
  std::vector<TopicAssignment> out;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream ss(line);
    TopicAssignment a;
    if (!(ss >> a.sentence_index >> a.topic_id) || a.topic_id < 0 || a.topic_id >= K) {
      throw Error("bad topic line '" + line + "' in " + path.string());
    }
    out.push_back(a);
  }
  return {K, std::move(out)};
}

double cluster_purity(std::span<const TopicId> predicted, std::span<const TopicId> reference, int num_topics) {
  if (predicted.size() != reference.size() || predicted.empty()) {
    throw Error("cluster_purity needs equal, nonempty label vectors");
  }
  if (num_topics > 9) {
    throw Error("cluster_purity enumerates permutations; at most 9 topics");
  }
  Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(num_topics, num_topics);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++confusion(predicted[i], reference[i]);
  }
  std::vector<int> perm(static_cast<std::size_t>(num_topics));
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int hits = 0;
    for (int k = 0; k < num_topics; ++k) {
      hits += confusion(k, perm[static_cast<std::size_t>(k)]);
    }
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(predicted.size());
}

} // namespace tcvar
