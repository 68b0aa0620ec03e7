#ifndef TCVAR_TOPICS_HPP
#define TCVAR_TOPICS_HPP

#include "tcvar/common.hpp"

#include <filesystem>
#include <random>
#include <span>

namespace tcvar {

/// Count tables of a collapsed-Gibbs LDA sampler. One document per sentence;
/// the reserved <unk>/<eos> ids never enter the tables.
struct TopicModelState {
  int num_topics = 0;
  int vocab_size = 0;
  double alpha_prior = 0.1;
  double beta_prior = 1.0;
  Eigen::MatrixXi doc_topic_counts;   // D x K
  Eigen::MatrixXi topic_word_counts;  // K x V
  Eigen::VectorXi topic_totals;       // K
  std::vector<std::vector<TokenId>> doc_words;
  std::vector<std::vector<TopicId>> token_assignments;

  std::size_t num_docs() const { return doc_words.size(); }
  /// Checks the count-table invariants; throws Error describing the first
  /// violation.
  void check_invariants() const;
};

struct LdaOptions {
  int num_topics = 10;
  double alpha_prior = 0.1;
  double beta_prior = 1.0;
  int iterations = 100;
  std::uint64_t seed = 0;
};

/// Sets up the tables with uniformly random initial assignments.
TopicModelState init_lda(std::span<const EncodedSentence> corpus, int vocab_size, const LdaOptions& options,
                         std::mt19937_64& rng);

/// Unnormalised-then-normalised collapsed conditional of token `pos` in
/// document `doc`, computed with that token's own assignment removed.
Eigen::VectorXd collapsed_conditional(const TopicModelState& state, std::size_t doc, std::size_t pos);

/// Resamples one token's topic from its collapsed conditional.
void resample_token(TopicModelState& state, std::size_t doc, std::size_t pos, std::mt19937_64& rng);

void gibbs_sweep(TopicModelState& state, std::mt19937_64& rng);

TopicModelState fit_lda(std::span<const EncodedSentence> corpus, int vocab_size, const LdaOptions& options);

struct TopicAssignment {
  std::size_t sentence_index = 0;
  TopicId topic_id = 0;
  friend bool operator==(const TopicAssignment&, const TopicAssignment&) = default;
};

TopicAssignment assign_topic(std::size_t sentence_index, const TopicModelState& state);
std::vector<TopicAssignment> assign_topics(const TopicModelState& state);

struct OracleTopics {
  int num_topics = 0;
  std::vector<std::string> tags;  // sorted; tag i is topic i
  std::vector<TopicAssignment> assignments;
};

/// Topic id = index of the label in the sorted tag set. When `declared` is
/// empty the tag set is the set of distinct labels.
OracleTopics load_oracle_topics(std::span<const std::string> labels,
                                std::span<const std::string> declared = {});

void write_topic_assignments(const std::filesystem::path& path, int num_topics,
                             std::span<const TopicAssignment> assignments);
std::pair<int, std::vector<TopicAssignment>> read_topic_assignments(const std::filesystem::path& path);

/// Best-permutation accuracy of predicted against reference labels.
double cluster_purity(std::span<const TopicId> predicted, std::span<const TopicId> reference, int num_topics);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace tcvar

#endif
