#ifndef TCVAR_SYNTHETIC_HPP
#define TCVAR_SYNTHETIC_HPP

#include "tcvar/corpus.hpp"

#include <random>

namespace tcvar {

/// Random first-order Markov "language" over a shared word list. Each context
/// (BOS or a word) can be followed by `support` words with Dirichlet(1)
/// weights; sentence length is uniform in [min_length, max_length].
struct BigramLanguageSpec {
  int num_words = 200;
  int support = 8;
  int min_length = 6;
  int max_length = 12;
  std::uint64_t seed = 0;
};

class BigramLanguage {
public:
  explicit BigramLanguage(const BigramLanguageSpec& spec);

  std::vector<EncodedSentence> sample(std::size_t count, std::mt19937_64& rng, const std::string& label) const;

  /// Exact transition probability between word indices (-1 is BOS).
  double transition(int prev, int next) const;
  const BigramLanguageSpec& spec() const { return spec_; }

  /// Mean per-word transition entropy under a uniform context, in nats.
  double mean_transition_entropy() const;

private:
  BigramLanguageSpec spec_;
  Eigen::MatrixXd transitions_;  // (num_words + 1) x num_words, row 0 is BOS
};

/// Vocabulary of <unk>, <eos>, w0 ... w{n-1}; word i has id i + 2.
Vocabulary synthetic_vocabulary(int num_words);

struct SyntheticShiftData {
  Vocabulary vocab;
  std::vector<EncodedSentence> target_train;
  std::vector<EncodedSentence> nuisance_train;
  std::vector<EncodedSentence> target_test;
};

struct SyntheticShiftSpec {
  int num_words = 200;
  BigramLanguageSpec target{200, 6, 6, 12, 11};
  BigramLanguageSpec nuisance{200, 40, 6, 12, 23};
  std::size_t target_train = 5000;
  std::size_t nuisance_train = 45000;
  std::size_t target_test = 1000;
  std::uint64_t seed = 7;
};

/// Two sub-languages over one vocabulary: a low-entropy target and a
/// high-entropy nuisance language.
SyntheticShiftData make_synthetic_shift(const SyntheticShiftSpec& spec);

} // namespace tcvar

#endif
