#ifndef TCVAR_CORPUS_HPP
#define TCVAR_CORPUS_HPP

#include "tcvar/common.hpp"

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace tcvar {

inline constexpr TokenId kUnkId = 0;
inline constexpr TokenId kEosId = 1;
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kEosToken = "<eos>";

struct Sentence {
  std::vector<std::string> tokens;
  std::optional<std::string> source_label;
  // Raw line the tokens came from; the length filter looks at this.
  std::string surface;
};

/// Dense token <-> id map. Ids 0 and 1 are always <unk> and <eos>.
class Vocabulary {
public:
  Vocabulary();

  /// Builds from an id-ordered token list whose first two entries are the
  /// reserved tokens.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  TokenId add(const std::string& token);
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  std::uint64_t fingerprint() const;

  TokenId unk_id() const { return kUnkId; }
  TokenId eos_id() const { return kEosId; }

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

Sentence tokenize(std::string_view text);

/// Keeps sentences whose surface form has at least 10 characters.
std::vector<Sentence> filter_sentences(std::vector<Sentence> sentences);

inline constexpr std::size_t kMinSurfaceChars = 10;

/// Union over corpora of each corpus's top_k tokens by frequency (ties
/// lexicographic), plus the reserved ids.
Vocabulary build_vocabulary(const std::vector<std::vector<Sentence>>& corpora, std::size_t top_k);

EncodedSentence encode(const Sentence& sentence, const Vocabulary& vocab);
std::vector<EncodedSentence> encode_all(const std::vector<Sentence>& sentences, const Vocabulary& vocab);

struct MixtureSpec {
  std::filesystem::path target_corpus;
  std::filesystem::path nuisance_corpus;
  double alpha_train = 1.0;
  std::size_t target_count = 0;
  std::uint64_t seed = 0;
  std::string target_label = "target";
  std::string nuisance_label = "nuisance";
};

/// round(target_count * (1 - alpha_train) / alpha_train).
std::size_t nuisance_count(std::size_t target_count, double alpha_train);

/// Takes the first target_count target sentences and the first
/// nuisance_count(...) nuisance sentences, labels them, and shuffles the
/// union with the seed.
template <typename T>
std::vector<T> mix_sentences(const std::vector<T>& target, const std::vector<T>& nuisance,
                             double alpha_train, std::size_t target_count, std::uint64_t seed);

std::vector<Sentence> mix_corpora(const MixtureSpec& spec);

/// One sentence per line; blank lines are skipped.
std::vector<Sentence> read_corpus(const std::filesystem::path& path,
                                  std::optional<std::string> label = std::nullopt);
void write_corpus(const std::filesystem::path& path, const std::vector<Sentence>& sentences);

/// JSON manifest recording the spec plus resulting counts.
std::string mixture_manifest_json(const MixtureSpec& spec, std::size_t target_used,
                                  std::size_t nuisance_used);

} // namespace tcvar

#include "tcvar/corpus_impl.hpp"

#endif
