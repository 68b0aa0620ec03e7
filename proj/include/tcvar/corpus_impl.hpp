#ifndef TCVAR_CORPUS_IMPL_HPP
#define TCVAR_CORPUS_IMPL_HPP

#include <algorithm>
#include <random>

namespace tcvar {

namespace detail {
inline void set_label(Sentence& s, const std::string& label) { s.source_label = label; }
inline void set_label(EncodedSentence& s, const std::string& label) { s.source_label = label; }
} // namespace detail

template <typename T>
std::vector<T> mix_sentences(const std::vector<T>& target, const std::vector<T>& nuisance,
                             double alpha_train, std::size_t target_count, std::uint64_t seed,
                             const std::string& target_label, const std::string& nuisance_label) {
  const std::size_t need = nuisance_count(target_count, alpha_train);
  if (target.size() < target_count) {
    throw Error("target corpus has " + std::to_string(target.size()) + " sentences, short by " +
                std::to_string(target_count - target.size()));
  }
  if (nuisance.size() < need) {
    throw Error("nuisance corpus has " + std::to_string(nuisance.size()) + " sentences, short by " +
                std::to_string(need - nuisance.size()));
  }
  std::vector<T> out;
  out.reserve(target_count + need);
  for (std::size_t i = 0; i < target_count; ++i) {
    out.push_back(target[i]);
    detail::set_label(out.back(), target_label);
  }
  for (std::size_t i = 0; i < need; ++i) {
    out.push_back(nuisance[i]);
    detail::set_label(out.back(), nuisance_label);
  }
  std::mt19937_64 rng(seed);
  // Fisher-Yates with our own index draws so the order does not depend on
  // the standard library's shuffle.
  for (std::size_t i = out.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(out[i - 1], out[j]);
  }
  return out;
}

template <typename T>
std::vector<T> mix_sentences(const std::vector<T>& target, const std::vector<T>& nuisance,
                             double alpha_train, std::size_t target_count, std::uint64_t seed) {
  return mix_sentences(target, nuisance, alpha_train, target_count, seed, "target", "nuisance");
}

} // namespace tcvar

#endif
