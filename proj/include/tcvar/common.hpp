#ifndef TCVAR_COMMON_HPP
#define TCVAR_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tcvar {

using TokenId = std::int32_t;
using TopicId = std::int32_t;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised for every recoverable failure in the library (bad input, infeasible
/// configuration, divergence). The CLI maps it to exit code 2.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Token-id sequence ending in exactly one EOS id.
struct EncodedSentence {
  std::vector<TokenId> ids;
  std::optional<std::string> source_label;

  // Number of scored positions (tokens plus EOS).
  std::size_t length() const { return ids.size(); }

  friend bool operator==(const EncodedSentence&, const EncodedSentence&) = default;
};

/// Training example: an encoded sentence together with its topic.
struct TopicSentence {
  EncodedSentence sentence;
  TopicId topic = 0;
};

/// 64-bit FNV-1a, used for vocabulary and checkpoint fingerprints.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v);

} // namespace tcvar

#endif
