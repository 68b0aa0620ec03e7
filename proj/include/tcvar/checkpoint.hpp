#ifndef TCVAR_CHECKPOINT_HPP
#define TCVAR_CHECKPOINT_HPP

#include "tcvar/neural_ngram.hpp"
#include "tcvar/tabular_model.hpp"

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <type_traits>

namespace tcvar {

// Layout: "TCVAR-CHECKPOINT 1\n", one line of JSON header, then the raw
// little-endian parameter payload.
struct CheckpointParts {
  nlohmann::ordered_json header;
  std::string payload;
};

std::string encode_checkpoint(const CheckpointParts& parts);
CheckpointParts decode_checkpoint(const std::string& bytes);

template <typename Scalar>
constexpr const char* dtype_name() {
  static_assert(std::is_same_v<Scalar, double> || std::is_same_v<Scalar, float>);
  return std::is_same_v<Scalar, double> ? "f64" : "f32";
}

template <typename Scalar>
std::string pack_params(const Vector<Scalar>& v) {
  std::string out(static_cast<std::size_t>(v.size()) * sizeof(Scalar), '\0');
  std::memcpy(out.data(), v.data(), out.size());
  return out;
}

template <typename Scalar>
Vector<Scalar> unpack_params(const std::string& payload, Eigen::Index expected) {
  if (payload.size() != static_cast<std::size_t>(expected) * sizeof(Scalar)) {
    throw Error("checkpoint payload size does not match its header");
  }
  Vector<Scalar> v(expected);
  std::memcpy(v.data(), payload.data(), payload.size());
  return v;
}

template <typename Scalar>
std::string serialize(const NeuralNGram<Scalar>& model, std::uint64_t vocab_hash) {
  CheckpointParts parts;
  const auto& c = model.config();
  parts.header["kind"] = std::string(NeuralNGram<Scalar>::kind());
  parts.header["dtype"] = dtype_name<Scalar>();
  parts.header["vocab_size"] = c.vocab_size;
  parts.header["context"] = c.context;
  parts.header["embedding"] = c.embedding;
  parts.header["hidden"] = c.hidden;
  parts.header["vocab_hash"] = hex64(vocab_hash);
  parts.header["seed"] = c.seed;
  parts.header["num_params"] = model.params().size();
  parts.payload = pack_params(model.params());
  return encode_checkpoint(parts);
}

template <typename Scalar>
std::string serialize(const TabularModel<Scalar>& model, std::uint64_t vocab_hash) {
  CheckpointParts parts;
  parts.header["kind"] = std::string(TabularModel<Scalar>::kind());
  parts.header["dtype"] = dtype_name<Scalar>();
  parts.header["outcomes"] = model.outcomes();
  parts.header["vocab_hash"] = hex64(vocab_hash);
  parts.header["seed"] = 0;
  parts.header["num_params"] = model.params().size();
  parts.payload = pack_params(model.params());
  return encode_checkpoint(parts);
}

template <typename Scalar>
NeuralNGram<Scalar> load_neural_ngram(const std::string& bytes) {
  auto parts = decode_checkpoint(bytes);
  const auto& h = parts.header;
  if (h.at("kind") != "neural-ngram" || h.at("dtype") != dtype_name<Scalar>()) {
    throw Error(std::string("checkpoint is not a ") + dtype_name<Scalar>() + " neural n-gram model");
  }
  NeuralNGramConfig cfg;
  cfg.vocab_size = h.at("vocab_size").get<int>();
  cfg.context = h.at("context").get<int>();
  cfg.embedding = h.at("embedding").get<int>();
  cfg.hidden = h.at("hidden").get<int>();
  cfg.seed = h.at("seed").get<std::uint64_t>();
  NeuralNGram<Scalar> m(cfg);
  const auto n = h.at("num_params").get<Eigen::Index>();
  if (m.params().size() != n) {
    throw Error("checkpoint dimensions disagree with its parameter count");
  }
  m.params() = unpack_params<Scalar>(parts.payload, n);
  return m;
}

template <typename Scalar>
TabularModel<Scalar> load_tabular(const std::string& bytes) {
  auto parts = decode_checkpoint(bytes);
  const auto& h = parts.header;
  if (h.at("kind") != "tabular" || h.at("dtype") != dtype_name<Scalar>()) {
    throw Error(std::string("checkpoint is not a ") + dtype_name<Scalar>() + " tabular model");
  }
  TabularModel<Scalar> m(h.at("outcomes").get<std::vector<std::vector<TokenId>>>());
  m.params() = unpack_params<Scalar>(parts.payload, static_cast<Eigen::Index>(m.num_outcomes()));
  return m;
}

/// Header fields of a checkpoint without its payload.
nlohmann::ordered_json checkpoint_header(const std::string& bytes);

std::uint64_t checkpoint_hash(const std::string& bytes);

} // namespace tcvar

#endif
