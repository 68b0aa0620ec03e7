#include "tcvar/checkpoint.hpp"

namespace tcvar {

namespace {
constexpr std::string_view kMagic = "TCVAR-CHECKPOINT 1\n";
}

std::string encode_checkpoint(const CheckpointParts& parts) {
  std::string out(kMagic);
  out += parts.header.dump();
  out += '\n';
  out += parts.payload;
  return out;
}

CheckpointParts decode_checkpoint(const std::string& bytes) {
  if (bytes.compare(0, kMagic.size(), kMagic) != 0) {
    throw Error("not a checkpoint file");
  }
  const auto eol = bytes.find('\n', kMagic.size());
  if (eol == std::string::npos) {
    throw Error("truncated checkpoint header");
  }
  CheckpointParts parts;
  parts.header = nlohmann::ordered_json::parse(bytes.substr(kMagic.size(), eol - kMagic.size()));
  parts.payload = bytes.substr(eol + 1);
  return parts;
}

nlohmann::ordered_json checkpoint_header(const std::string& bytes) { return decode_checkpoint(bytes).header; }

std::uint64_t checkpoint_hash(const std::string& bytes) { return fnv1a(bytes); }

} // namespace tcvar
