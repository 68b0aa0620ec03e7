#include "tcvar/corpus.hpp"

#include "tcvar/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace tcvar {

Vocabulary::Vocabulary() {
  add(std::string(kUnkToken));
  add(std::string(kEosToken));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kUnkToken || tokens[1] != kEosToken) {
    throw Error("vocabulary must start with <unk> and <eos>");
  }
  Vocabulary v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) {
      throw Error("duplicate vocabulary token '" + tokens[i] + "'");
    }
    v.add(tokens[i]);
  }
  return v;
}

TokenId Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, static_cast<TokenId>(tokens_.size()));
  if (inserted) {
    tokens_.push_back(token);
  }
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = fnv1a("");
  for (const auto& t : tokens_) {
    h = fnv1a(t, h);
    h = fnv1a("\n", h);
  }
  return h;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::string body;
  for (const auto& t : tokens_) {
    body += t;
    body += '\n';
  }
  write_file_atomic(path, body);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open vocabulary file " + path.string());
  }
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

namespace {

bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }
bool is_ascii_space(unsigned char c) { return c < 128 && std::isspace(c); }

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) {
      ++n;
    }
  }
  return n;
}

} // namespace

Sentence tokenize(std::string_view text) {
  Sentence out;
  out.surface = std::string(text);
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.tokens.push_back(std::move(cur));
      cur.clear();
    }
  };
  for (unsigned char c : text) {
    if (is_ascii_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      out.tokens.emplace_back(1, static_cast<char>(c));
    } else {
      cur += c < 128 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
    }
  }
  flush();
  return out;
}

std::vector<Sentence> filter_sentences(std::vector<Sentence> sentences) {
  std::erase_if(sentences, [](const Sentence& s) { return utf8_length(s.surface) < kMinSurfaceChars; });
  return sentences;
}

Vocabulary build_vocabulary(const std::vector<std::vector<Sentence>>& corpora, std::size_t top_k) {
  if (top_k == 0) {
    throw Error("top_k must be at least 1");
  }
  std::vector<std::string> selected;
  bool any_token = false;
  for (const auto& corpus : corpora) {
    std::map<std::string, std::size_t> freq;
    for (const auto& s : corpus) {
      for (const auto& t : s.tokens) {
        if (t == kUnkToken || t == kEosToken) {
          continue;
        }
        ++freq[t];
      }
    }
    if (freq.empty()) {
      continue;
    }
    any_token = true;
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    // map iteration is already lexicographic, stable_sort keeps that for ties
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    const std::size_t n = std::min(top_k, ranked.size());
    for (std::size_t i = 0; i < n; ++i) {
      selected.push_back(ranked[i].first);
    }
  }
  if (!any_token) {
    throw Error("empty corpus set");
  }
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  Vocabulary v;
  for (const auto& t : selected) {
    v.add(t);
  }
  return v;
}

EncodedSentence encode(const Sentence& sentence, const Vocabulary& vocab) {
  EncodedSentence out;
  out.ids.reserve(sentence.tokens.size() + 1);
  for (const auto& t : sentence.tokens) {
    out.ids.push_back(vocab.id(t));
  }
  out.ids.push_back(vocab.eos_id());
  out.source_label = sentence.source_label;
  return out;
}

std::vector<EncodedSentence> encode_all(const std::vector<Sentence>& sentences, const Vocabulary& vocab) {
  std::vector<EncodedSentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    out.push_back(encode(s, vocab));
  }
  return out;
}

std::size_t nuisance_count(std::size_t target_count, double alpha_train) {
  if (!(alpha_train > 0.0 && alpha_train <= 1.0)) {
    throw Error("alpha_train must lie in (0, 1]");
  }
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(target_count) * (1.0 - alpha_train) / alpha_train));
}

std::vector<Sentence> mix_corpora(const MixtureSpec& spec) {
  const std::size_t need = nuisance_count(spec.target_count, spec.alpha_train);
  auto target = read_corpus(spec.target_corpus);
  std::vector<Sentence> nuisance;
  if (need > 0) {
    nuisance = read_corpus(spec.nuisance_corpus);
  }
  try {
    return mix_sentences(target, nuisance, spec.alpha_train, spec.target_count, spec.seed,
                         spec.target_label, spec.nuisance_label);
  } catch (const Error& e) {
    const std::string what = e.what();
    const auto& path = what.rfind("target", 0) == 0 ? spec.target_corpus : spec.nuisance_corpus;
    throw Error(what + " (" + path.string() + ")");
  }
}

std::vector<Sentence> read_corpus(const std::filesystem::path& path, std::optional<std::string> label) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open corpus file " + path.string());
  }
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    out.push_back(tokenize(line));
    out.back().source_label = label;
  }
  return out;
}

void write_corpus(const std::filesystem::path& path, const std::vector<Sentence>& sentences) {
  std::string body;
  for (const auto& s : sentences) {
    body += s.surface;
    body += '\n';
  }
  write_file_atomic(path, body);
}

std::string mixture_manifest_json(const MixtureSpec& spec, std::size_t target_used, std::size_t nuisance_used) {
  nlohmann::ordered_json j;
  j["target_corpus"] = spec.target_corpus.string();
  j["nuisance_corpus"] = spec.nuisance_corpus.string();
  j["alpha_train"] = spec.alpha_train;
  j["target_count"] = spec.target_count;
  j["seed"] = spec.seed;
  j["target_label"] = spec.target_label;
  j["nuisance_label"] = spec.nuisance_label;
  j["target_sentences"] = target_used;
  j["nuisance_sentences"] = nuisance_used;
  j["total_sentences"] = target_used + nuisance_used;
  return j.dump(2) + "\n";
}

} // namespace tcvar
