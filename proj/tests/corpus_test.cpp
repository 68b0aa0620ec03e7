#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcvar/corpus.hpp"
#include "tcvar/io.hpp"

#include <filesystem>
#include <map>
#include <random>

using namespace tcvar;

namespace {

std::vector<std::string> toks(std::string_view s) { return tokenize(s).tokens; }

std::vector<Sentence> lines(std::initializer_list<std::string_view> ls) {
  std::vector<Sentence> out;
  for (auto l : ls) {
    out.push_back(tokenize(l));
  }
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "tcvar_corpus_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

} // namespace

TEST_CASE("tokenize splits punctuation and lowercases") {
  CHECK(toks("Great food, great prices!") == std::vector<std::string>{"great", "food", ",", "great", "prices", "!"});
  CHECK(toks("").empty());
  CHECK(toks("A  B") == std::vector<std::string>{"a", "b"});
  CHECK(toks("  \t ").empty());
}

TEST_CASE("filter keeps surface length >= 10") {
  auto kept = filter_sentences(lines({"hi there", "this is long enough"}));
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].surface == "this is long enough");
  CHECK(filter_sentences({}).empty());
  CHECK(filter_sentences(lines({"0123456789"})).size() == 1);
  CHECK(filter_sentences(lines({"012345678"})).empty());
}

TEST_CASE("filter preserves order") {
  auto kept = filter_sentences(lines({"first long sentence", "no", "second long sentence", "third one here"}));
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].surface == "first long sentence");
  CHECK(kept[2].surface == "third one here");
}

TEST_CASE("build_vocabulary") {
  SUBCASE("three distinct tokens") {
    auto v = build_vocabulary({lines({"x y z"})}, 10);
    CHECK(v.size() == 5);
  }
  SUBCASE("frequency order") {
    auto v = build_vocabulary({lines({"a a a a a b b b c"})}, 2);
    CHECK(v.size() == 4);
    CHECK(v.contains("a"));
    CHECK(v.contains("b"));
    CHECK_FALSE(v.contains("c"));
  }
  SUBCASE("ties broken lexicographically") {
    auto v = build_vocabulary({lines({"q p r"})}, 2);
    CHECK(v.contains("p"));
    CHECK(v.contains("q"));
    CHECK_FALSE(v.contains("r"));
  }
  SUBCASE("union bound with a shared top token") {
    auto v = build_vocabulary({lines({"the the the cat dog"}), lines({"the the the bank loan"})}, 2);
    CHECK(v.size() <= 2 * 2 + 2);
    CHECK(v.contains("the"));
  }
  SUBCASE("empty corpora") {
    CHECK_THROWS_WITH(build_vocabulary({{}, {}}, 5), "empty corpus set");
  }
}

TEST_CASE("vocabulary invariants and round trip") {
  auto v = build_vocabulary({lines({"one two three four five six", "two three"})}, 100);
  CHECK(v.token(kUnkId) == "<unk>");
  CHECK(v.token(kEosId) == "<eos>");
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(v.id(v.tokens()[i]) == static_cast<TokenId>(i));
  }
  const auto path = scratch("vocab.txt");
  v.save(path);
  auto w = Vocabulary::load(path);
  CHECK(w.tokens() == v.tokens());
  CHECK(w.fingerprint() == v.fingerprint());
  CHECK(read_file(path).substr(0, 12) == "<unk>\n<eos>\n");
}

TEST_CASE("encode") {
  Vocabulary v;
  const auto great = v.add("great");
  Sentence s{{"great", "zyxq"}, "yelp", "great zyxq"};
  auto e = encode(s, v);
  CHECK(e.ids == std::vector<TokenId>{great, kUnkId, kEosId});
  CHECK(e.source_label == std::optional<std::string>("yelp"));
  CHECK(encode(Sentence{}, v).ids == std::vector<TokenId>{kEosId});
  auto known = encode(Sentence{{"great", "great"}, {}, ""}, v);
  CHECK(std::count(known.ids.begin(), known.ids.end(), kUnkId) == 0);
}

TEST_CASE("encoded sentences end in exactly one eos") {
  auto corpus = lines({"a b c d e f g h", "b b b", "", "z y x w"});
  auto v = build_vocabulary({corpus}, 3);
  for (const auto& e : encode_all(corpus, v)) {
    CHECK(std::count(e.ids.begin(), e.ids.end(), kEosId) == 1);
    CHECK(e.ids.back() == kEosId);
    for (auto id : e.ids) {
      CHECK(id < static_cast<TokenId>(v.size()));
    }
  }
}

TEST_CASE("nuisance count") {
  CHECK(nuisance_count(500000, 0.1) == 4500000);
  CHECK(nuisance_count(500000, 1.0) == 0);
  CHECK(nuisance_count(100, 0.5) == 100);
  CHECK(nuisance_count(5000, 0.7) == 2143);
}

TEST_CASE("mix_corpora") {
  std::vector<Sentence> target, nuisance;
  for (int i = 0; i < 150; ++i) {
    target.push_back(tokenize("target sentence " + std::to_string(i)));
    nuisance.push_back(tokenize("nuisance sentence " + std::to_string(i)));
  }
  write_corpus(scratch("t.txt"), target);
  write_corpus(scratch("n.txt"), nuisance);
  MixtureSpec spec{scratch("t.txt"), scratch("n.txt"), 0.5, 100, 42};
  auto mixed = mix_corpora(spec);
  REQUIRE(mixed.size() == 200);
  std::map<std::string, int> counts;
  for (const auto& s : mixed) {
    counts[*s.source_label]++;
  }
  CHECK(counts["target"] == 100);
  CHECK(counts["nuisance"] == 100);

  SUBCASE("alpha 1 takes no nuisance") {
    spec.alpha_train = 1.0;
    auto only = mix_corpora(spec);
    CHECK(only.size() == 100);
    for (const auto& s : only) {
      CHECK(*s.source_label == "target");
    }
  }
  SUBCASE("shortfall names the corpus") {
    spec.alpha_train = 0.25;
    CHECK_THROWS_WITH(mix_corpora(spec), doctest::Contains("nuisance corpus has 150 sentences, short by 150 ("));
    spec.alpha_train = 1.0;
    spec.target_count = 160;
    CHECK_THROWS_WITH(mix_corpora(spec), doctest::Contains("target corpus has 150 sentences, short by 10 ("));
  }
  SUBCASE("deterministic given seed") {
    auto again = mix_corpora(spec);
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      CHECK(again[i].surface == mixed[i].surface);
    }
    spec.seed = 43;
    auto other = mix_corpora(spec);
    bool differs = false;
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      differs |= other[i].surface != mixed[i].surface;
    }
    CHECK(differs);
  }
  SUBCASE("manifest records counts") {
    auto j = mixture_manifest_json(spec, 100, 100);
    CHECK(j.find("\"alpha_train\"") != std::string::npos);
    CHECK(j.find("\"seed\": 42") != std::string::npos);
  }
}

TEST_CASE("mixture proportion property") {
  std::mt19937_64 rng(5);
  std::vector<EncodedSentence> target(400), nuisance(4000);
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = 0.1 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0;
    const std::size_t n = 1 + rng() % 300;
    auto mixed = mix_sentences(target, nuisance, alpha, n, rng());
    const auto t = static_cast<double>(std::count_if(mixed.begin(), mixed.end(),
                                                     [](const auto& s) { return *s.source_label == "target"; }));
    CHECK(std::abs(t - alpha * static_cast<double>(mixed.size())) <= 1.0);
  }
}

TEST_CASE("corpus files round trip") {
  auto corpus = lines({"Hello, world of text", "second line here"});
  write_corpus(scratch("rt.txt"), corpus);
  auto back = read_corpus(scratch("rt.txt"), "lbl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].tokens == corpus[0].tokens);
  CHECK(*back[1].source_label == "lbl");
  CHECK_THROWS_AS(read_corpus(scratch("missing.txt")), Error);
}
