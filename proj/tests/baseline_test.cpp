#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcvar/baseline.hpp"
#include "tcvar/corpus.hpp"
#include "tcvar/worst_case.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace tcvar;

namespace {

EncodedSentence sent(std::vector<TokenId> ids) {
  ids.push_back(kEosId);
  return {ids, {}};
}

std::vector<EncodedSentence> random_corpus(int V, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EncodedSentence> out;
  for (int i = 0; i < n; ++i) {
    std::vector<TokenId> ids;
    const int len = 1 + static_cast<int>(rng() % 6);
    for (int t = 0; t < len; ++t) {
      ids.push_back(2 + static_cast<TokenId>(rng() % static_cast<std::uint64_t>(V - 2)));
    }
    out.push_back(sent(ids));
  }
  return out;
}

} // namespace

TEST_CASE("bigram probability follows the interpolation formula") {
  // "a b" repeated n times; a = 2, b = 3, V = 4.
  const int n = 7, V = 4;
  const double k = 0.01, lambda = 0.9;
  std::vector<EncodedSentence> corpus(n, sent({2, 3}));
  const auto m = fit_bigram(corpus, 0, V, k, lambda);
  const double total = 3.0 * n;  // a, b, eos per sentence
  const double unigram_b = (n + k) / (total + k * V);
  CHECK(m.prob(3, 2) == doctest::Approx(lambda * (n + k) / (n + k * V) + (1 - lambda) * unigram_b).epsilon(1e-14));
  CHECK(m.prob_after_bos(2) ==
        doctest::Approx(lambda * (n + k) / (n + k * V) + (1 - lambda) * (n + k) / (total + k * V)).epsilon(1e-14));
  CHECK(m.total_tokens() == 3 * n);
  CHECK(m.bigram_count(2, 3) == n);
  CHECK(m.context_count(m.bos()) == n);
}

TEST_CASE("unseen bigrams keep the smoothing floor") {
  const int V = 10;
  const double k = 0.01, lambda = 0.9;
  const auto m = fit_bigram(random_corpus(V, 20, 1), 0, V, k, lambda);
  const double floor = (1 - lambda) * k / (m.total_tokens() + k * V);
  for (TokenId prev = 0; prev <= V; ++prev) {
    for (TokenId w = 0; w < V; ++w) {
      CHECK(m.prob(w, prev) >= floor);
      CHECK(m.prob(w, prev) > 0.0);
    }
  }
}

TEST_CASE("every context is normalized") {
  const int V = 12;
  const auto m = fit_bigram(random_corpus(V, 50, 2), 3, V);
  for (TokenId prev = 0; prev <= V; ++prev) {
    double s = 0.0;
    for (TokenId w = 0; w < V; ++w) {
      s += m.prob(w, prev);
    }
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("uniform stream over two tokens gives near-uniform conditionals") {
  // V = 2 means only <unk> and <eos>; sentences are i.i.d. uniform draws.
  std::mt19937_64 rng(5);
  std::vector<EncodedSentence> corpus;
  EncodedSentence x;
  for (int t = 0; t < 200000; ++t) {
    const TokenId w = static_cast<TokenId>(rng() % 2);
    x.ids.push_back(w);
    if (w == kEosId) {
      corpus.push_back(x);
      x.ids.clear();
    }
  }
  const auto m = fit_bigram(corpus, 0, 2);
  for (TokenId prev = 0; prev <= 2; ++prev) {
    for (TokenId w = 0; w < 2; ++w) {
      CHECK(std::abs(m.prob(w, prev) - 0.5) < 0.01);
    }
  }
}

TEST_CASE("bigram_nll") {
  SUBCASE("all conditionals 0.5") {
    // lambda weight on a V=2 model fitted to nothing but perfectly balanced data
    std::vector<EncodedSentence> corpus = {{{0, 1}, {}}, {{1}, {}}, {{0, 0, 1}, {}}, {{1}, {}}};
    auto m = fit_bigram(corpus, 0, 2, 1e9, 0.5);  // enormous add-k flattens everything
    const EncodedSentence x{{0, 0, 0, kEosId}, {}};
    CHECK(bigram_nll(m, x) == doctest::Approx(4 * std::log(2.0)).epsilon(1e-6));
  }
  SUBCASE("empty sentence") {
    const auto m = fit_bigram(random_corpus(8, 10, 3), 0, 8);
    CHECK(bigram_nll(m, sent({})) == doctest::Approx(-std::log(m.prob_after_bos(kEosId))));
  }
  SUBCASE("naive product oracle") {
    const int V = 9;
    const auto m = fit_bigram(random_corpus(V, 40, 4), 0, V);
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<TokenId> ids;
      const int len = static_cast<int>(rng() % 8);
      for (int t = 0; t < len; ++t) {
        ids.push_back(static_cast<TokenId>(rng() % (V - 1)) + (t % 3 == 0 ? 0 : 1));
      }
      const auto x = sent(ids);
      double p = 1.0;
      TokenId prev = V;
      for (TokenId w : x.ids) {
        p *= m.prob(w, prev);
        prev = w;
      }
      CHECK(std::abs(bigram_nll(m, x) + std::log(p)) < 1e-10);
    }
  }
}

TEST_CASE("fit_bigram errors") {
  CHECK_THROWS_WITH(fit_bigram({}, 4, 10), "topic 4 has no sentences");
  CHECK_THROWS_AS(fit_bigram(random_corpus(5, 2, 1), 0, 5, 0.0, 0.5), Error);
  CHECK_THROWS_AS(fit_bigram(random_corpus(5, 2, 1), 0, 5, 0.1, 1.0), Error);
}

TEST_CASE("baselined loss") {
  CHECK(baselined_loss(3.25, 3.25).value == 0.0);
  CHECK(baselined_loss(12.0, 9.5).value == 2.5);
  CHECK(baselined_loss(9.5, 12.0).value == -baselined_loss(12.0, 9.5).value);
  CHECK_THROWS_AS(baselined_loss(std::nan(""), 1.0), Error);
  CHECK_THROWS_AS(baselined_loss(1.0, INFINITY), Error);
}

TEST_CASE("expected baselined loss is KL plus a model-independent constant") {
  // Six two-token sentences over a topic with known conditional q.
  const int V = 8;
  std::vector<EncodedSentence> outcomes;
  for (TokenId a = 2; a < 5; ++a) {
    for (TokenId b = 5; b < 7; ++b) {
      outcomes.push_back(sent({a, b}));
    }
  }
  const std::vector<double> q = {0.3, 0.1, 0.25, 0.05, 0.2, 0.1};
  std::vector<EncodedSentence> topic_sample;
  for (std::size_t i = 0; i < 6; ++i) {
    for (int c = 0; c < static_cast<int>(q[i] * 100); ++c) {
      topic_sample.push_back(outcomes[i]);
    }
  }
  const auto baseline = fit_bigram(topic_sample, 0, V);

  std::mt19937_64 rng(9);
  std::optional<double> constant;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(6);
    double s = 0.0;
    for (auto& v : p) {
      v = 0.05 + static_cast<double>(rng() % 1000) / 1000.0;
      s += v;
    }
    double expected_loss = 0.0, kl = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      p[i] /= s;
      expected_loss += q[i] * baselined_loss(-std::log(p[i]), bigram_nll(baseline, outcomes[i])).value;
      kl += q[i] * std::log(q[i] / p[i]);
    }
    if (!constant) {
      constant = expected_loss - kl;
    }
    CHECK(std::abs(expected_loss - kl - *constant) < 1e-9);
  }
}

TEST_CASE("shifting the baseline by a constant leaves the worst case unchanged") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int K = 2 + static_cast<int>(rng() % 5);
    Eigen::VectorXd model_nll(K), base_nll(K), p(K);
    for (int k = 0; k < K; ++k) {
      model_nll(k) = 5.0 + static_cast<double>(rng() % 1000) / 37.0;
      base_nll(k) = 5.0 + static_cast<double>(rng() % 1000) / 41.0;
      p(k) = 0.05 + static_cast<double>(rng() % 100) / 100.0;
    }
    p /= p.sum();
    const double c = 4.25;
    Eigen::VectorXd a(K), b(K);
    for (int k = 0; k < K; ++k) {
      a(k) = baselined_loss(model_nll(k), base_nll(k)).value;
      b(k) = baselined_loss(model_nll(k), base_nll(k) - c).value;
      CHECK(b(k) - a(k) == doctest::Approx(c));
    }
    const auto wa = worst_case_topic_distribution(a, p, 0.3);
    const auto wb = worst_case_topic_distribution(b, p, 0.3);
    CHECK((wa.p_z - wb.p_z).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("baselines save and load per topic") {
  const int V = 7;
  std::vector<TopicSentence> corpus;
  for (const auto& x : random_corpus(V, 30, 8)) {
    corpus.push_back({x, static_cast<TopicId>(corpus.size() % 3)});
  }
  const auto b = fit_baselines(corpus, 3, V);
  const auto dir = std::filesystem::temp_directory_path() / "tcvar_baseline_test";
  std::filesystem::remove_all(dir);
  b.save(dir);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::filesystem::exists(dir / ("baseline.topic" + std::to_string(k))));
  }
  const auto back = BigramBaselines::load(dir, 3);
  for (const auto& ex : corpus) {
    CHECK(back.nll(ex.sentence, ex.topic) == b.nll(ex.sentence, ex.topic));
  }
  CHECK(back.model(1).to_json() == b.model(1).to_json());
}
