#include "tcvar/synthetic.hpp"

#include "tcvar/topics.hpp"

#include <cmath>

namespace tcvar {

BigramLanguage::BigramLanguage(const BigramLanguageSpec& spec) : spec_(spec) {
  if (spec.num_words < 1 || spec.support < 1 || spec.support > spec.num_words || spec.min_length < 0 ||
      spec.max_length < spec.min_length) {
    throw Error("invalid synthetic language spec");
  }
  std::mt19937_64 rng(spec.seed);
  transitions_ = Eigen::MatrixXd::Zero(spec.num_words + 1, spec.num_words);
  std::vector<int> words(static_cast<std::size_t>(spec.num_words));
  for (int i = 0; i < spec.num_words; ++i) {
    words[static_cast<std::size_t>(i)] = i;
  }
  for (int row = 0; row <= spec.num_words; ++row) {
    // partial Fisher-Yates picks the support
    for (int i = 0; i < spec.support; ++i) {
      const auto j = static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(spec.num_words - i));
      std::swap(words[static_cast<std::size_t>(i)], words[j]);
    }
    double total = 0.0;
    for (int i = 0; i < spec.support; ++i) {
      const double w = -std::log1p(-unit_uniform(rng));
      transitions_(row, words[static_cast<std::size_t>(i)]) = w;
      total += w;
    }
    transitions_.row(row) /= total;
  }
}

double BigramLanguage::transition(int prev, int next) const { return transitions_(prev + 1, next); }

double BigramLanguage::mean_transition_entropy() const {
  double h = 0.0;
  for (Eigen::Index r = 0; r < transitions_.rows(); ++r) {
    for (Eigen::Index c = 0; c < transitions_.cols(); ++c) {
      const double p = transitions_(r, c);
      if (p > 0.0) {
        h -= p * std::log(p);
      }
    }
  }
  return h / static_cast<double>(transitions_.rows());
}

std::vector<EncodedSentence> BigramLanguage::sample(std::size_t count, std::mt19937_64& rng,
                                                    const std::string& label) const {
  std::vector<EncodedSentence> out;
  out.reserve(count);
  const auto span = static_cast<std::uint64_t>(spec_.max_length - spec_.min_length + 1);
  for (std::size_t s = 0; s < count; ++s) {
    const int len = spec_.min_length + static_cast<int>(rng() % span);
    EncodedSentence x;
    x.ids.reserve(static_cast<std::size_t>(len) + 1);
    int prev = -1;
    for (int t = 0; t < len; ++t) {
      double u = unit_uniform(rng);
      int next = spec_.num_words - 1;
      for (int w = 0; w < spec_.num_words; ++w) {
        u -= transitions_(prev + 1, w);
        if (u < 0.0) {
          next = w;
          break;
        }
      }
      x.ids.push_back(next + 2);
      prev = next;
    }
    x.ids.push_back(kEosId);
    x.source_label = label;
    out.push_back(std::move(x));
  }
  return out;
}

Vocabulary synthetic_vocabulary(int num_words) {
  Vocabulary v;
  for (int i = 0; i < num_words; ++i) {
    v.add("w" + std::to_string(i));
  }
  return v;
}

SyntheticShiftData make_synthetic_shift(const SyntheticShiftSpec& spec) {
  BigramLanguage target(spec.target);
  BigramLanguage nuisance(spec.nuisance);
  if (spec.target.num_words != spec.num_words || spec.nuisance.num_words != spec.num_words) {
    throw Error("synthetic languages must share the vocabulary size");
  }
  SyntheticShiftData d;
  d.vocab = synthetic_vocabulary(spec.num_words);
  std::mt19937_64 rng(spec.seed);
  d.target_train = target.sample(spec.target_train, rng, "target");
  d.nuisance_train = nuisance.sample(spec.nuisance_train, rng, "nuisance");
  d.target_test = target.sample(spec.target_test, rng, "target");
  return d;
}

} // namespace tcvar
