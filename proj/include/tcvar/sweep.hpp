#ifndef TCVAR_SWEEP_HPP
#define TCVAR_SWEEP_HPP

#include "tcvar/checkpoint.hpp"
#include "tcvar/eval.hpp"
#include "tcvar/io.hpp"
#include "tcvar/topics.hpp"
#include "tcvar/trainer.hpp"

#include <filesystem>
#include <optional>

namespace tcvar {

enum class TopicSource { Oracle, Lda };

struct SweepSpec {
  std::vector<double> alpha_train_grid;
  std::vector<Objective> objectives;
  DroConfig base;                    // objective and alpha are set per cell
  std::optional<double> fixed_alpha;  // robust cells use this instead of alpha_train
  std::size_t target_count = 0;
  std::uint64_t mix_seed = 0;
  TopicSource topics = TopicSource::Oracle;
  LdaOptions lda;
  double baseline_add_k = BigramModel::kDefaultAddK;
  double baseline_lambda = BigramModel::kDefaultLambda;
  std::optional<std::filesystem::path> checkpoint_dir;
};

struct SweepRow {
  double alpha_train = 1.0;
  Objective objective = Objective::Mle;
  double alpha = 1.0;  // alpha actually used by the trainer
  double perplexity = 0.0;
  std::uint64_t seed = 0;
  std::string checkpoint;  // hex hash of the serialized model
};

struct SweepResult {
  std::vector<SweepRow> rows;

  /// Header: alpha_train,objective,alpha,perplexity,seed,checkpoint
  std::string to_csv() const;
  const SweepRow& find(double alpha_train, Objective objective) const;
};

struct SweepData {
  std::span<const EncodedSentence> target_train;
  std::span<const EncodedSentence> nuisance_train;
  std::span<const EncodedSentence> target_test;
  int vocab_size = 0;
  std::uint64_t vocab_hash = 0;
};

/// Topic-labelled training set for one mixture cell.
std::pair<std::vector<TopicSentence>, int> label_topics(const std::vector<EncodedSentence>& mixture, int vocab_size,
                                                        TopicSource source, const LdaOptions& lda);

/// One training run: label topics, fit baselines if needed, train a fresh
/// model from `make_model`, and return the trained model.
template <typename Factory>
auto train_cell(const SweepSpec& spec, const SweepData& data, double alpha_train, Objective objective,
                Factory&& make_model, double* alpha_used = nullptr) {
  const auto mixture = mix_sentences(std::vector<EncodedSentence>(data.target_train.begin(), data.target_train.end()),
                                     std::vector<EncodedSentence>(data.nuisance_train.begin(), data.nuisance_train.end()),
                                     alpha_train, spec.target_count, spec.mix_seed);
  auto [labelled, K] = label_topics(mixture, data.vocab_size, spec.topics, spec.lda);
  std::optional<BigramBaselines> baselines;
  if (objective == Objective::TopicCvar) {
    baselines = fit_baselines(labelled, K, data.vocab_size, spec.baseline_add_k, spec.baseline_lambda);
  }
  DroConfig cfg = spec.base;
  cfg.objective = objective;
  cfg.alpha = spec.fixed_alpha.value_or(alpha_train);
  auto model = make_model();
  const auto log = train(cfg, labelled, model, baselines ? &*baselines : nullptr, K);
  if (alpha_used) {
    *alpha_used = log.effective_alpha;
  }
  return model;
}

/// Trains one model per (alpha_train, objective) cell on the target/nuisance
/// mixture and reports its perplexity on the held-out target sentences.
template <typename Factory>
SweepResult subpopulation_sweep(const SweepSpec& spec, const SweepData& data, Factory&& make_model) {
  if (spec.alpha_train_grid.empty() || spec.objectives.empty()) {
    throw Error("sweep grids must be nonempty");
  }
  SweepResult result;
  for (double alpha_train : spec.alpha_train_grid) {
    for (Objective objective : spec.objectives) {
      try {
        double alpha_used = 1.0;
        const auto model = train_cell(spec, data, alpha_train, objective, make_model, &alpha_used);
        const auto report = perplexity(model, data.target_test, "target_test");
        const auto bytes = serialize(model, data.vocab_hash);
        const auto hash = hex64(checkpoint_hash(bytes));
        if (spec.checkpoint_dir) {
          std::filesystem::create_directories(*spec.checkpoint_dir);
          write_file_atomic(*spec.checkpoint_dir / (hash + ".ckpt"), bytes);
        }
        result.rows.push_back({alpha_train, objective, alpha_used, report.perplexity, spec.base.seed, hash});
      } catch (const Error& e) {
        throw Error("sweep cell alpha_train=" + format_double(alpha_train) + " objective=" + to_string(objective) +
                    ": " + e.what());
      }
    }
  }
  return result;
}

} // namespace tcvar

#endif
