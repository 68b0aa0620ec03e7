// Command-line driver: vocabulary, mixtures, clustering, training,
// evaluation, the six-sentence toy and the subpopulation-shift sweep.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include "tcvar/baseline.hpp"
#include "tcvar/checkpoint.hpp"
#include "tcvar/corpus.hpp"
#include "tcvar/eval.hpp"
#include "tcvar/io.hpp"
#include "tcvar/sweep.hpp"
#include "tcvar/synthetic.hpp"
#include "tcvar/topics.hpp"
#include "tcvar/toy.hpp"
#include "tcvar/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <iostream>
#include <set>

namespace {

using namespace tcvar;
using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Run manifest shared by every command.
class Manifest {
public:
  Manifest(CLI::App* cmd, int argc, char** argv) : cmd_(cmd) {
    j_["command"] = cmd->get_name();
    auto args = json::array();
    for (int i = 0; i < argc; ++i) {
      args.push_back(argv[i]);
    }
    j_["argv"] = std::move(args);
    j_["started"] = utc_now();
  }

  void input(const std::filesystem::path& p) { inputs_[p.string()] = hex64(fnv1a(read_file(p))); }
  void output(const std::filesystem::path& p) { outputs_.push_back(p.string()); }
  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

  void write(const std::filesystem::path& path) {
    json config = json::object();
    for (const CLI::Option* opt : cmd_->get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "config" || opt->get_lnames().empty()) {
        continue;
      }
      if (opt->get_type_size() == 0) {
        config[name] = opt->count() > 0;
      } else if (opt->count() > 0) {
        const auto& r = opt->results();
        if (opt->get_expected_max() > 1) {
          config[name] = r;
        } else {
          config[name] = r.back();
        }
      } else if (!opt->get_default_str().empty()) {
        config[name] = opt->get_default_str();
      }
    }
    j_["config"] = std::move(config);
    j_["seeds"] = seeds_;
    j_["inputs"] = inputs_;
    j_["outputs"] = outputs_;
    j_["finished"] = utc_now();
    write_file_atomic(path, j_.dump(2) + "\n");
  }

private:
  CLI::App* cmd_;
  json j_;
  json seeds_ = json::object();
  json inputs_ = json::object();
  std::vector<std::string> outputs_;
};

std::filesystem::path manifest_path(const std::filesystem::path& out) {
  auto p = out;
  p += ".manifest.json";
  return p;
}

// --config <manifest>: settings from the manifest's "config" object are
// appended for every option not already on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) {
    return args;
  }
  const auto manifest = nlohmann::json::parse(read_file(config_path));
  if (!manifest.contains("config")) {
    throw UsageError("config file " + config_path + " has no \"config\" object");
  }
  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) {
      given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    }
  }
  for (const auto& [key, value] : manifest["config"].items()) {
    if (given.count(key)) {
      continue;
    }
    if (value.is_boolean()) {
      if (value.get<bool>()) {
        args.push_back("--" + key);
      }
    } else if (value.is_array()) {
      args.push_back("--" + key);
      for (const auto& v : value) {
        args.push_back(v.get<std::string>());
      }
    } else {
      args.push_back("--" + key);
      args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return args;
}

std::vector<TopicSentence> with_topics(const std::vector<EncodedSentence>& corpus,
                                       const std::vector<TopicAssignment>& topics) {
  if (topics.size() != corpus.size()) {
    throw Error("topic file has " + std::to_string(topics.size()) + " rows but the corpus has " +
                std::to_string(corpus.size()) + " sentences");
  }
  std::vector<TopicSentence> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (topics[i].sentence_index != i) {
      throw Error("topic file rows must list sentences in order");
    }
    out.push_back({corpus[i], topics[i].topic_id});
  }
  return out;
}

std::vector<std::vector<TokenId>> distinct_outcomes(const std::vector<EncodedSentence>& corpus) {
  std::set<std::vector<TokenId>> s;
  for (const auto& x : corpus) {
    s.insert(x.ids);
  }
  return {s.begin(), s.end()};
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::vector<std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      out.push_back(line);
    }
  }
  return out;
}

// Calls f with whichever model type the checkpoint holds.
template <typename F>
void with_checkpoint(const std::string& bytes, F&& f) {
  const auto h = checkpoint_header(bytes);
  const std::string kind = h.at("kind");
  const std::string dtype = h.at("dtype");
  if (kind == "tabular" && dtype == "f64") {
    f(load_tabular<double>(bytes));
  } else if (kind == "tabular" && dtype == "f32") {
    f(load_tabular<float>(bytes));
  } else if (kind == "neural-ngram" && dtype == "f64") {
    f(load_neural_ngram<double>(bytes));
  } else if (kind == "neural-ngram" && dtype == "f32") {
    f(load_neural_ngram<float>(bytes));
  } else {
    throw Error("unsupported checkpoint kind " + kind + "/" + dtype);
  }
}

void check_vocab_hash(const std::string& bytes, const Vocabulary& vocab) {
  if (checkpoint_header(bytes).at("vocab_hash") != hex64(vocab.fingerprint())) {
    throw Error("checkpoint was trained with a different vocabulary");
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic-CVaR language model training"};
  app.require_subcommand(1);
  std::string config_file;

  // build-vocab
  auto* vocab_cmd = app.add_subcommand("build-vocab", "Joint vocabulary from the top-k words of each corpus");
  std::vector<std::string> vocab_corpora;
  std::size_t top_k = 10000;
  std::string vocab_out;
  vocab_cmd->add_option("--corpus", vocab_corpora, "Corpus files, one sentence per line")->required();
  vocab_cmd->add_option("--top-k", top_k, "Words kept per corpus")->capture_default_str();
  vocab_cmd->add_option("--out", vocab_out, "Vocabulary file")->required();
  vocab_cmd->add_option("--config", config_file, "Manifest to take settings from");

  // mix
  auto* mix_cmd = app.add_subcommand("mix", "Mix a target corpus with nuisance sentences");
  MixtureSpec mix;
  std::string mix_target, mix_nuisance, mix_out;
  mix_cmd->add_option("--target", mix_target)->required();
  mix_cmd->add_option("--nuisance", mix_nuisance)->required();
  mix_cmd->add_option("--alpha-train", mix.alpha_train, "Target fraction of the mixture")->capture_default_str();
  mix_cmd->add_option("--target-count", mix.target_count)->required();
  mix_cmd->add_option("--seed", mix.seed)->capture_default_str();
  mix_cmd->add_option("--target-label", mix.target_label)->capture_default_str();
  mix_cmd->add_option("--nuisance-label", mix.nuisance_label)->capture_default_str();
  mix_cmd->add_option("--out", mix_out, "Mixed corpus; labels go to <out>.labels")->required();
  mix_cmd->add_option("--config", config_file);

  // cluster
  auto* cluster_cmd = app.add_subcommand("cluster", "Assign a topic to every sentence");
  std::string cluster_corpus, cluster_vocab, cluster_out, cluster_labels;
  LdaOptions lda;
  cluster_cmd->add_option("--corpus", cluster_corpus)->required();
  cluster_cmd->add_option("--vocab", cluster_vocab);
  cluster_cmd->add_option("--k", lda.num_topics)->capture_default_str();
  cluster_cmd->add_option("--alpha-prior", lda.alpha_prior)->capture_default_str();
  cluster_cmd->add_option("--beta-prior", lda.beta_prior)->capture_default_str();
  cluster_cmd->add_option("--iters", lda.iterations)->capture_default_str();
  cluster_cmd->add_option("--seed", lda.seed)->capture_default_str();
  cluster_cmd->add_option("--oracle-labels", cluster_labels, "Per-sentence corpus labels; skips LDA");
  cluster_cmd->add_option("--out", cluster_out, "Topic assignment TSV")->required();
  cluster_cmd->add_option("--config", config_file);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a language model");
  DroConfig dro;
  dro.lr = 0.01;
  dro.batch_size = 500;
  std::string objective_name = "topic-cvar", model_kind = "neural-ngram", precision = "f32";
  std::string train_corpus, train_vocab, train_topics, train_out, train_log, baselines_in, baselines_out;
  NeuralNGramConfig ngram;
  double add_k = BigramModel::kDefaultAddK, lambda = BigramModel::kDefaultLambda;
  bool exact_prior = false;
  train_cmd->add_option("--corpus", train_corpus)->required();
  train_cmd->add_option("--vocab", train_vocab)->required();
  train_cmd->add_option("--topics", train_topics, "Topic assignment TSV")->required();
  train_cmd->add_option("--objective", objective_name)
      ->check(CLI::IsMember({"mle", "topic-cvar", "topic-cvar-logloss", "sentence-cvar"}))
      ->capture_default_str();
  auto* alpha_opt = train_cmd->add_option("--alpha", dro.alpha)->capture_default_str();
  train_cmd->add_option("--alpha-floor", dro.alpha_floor, "Smaller alphas are raised to this; 0 disables")
      ->capture_default_str();
  train_cmd->add_option("--lr", dro.lr)->capture_default_str();
  train_cmd->add_option("--batch-size", dro.batch_size)->capture_default_str();
  train_cmd->add_option("--steps", dro.steps)->capture_default_str();
  train_cmd->add_option("--ewma-decay", dro.ewma_decay)->capture_default_str();
  train_cmd->add_option("--min-ratio", dro.min_ratio)->capture_default_str();
  train_cmd->add_option("--seed", dro.seed)->capture_default_str();
  train_cmd->add_flag("--exact-prior", exact_prior, "Use corpus topic frequencies instead of the streaming estimate");
  train_cmd->add_option("--model", model_kind)->check(CLI::IsMember({"tabular", "neural-ngram"}))->capture_default_str();
  train_cmd->add_option("--precision", precision, "Neural parameter storage")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();
  train_cmd->add_option("--context", ngram.context)->capture_default_str();
  train_cmd->add_option("--embedding", ngram.embedding)->capture_default_str();
  train_cmd->add_option("--hidden", ngram.hidden)->capture_default_str();
  train_cmd->add_option("--add-k", add_k, "Baseline smoothing")->capture_default_str();
  train_cmd->add_option("--lambda", lambda, "Baseline interpolation weight")->capture_default_str();
  train_cmd->add_option("--baselines", baselines_in, "Directory of fitted baseline.topic<k> files");
  train_cmd->add_option("--save-baselines", baselines_out, "Write fitted baselines here");
  train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
  train_cmd->add_option("--log", train_log, "Training log CSV (default <out>.log.csv)");
  train_cmd->add_option("--config", config_file);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Perplexity report for a checkpoint");
  std::string eval_ckpt, eval_corpus, eval_vocab, eval_topics, eval_baselines, eval_out, eval_name;
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
  eval_cmd->add_option("--corpus", eval_corpus)->required();
  eval_cmd->add_option("--vocab", eval_vocab)->required();
  eval_cmd->add_option("--topics", eval_topics, "Topic TSV for per-topic statistics");
  eval_cmd->add_option("--baselines", eval_baselines, "Baseline directory for baselined losses");
  eval_cmd->add_option("--name", eval_name, "Corpus name in the report");
  eval_cmd->add_option("--out", eval_out, "EvalReport JSON")->required();
  eval_cmd->add_option("--config", config_file);

  // scatter
  auto* scatter_cmd = app.add_subcommand("scatter", "Per-sentence losses of two checkpoints");
  std::string scatter_a, scatter_b, scatter_corpus, scatter_vocab, scatter_labels, scatter_out;
  scatter_cmd->add_option("--a", scatter_a)->required();
  scatter_cmd->add_option("--b", scatter_b)->required();
  scatter_cmd->add_option("--corpus", scatter_corpus)->required();
  scatter_cmd->add_option("--vocab", scatter_vocab)->required();
  scatter_cmd->add_option("--labels", scatter_labels, "Per-sentence source labels");
  scatter_cmd->add_option("--out", scatter_out)->required();
  scatter_cmd->add_option("--config", config_file);

  // toy
  auto* toy_cmd = app.add_subcommand("toy", "Six-sentence toy: all four objectives");
  ToyOptions toy_opts;
  toy_opts.lr = 0.05;
  toy_opts.steps = 20000;
  toy_opts.batch_size = 500;
  std::string toy_out;
  toy_cmd->add_option("--alpha", toy_opts.alpha)->capture_default_str();
  toy_cmd->add_option("--sentence-alpha", toy_opts.sentence_alpha)->capture_default_str();
  toy_cmd->add_option("--lr", toy_opts.lr)->capture_default_str();
  toy_cmd->add_option("--steps", toy_opts.steps)->capture_default_str();
  toy_cmd->add_option("--batch-size", toy_opts.batch_size)->capture_default_str();
  toy_cmd->add_option("--ewma-decay", toy_opts.ewma_decay)->capture_default_str();
  toy_cmd->add_option("--min-ratio", toy_opts.min_ratio)->capture_default_str();
  toy_cmd->add_option("--seed", toy_opts.seed)->capture_default_str();
  toy_cmd->add_option("--out", toy_out, "Report JSON")->required();
  toy_cmd->add_option("--config", config_file);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Subpopulation-shift sweep over alpha_train and objectives");
  SweepSpec sweep;
  sweep.alpha_train_grid = {1.0, 0.7, 0.4, 0.2, 0.1};
  sweep.base.lr = 0.2;
  sweep.base.steps = 1500;
  sweep.base.batch_size = 64;
  sweep.base.seed = 3;
  sweep.target_count = 5000;
  sweep.mix_seed = 5;
  std::vector<std::string> sweep_objectives = {"mle", "topic-cvar"};
  std::string sweep_out, sweep_target, sweep_nuisance, sweep_test, sweep_vocab, sweep_topics = "oracle",
                         sweep_ckpt_dir, sweep_precision = "f32";
  double sweep_fixed_alpha = 0.0;
  std::uint64_t data_seed = 7, model_seed = 9;
  sweep_cmd->add_option("--grid", sweep.alpha_train_grid, "alpha_train values")->capture_default_str();
  sweep_cmd->add_option("--objectives", sweep_objectives)->capture_default_str();
  sweep_cmd->add_option("--fixed-alpha", sweep_fixed_alpha, "Use this alpha for every robust cell");
  sweep_cmd->add_option("--alpha-floor", sweep.base.alpha_floor)->capture_default_str();
  sweep_cmd->add_option("--lr", sweep.base.lr)->capture_default_str();
  sweep_cmd->add_option("--steps", sweep.base.steps)->capture_default_str();
  sweep_cmd->add_option("--batch-size", sweep.base.batch_size)->capture_default_str();
  sweep_cmd->add_option("--ewma-decay", sweep.base.ewma_decay)->capture_default_str();
  sweep_cmd->add_option("--min-ratio", sweep.base.min_ratio)->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.base.seed, "Training seed")->capture_default_str();
  sweep_cmd->add_option("--mix-seed", sweep.mix_seed)->capture_default_str();
  sweep_cmd->add_option("--model-seed", model_seed)->capture_default_str();
  sweep_cmd->add_option("--data-seed", data_seed, "Seed of the synthetic languages")->capture_default_str();
  sweep_cmd->add_option("--target-count", sweep.target_count)->capture_default_str();
  sweep_cmd->add_option("--topics", sweep_topics)->check(CLI::IsMember({"oracle", "lda"}))->capture_default_str();
  sweep_cmd->add_option("--k", sweep.lda.num_topics)->capture_default_str();
  sweep_cmd->add_option("--precision", sweep_precision)->check(CLI::IsMember({"f32", "f64"}))->capture_default_str();
  sweep_cmd->add_option("--target", sweep_target, "Target training corpus (default: synthetic)");
  sweep_cmd->add_option("--nuisance", sweep_nuisance);
  sweep_cmd->add_option("--test", sweep_test, "Held-out target corpus");
  sweep_cmd->add_option("--vocab", sweep_vocab);
  sweep_cmd->add_option("--checkpoint-dir", sweep_ckpt_dir);
  sweep_cmd->add_option("--out", sweep_out, "SweepResult CSV")->required();
  sweep_cmd->add_option("--config", config_file);

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*vocab_cmd) {
      if (top_k < 1) {
        throw UsageError("--top-k must be at least 1");
      }
      OutputLock lock(vocab_out);
      Manifest m(vocab_cmd, argc, argv);
      std::vector<std::vector<Sentence>> corpora;
      for (const auto& c : vocab_corpora) {
        corpora.push_back(filter_sentences(read_corpus(c)));
        m.input(c);
      }
      const auto vocab = build_vocabulary(corpora, top_k);
      vocab.save(vocab_out);
      m.output(vocab_out);
      m.write(manifest_path(vocab_out));
      std::cout << "vocabulary: " << vocab.size() << " tokens -> " << vocab_out << "\n";
    } else if (*mix_cmd) {
      if (!(mix.alpha_train > 0.0 && mix.alpha_train <= 1.0)) {
        throw UsageError("--alpha-train must lie in (0, 1]");
      }
      mix.target_corpus = mix_target;
      mix.nuisance_corpus = mix_nuisance;
      OutputLock lock(mix_out);
      Manifest m(mix_cmd, argc, argv);
      m.seed("mix", mix.seed);
      const auto need = nuisance_count(mix.target_count, mix.alpha_train);
      auto target = filter_sentences(read_corpus(mix.target_corpus));
      auto nuisance = need > 0 ? filter_sentences(read_corpus(mix.nuisance_corpus)) : std::vector<Sentence>{};
      m.input(mix.target_corpus);
      if (need > 0) {
        m.input(mix.nuisance_corpus);
      }
      std::vector<Sentence> mixed;
      try {
        mixed = mix_sentences(target, nuisance, mix.alpha_train, mix.target_count, mix.seed, mix.target_label,
                              mix.nuisance_label);
      } catch (const Error& e) {
        const std::string what = e.what();
        throw Error(what + " (" + (what.rfind("target", 0) == 0 ? mix_target : mix_nuisance) + ")");
      }
      std::string labels;
      for (const auto& s : mixed) {
        labels += s.source_label.value_or("") + "\n";
      }
      const std::filesystem::path labels_path = mix_out + ".labels";
      const std::filesystem::path mix_manifest = mix_out + ".mixture.json";
      write_corpus(mix_out, mixed);
      write_file_atomic(labels_path, labels);
      write_file_atomic(mix_manifest, mixture_manifest_json(mix, mix.target_count, need));
      m.output(mix_out);
      m.output(labels_path);
      m.output(mix_manifest);
      m.write(manifest_path(mix_out));
      std::cout << "mixture: " << mix.target_count << " target + " << need << " nuisance -> " << mix_out << "\n";
    } else if (*cluster_cmd) {
      OutputLock lock(cluster_out);
      Manifest m(cluster_cmd, argc, argv);
      m.input(cluster_corpus);
      const auto sentences = read_corpus(cluster_corpus);
      int K = 0;
      std::vector<TopicAssignment> assignments;
      if (!cluster_labels.empty()) {
        m.input(cluster_labels);
        const auto labels = read_lines(cluster_labels);
        if (labels.size() != sentences.size()) {
          throw Error("label file has " + std::to_string(labels.size()) + " lines for " +
                      std::to_string(sentences.size()) + " sentences");
        }
        auto oracle = load_oracle_topics(labels);
        K = oracle.num_topics;
        assignments = std::move(oracle.assignments);
      } else {
        if (cluster_vocab.empty()) {
          throw UsageError("cluster needs --vocab unless --oracle-labels is given");
        }
        m.input(cluster_vocab);
        m.seed("lda", lda.seed);
        const auto vocab = Vocabulary::load(cluster_vocab);
        const auto encoded = encode_all(sentences, vocab);
        const auto state = fit_lda(encoded, static_cast<int>(vocab.size()), lda);
        K = lda.num_topics;
        assignments = assign_topics(state);
      }
      write_topic_assignments(cluster_out, K, assignments);
      m.output(cluster_out);
      m.write(manifest_path(cluster_out));
      std::cout << "topics: K=" << K << " for " << assignments.size() << " sentences -> " << cluster_out << "\n";
    } else if (*train_cmd) {
      dro.objective = parse_objective(objective_name);
      if (dro.objective == Objective::Mle && alpha_opt->count() > 0) {
        std::cerr << "warning: --alpha is ignored by the mle objective\n";
      }
      if (!baselines_in.empty() && !baselines_out.empty()) {
        throw UsageError("--baselines and --save-baselines are mutually exclusive");
      }
      try {
        dro.validate();
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      if (train_log.empty()) {
        train_log = train_out + ".log.csv";
      }
      OutputLock lock(train_out);
      Manifest m(train_cmd, argc, argv);
      m.seed("train", dro.seed);
      m.input(train_corpus);
      m.input(train_vocab);
      m.input(train_topics);
      const auto vocab = Vocabulary::load(train_vocab);
      const auto corpus = encode_all(read_corpus(train_corpus), vocab);
      const auto [K, assignments] = read_topic_assignments(train_topics);
      const auto labelled = with_topics(corpus, assignments);
      if (exact_prior) {
        dro.topic_prior.assign(static_cast<std::size_t>(K), 0.0);
        for (const auto& ex : labelled) {
          dro.topic_prior[static_cast<std::size_t>(ex.topic)] += 1.0 / static_cast<double>(labelled.size());
        }
      }
      std::optional<BigramBaselines> baselines;
      if (dro.objective == Objective::TopicCvar) {
        if (!baselines_in.empty()) {
          baselines = BigramBaselines::load(baselines_in, K);
        } else {
          baselines = fit_baselines(labelled, K, static_cast<int>(vocab.size()), add_k, lambda);
        }
      }
      const BaselineScorer* scorer = baselines ? &*baselines : nullptr;
      std::string bytes;
      TrainLog log;
      auto run = [&](auto model) {
        log = train(dro, labelled, model, scorer, K);
        bytes = serialize(model, vocab.fingerprint());
      };
      if (model_kind == "tabular") {
        run(TabularModel<double>(distinct_outcomes(corpus)));
      } else {
        ngram.vocab_size = static_cast<int>(vocab.size());
        ngram.seed = dro.seed;
        if (precision == "f64") {
          run(NeuralNGram<double>(ngram));
        } else {
          run(NeuralNGram<float>(ngram));
        }
      }
      if (log.effective_alpha != log.requested_alpha && dro.objective != Objective::Mle) {
        std::cerr << "note: alpha " << log.requested_alpha << " raised to " << log.effective_alpha << "\n";
      }
      if (baselines && !baselines_out.empty()) {
        baselines->save(baselines_out);
        m.output(baselines_out);
      }
      write_file_atomic(train_out, bytes);
      write_file_atomic(train_log, log.to_csv());
      m.output(train_out);
      m.output(train_log);
      m.write(manifest_path(train_out));
      std::cout << "trained " << model_kind << " (" << to_string(dro.objective) << ", " << dro.steps
                << " steps) -> " << train_out << "\n";
    } else if (*eval_cmd) {
      if (!eval_baselines.empty() && eval_topics.empty()) {
        throw UsageError("--baselines needs --topics");
      }
      OutputLock lock(eval_out);
      Manifest m(eval_cmd, argc, argv);
      m.input(eval_ckpt);
      m.input(eval_corpus);
      m.input(eval_vocab);
      const auto vocab = Vocabulary::load(eval_vocab);
      const auto corpus = encode_all(read_corpus(eval_corpus), vocab);
      const auto bytes = read_file(eval_ckpt);
      check_vocab_hash(bytes, vocab);
      std::vector<TopicId> topics;
      std::optional<BigramBaselines> baselines;
      if (!eval_topics.empty()) {
        m.input(eval_topics);
        const auto [K, assignments] = read_topic_assignments(eval_topics);
        for (const auto& ex : with_topics(corpus, assignments)) {
          topics.push_back(ex.topic);
        }
        if (!eval_baselines.empty()) {
          baselines = BigramBaselines::load(eval_baselines, K);
        }
      }
      EvalReport report;
      with_checkpoint(bytes, [&](const auto& model) {
        report = perplexity(model, corpus, eval_name.empty() ? eval_corpus : eval_name, topics,
                            baselines ? &*baselines : nullptr);
      });
      write_file_atomic(eval_out, report.to_json());
      m.output(eval_out);
      m.write(manifest_path(eval_out));
      std::cout << "perplexity " << report.perplexity << " over " << report.token_count << " tokens -> " << eval_out
                << "\n";
    } else if (*scatter_cmd) {
      OutputLock lock(scatter_out);
      Manifest m(scatter_cmd, argc, argv);
      m.input(scatter_a);
      m.input(scatter_b);
      m.input(scatter_corpus);
      const auto vocab = Vocabulary::load(scatter_vocab);
      auto sentences = read_corpus(scatter_corpus);
      if (!scatter_labels.empty()) {
        const auto labels = read_lines(scatter_labels);
        if (labels.size() != sentences.size()) {
          throw Error("label file does not match the corpus");
        }
        for (std::size_t i = 0; i < labels.size(); ++i) {
          sentences[i].source_label = labels[i];
        }
      }
      const auto corpus = encode_all(sentences, vocab);
      const auto a = read_file(scatter_a);
      const auto b = read_file(scatter_b);
      check_vocab_hash(a, vocab);
      check_vocab_hash(b, vocab);
      std::vector<ScatterRow> rows;
      with_checkpoint(a, [&](const auto& ma) {
        with_checkpoint(b, [&](const auto& mb) { rows = loss_scatter(ma, mb, corpus); });
      });
      write_file_atomic(scatter_out, scatter_csv(rows));
      m.output(scatter_out);
      m.write(manifest_path(scatter_out));
      std::cout << rows.size() << " rows -> " << scatter_out << "\n";
    } else if (*toy_cmd) {
      OutputLock lock(toy_out);
      Manifest m(toy_cmd, argc, argv);
      m.seed("train", toy_opts.seed);
      const auto toy = make_toy_instance();
      const auto report = run_toy(toy_opts);
      write_file_atomic(toy_out, report.to_json(toy));
      m.output(toy_out);
      m.write(manifest_path(toy_out));
      for (const auto& mode : report.modes) {
        std::cout << to_string(mode.objective) << ": KL(review)=" << mode.topic_kl(0)
                  << " KL(news)=" << mode.topic_kl(1) << " p(F)=" << mode.probs(5) << "\n";
      }
    } else if (*sweep_cmd) {
      sweep.objectives.clear();
      for (const auto& o : sweep_objectives) {
        sweep.objectives.push_back(parse_objective(o));
      }
      if (sweep_fixed_alpha > 0.0) {
        sweep.fixed_alpha = sweep_fixed_alpha;
      }
      sweep.topics = sweep_topics == "lda" ? TopicSource::Lda : TopicSource::Oracle;
      const bool from_files = !sweep_target.empty();
      if (from_files && (sweep_nuisance.empty() || sweep_test.empty() || sweep_vocab.empty())) {
        throw UsageError("--target needs --nuisance, --test and --vocab");
      }
      if (!sweep_ckpt_dir.empty()) {
        sweep.checkpoint_dir = sweep_ckpt_dir;
      }
      OutputLock lock(sweep_out);
      Manifest m(sweep_cmd, argc, argv);
      m.seed("train", sweep.base.seed);
      m.seed("mix", sweep.mix_seed);
      m.seed("model", model_seed);
      SyntheticShiftData data;
      if (from_files) {
        for (const auto& p : {sweep_target, sweep_nuisance, sweep_test, sweep_vocab}) {
          m.input(p);
        }
        data.vocab = Vocabulary::load(sweep_vocab);
        data.target_train = encode_all(read_corpus(sweep_target), data.vocab);
        data.nuisance_train = encode_all(read_corpus(sweep_nuisance), data.vocab);
        data.target_test = encode_all(read_corpus(sweep_test), data.vocab);
      } else {
        SyntheticShiftSpec spec;
        spec.seed = data_seed;
        data = make_synthetic_shift(spec);
        m.seed("data", data_seed);
      }
      SweepData sd{data.target_train, data.nuisance_train, data.target_test, static_cast<int>(data.vocab.size()),
                   data.vocab.fingerprint()};
      NeuralNGramConfig cfg;
      cfg.vocab_size = static_cast<int>(data.vocab.size());
      cfg.seed = model_seed;
      const auto result = sweep_precision == "f64"
                              ? subpopulation_sweep(sweep, sd, [&] { return NeuralNGram<double>(cfg); })
                              : subpopulation_sweep(sweep, sd, [&] { return NeuralNGram<float>(cfg); });
      write_file_atomic(sweep_out, result.to_csv());
      m.output(sweep_out);
      m.write(manifest_path(sweep_out));
      std::cout << result.to_csv();
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
