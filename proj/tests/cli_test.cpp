#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcvar/io.hpp"
#include "tcvar/toy.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace tcvar;

namespace {

const fs::path kDir = fs::temp_directory_path() / "tcvar_cli_test";

struct Run {
  int code;
  std::string err;
};

Run run(const std::string& args) {
  const auto err_path = kDir / "stderr.txt";
  const std::string cmd = "cd " + kDir.string() + " && " + TCVAR_CLI + " " + args + " > stdout.txt 2> " +
                          err_path.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(err_path)};
}

void write(const std::string& name, const std::string& body) { write_file_atomic(kDir / name, body); }

std::string read(const std::string& name) { return read_file(kDir / name); }

void setup_corpora() {
  fs::remove_all(kDir);
  fs::create_directories(kDir);
  std::string t, n;
  const char* reviews[] = {"the food was great and cheap", "service was slow but friendly", "loved the pasta here",
                           "terrible coffee , never again"};
  const char* news[] = {"the senate passed the bill today", "markets fell after the report",
                        "officials expect heavy rain tonight", "the team won the final game"};
  for (int i = 0; i < 60; ++i) {
    t += std::string(reviews[i % 4]) + "\n";
  }
  for (int i = 0; i < 120; ++i) {
    n += std::string(news[i % 4]) + "\n";
  }
  t += "short\n";
  write("target.txt", t);
  write("nuisance.txt", n);
  write("empty.txt", "");
}

} // namespace

TEST_CASE("pipeline") {
  setup_corpora();

  SUBCASE("vocabulary and its errors") {
    CHECK(run("build-vocab --corpus target.txt nuisance.txt --out vocab.txt").code == 0);
    const auto v = read("vocab.txt");
    CHECK(v.rfind("<unk>\n<eos>\n", 0) == 0);
    CHECK(v.find("\nshort\n") == std::string::npos);
    CHECK(fs::exists(kDir / "vocab.txt.manifest.json"));
    CHECK_FALSE(fs::exists(kDir / "vocab.txt.lock"));

    const auto bad = run("build-vocab --corpus empty.txt --out v2.txt");
    CHECK(bad.code == 2);
    CHECK(bad.err.find("empty corpus set") != std::string::npos);
    CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);
    CHECK_FALSE(fs::exists(kDir / "v2.txt"));

    CHECK(run("build-vocab --out v3.txt").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("build-vocab --corpus target.txt --top-k 0 --out v4.txt").code == 1);
  }

  SUBCASE("mix, cluster, train, eval") {
    REQUIRE(run("build-vocab --corpus target.txt nuisance.txt --out vocab.txt").code == 0);
    REQUIRE(run("mix --target target.txt --nuisance nuisance.txt --alpha-train 0.5 --target-count 50 --seed 3 "
                "--out mix.txt")
                .code == 0);
    const auto labels = read("mix.txt.labels");
    CHECK(std::count(labels.begin(), labels.end(), '\n') == 100);
    const auto manifest = nlohmann::json::parse(read("mix.txt.mixture.json"));
    CHECK(manifest["nuisance_sentences"] == 50);
    CHECK(manifest["seed"] == 3);

    const auto mix1 = read("mix.txt");
    REQUIRE(run("mix --config mix.txt.manifest.json --out mix2.txt").code == 0);
    CHECK(read("mix2.txt") == mix1);

    const auto alpha1 = run("mix --target target.txt --nuisance missing.txt --alpha-train 1 --target-count 50 "
                            "--out mix_a1.txt");
    CHECK(alpha1.code == 0);
    const auto short_run =
        run("mix --target target.txt --nuisance nuisance.txt --alpha-train 0.1 --target-count 50 --out mix3.txt");
    CHECK(short_run.code == 2);
    CHECK(short_run.err.find("short by 330") != std::string::npos);
    CHECK_FALSE(fs::exists(kDir / "mix3.txt"));

    REQUIRE(run("cluster --corpus mix.txt --oracle-labels mix.txt.labels --out oracle.tsv").code == 0);
    CHECK(read("oracle.tsv").rfind("#K=2\n", 0) == 0);
    REQUIRE(run("cluster --corpus mix.txt --vocab vocab.txt --k 2 --iters 20 --seed 4 --out lda.tsv").code == 0);
    REQUIRE(run("cluster --corpus mix.txt --vocab vocab.txt --k 2 --iters 20 --seed 4 --out lda2.tsv").code == 0);
    CHECK(read("lda.tsv") == read("lda2.tsv"));
    CHECK(run("cluster --corpus mix.txt --out nolabels.tsv").code == 1);

    const std::string train = "train --corpus mix.txt --vocab vocab.txt --topics oracle.tsv --steps 20 "
                              "--batch-size 16 --lr 0.1 --seed 2 --context 2 --embedding 8 --hidden 8 ";
    REQUIRE(run(train + "--out cvar.ckpt --save-baselines base").code == 0);
    CHECK(fs::exists(kDir / "base" / "baseline.topic0"));
    CHECK(fs::exists(kDir / "base" / "baseline.topic1"));
    const auto log = read("cvar.ckpt.log.csv");
    CHECK(log.rfind("step,objective,L_0,L_1,p_0,p_1,mean_weighted_loss,lr\n", 0) == 0);
    const auto m = nlohmann::json::parse(read("cvar.ckpt.manifest.json"));
    CHECK(m["command"] == "train");
    CHECK(m["config"]["lr"] == "0.1");
    CHECK(m["seeds"]["train"] == 2);
    CHECK(m["inputs"].contains("mix.txt"));

    const auto mle = run(train + "--objective mle --alpha 0.3 --out mle.ckpt");
    CHECK(mle.code == 0);
    CHECK(mle.err.find("warning: --alpha is ignored") != std::string::npos);

    // Rerun from the manifest reproduces the checkpoint and the log.
    REQUIRE(run("train --config cvar.ckpt.manifest.json --out rerun.ckpt --log rerun.csv").code == 0);
    CHECK(read("rerun.ckpt") == read("cvar.ckpt"));
    CHECK(read("rerun.csv") == log);

    CHECK(run(train + "--objective bogus --out x.ckpt").code == 1);
    CHECK(run(train + "--alpha 1.5 --out x.ckpt").code == 1);
    CHECK_FALSE(fs::exists(kDir / "x.ckpt"));

    REQUIRE(run("eval --checkpoint cvar.ckpt --corpus target.txt --vocab vocab.txt --out eval.json").code == 0);
    const auto report = nlohmann::json::parse(read("eval.json"));
    CHECK(report["perplexity"].get<double>() > 1.0);
    CHECK(report["sentence_count"] == 61);
    REQUIRE(run("eval --checkpoint cvar.ckpt --corpus mix.txt --vocab vocab.txt --topics oracle.tsv "
                "--baselines base --out eval_topics.json")
                .code == 0);
    CHECK(nlohmann::json::parse(read("eval_topics.json"))["per_topic"].size() == 2);
    CHECK(run("eval --checkpoint cvar.ckpt --corpus empty.txt --vocab vocab.txt --out e.json").code == 2);

    REQUIRE(run("scatter --a cvar.ckpt --b mle.ckpt --corpus mix.txt --vocab vocab.txt --labels mix.txt.labels "
                "--out scatter.csv")
                .code == 0);
    const auto sc = read("scatter.csv");
    CHECK(std::count(sc.begin(), sc.end(), '\n') == 101);

    REQUIRE(run("train --corpus mix.txt --vocab vocab.txt --topics oracle.tsv --steps 10 --batch-size 8 "
                "--model tabular --objective sentence-cvar --out tab.ckpt")
                .code == 0);
    CHECK(run("eval --checkpoint tab.ckpt --corpus mix.txt --vocab vocab.txt --out tab.json").code == 0);
  }

  SUBCASE("concurrent writers are refused") {
    write("held.json.lock", "");
    const auto r = run("toy --steps 10 --out held.json");
    CHECK(r.code == 2);
    CHECK(r.err.find("lock") != std::string::npos);
    CHECK_FALSE(fs::exists(kDir / "held.json"));
  }
}

TEST_CASE("toy command matches the library run") {
  fs::create_directories(kDir);
  REQUIRE(run("toy --steps 400 --batch-size 100 --lr 0.1 --out toy.json").code == 0);
  ToyOptions o;
  o.steps = 400;
  o.batch_size = 100;
  o.lr = 0.1;
  const auto toy = make_toy_instance();
  CHECK(read("toy.json") == run_toy(o).to_json(toy));
  const auto j = nlohmann::json::parse(read("toy.json"));
  CHECK(j["modes"].size() == 4);
}
