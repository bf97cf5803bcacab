#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "czlm/cli/app.hpp"
#include "czlm/cli/commands.hpp"
#include "czlm/cli/config.hpp"
#include "czlm/corpus.hpp"

using namespace czlm;
using namespace czlm::cli;
namespace fs = std::filesystem;

namespace {

std::string data_path(const std::string& name) { return std::string(CZLM_DATA_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("czlm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args, const std::map<std::string, std::string>& env = {}) {
  std::ostringstream out, err;
  const int code = run_app(args, env, out, err);
  return {code, out.str(), err.str()};
}

// Small model and short schedules; data paths point at the bundled toy data.
std::string tiny_ini() {
  return "[data]\ncorpus = " + data_path("corpus.txt") + "\ntreebank_train = " + data_path("treebank/train.conllu") +
         "\ntreebank_dev = " + data_path("treebank/dev.conllu") +
         "\n[tokenizer]\nvocab_cap = 400\n"
         "[model]\nlayers = 1\nhidden = 16\nheads = 2\nffn = 32\nmax_positions = 64\n"
         "[pretrain]\nsteps = 6\ntotal_steps = 6\nwarmup_steps = 2\nbatch_size = 4\nmax_len = 64\npeak_lr = 1e-3\n"
         "[tagger]\nsteps = 10\nword_dim = 8\nchar_dim = 8\nchar_hidden = 8\nhidden = 8\nrnn_layers = 1\n"
         "[sentiment]\nfolds = 3\nlr_grid = 1e-5,5e-5\nwarmup_epochs = 1\ndecay_epochs = 1\n";
}

fs::path write_tiny_config(const fs::path& dir) {
  const auto path = dir / "tiny.ini";
  write_file(path.string(), tiny_ini());
  return path;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p.string())); }

}  // namespace

TEST_CASE("defaults carry their provenance") {
  RawConfig raw;
  CHECK(raw.get("model.hidden").value == "768");
  CHECK(raw.get("model.hidden").source == Source::Default);
  const auto ini = raw.resolved_ini();
  CHECK(ini.find("; hidden size [default, reference setup]\nhidden = 768") != std::string::npos);
  CHECK(ini.find("[default, local choice]\nseed = 1") != std::string::npos);
  CHECK(ini.find("paper") == std::string::npos);
  const auto config = resolve_config(raw);
  CHECK(config.pretrain.model.layers == 12);
  CHECK(config.pretrain.schedule.warmup_steps == 10000);
  CHECK(config.vocab_cap == 52000);
}

TEST_CASE("file, environment and flags override in that order") {
  RawConfig raw;
  raw.merge_ini("[pretrain]\nsteps = 5\ntotal_steps = 5\nwarmup_steps = 1\n[run]\nseed = 3\n", "a.ini");
  raw.merge_ini("[pretrain]\nsteps = 6\n", "b.ini");
  raw.apply_environment({{"CZLM_PRETRAIN_STEPS", "7"}, {"CZLM_RUN_THREADS", "2"}, {"UNRELATED", "x"}});
  CHECK(raw.get("pretrain.steps").value == "7");
  raw.set("pretrain.steps", "9");
  const auto config = resolve_config(raw);
  CHECK(config.pretrain.steps == 9);
  CHECK(config.seed == 3);
  CHECK(config.threads == 2);
  CHECK(config.pretrain.schedule.total_steps == 5);
  const auto ini = raw.resolved_ini();
  CHECK(ini.find("[command line]\nsteps = 9") != std::string::npos);
  CHECK(ini.find("[environment CZLM_RUN_THREADS]\nthreads = 2") != std::string::npos);
  CHECK(ini.find("[file a.ini]\nseed = 3") != std::string::npos);
  CHECK(environment_name("tokenizer.vocab_cap") == "CZLM_TOKENIZER_VOCAB_CAP");
}

TEST_CASE("every configuration problem is reported at once") {
  RawConfig raw;
  raw.merge_ini("[model]\nhidden = 10\nheads = 3\n[pretrain]\nmask_prob = 2\nmax_len = 1000\n[extra]\nfoo = 1\n",
                "bad.ini");
  raw.set("probe.task", "parser");
  raw.set("data.corpus", "/nonexistent/corpus.txt");
  raw.set("sentiment.lr_grid", "1e-5,abc");
  try {
    resolve_config(raw);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    std::string all;
    for (const auto& p : e.problems()) all += p + "\n";
    INFO(all);
    CHECK(e.problems().size() >= 7);
    for (const char* needle : {"extra.foo", "model.hidden", "pretrain.mask_prob", "pretrain.max_len", "probe.task",
                               "data.corpus", "sentiment.lr_grid"})
      CHECK_MESSAGE(all.find(needle) != std::string::npos, needle);
  }
}

TEST_CASE("usage and configuration errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
  auto bad = run({"--set", "model.heads=5", "show-config"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("model.hidden") != std::string::npos);
  CHECK(run({"--set", "nokey", "show-config"}).code == 2);
  CHECK(run({"--set", "model.bogus=1", "show-config"}).code == 2);
  auto env = run({"show-config"}, {{"CZLM_MODEL_HEADS", "7"}});
  CHECK(env.code == 2);
  auto ok = run({"--seed", "5", "show-config"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("[command line]\nseed = 5") != std::string::npos);
  CHECK(run({"--version"}).code == 0);
}

TEST_CASE("evaluate conllu gold against gold") {
  const auto dir = scratch("eval");
  const auto gold = data_path("treebank/dev.conllu");
  auto r = run({"--out", dir.string(), "evaluate", "conllu", gold, gold});
  REQUIRE(r.code == 0);
  const auto metrics = read_json(dir / "metrics.json");
  CHECK(metrics.size() >= 8);
  for (const auto& [name, value] : metrics.items()) CHECK_MESSAGE(value.get<double>() == 100.0, name);
  CHECK(fs::exists(dir / "conllu_report.txt"));
  CHECK(read_file((dir / "conllu_report.txt").string()).find("100.00") != std::string::npos);

  const auto mrp = run({"--out", (dir / "mrp").string(), "evaluate", "mrp", data_path("mrp/gold.mrp"),
                        data_path("mrp/system.mrp")});
  REQUIRE(mrp.code == 0);
  const auto m = read_json(dir / "mrp" / "metrics.json");
  CHECK(m["all"].get<double>() > 0.0);
  CHECK(m["all"].get<double>() < 100.0);

  CHECK(run({"--out", dir.string(), "evaluate", "xml", gold, gold}).code == 1);
  CHECK(run({"--out", dir.string(), "evaluate", "conllu", gold, "/nonexistent"}).code == 2);
}

TEST_CASE("evaluate spans and sentiment") {
  const auto dir = scratch("spans");
  write_file((dir / "gold.spans").string(), "1\t2\tPER\n4\t4\tLOC\n");
  write_file((dir / "sys.spans").string(), "1\t2\tPER\n5\t5\tLOC\n");
  REQUIRE(run({"--out", dir.string(), "evaluate", "spans", (dir / "gold.spans").string(),
               (dir / "sys.spans").string()}).code == 0);
  CHECK(read_json(dir / "metrics.json")["Spans"].get<double>() == doctest::Approx(50.0));

  write_file((dir / "gold.tsv").string(), "p\ta\nn\tb\n0\tc\n");
  write_file((dir / "sys.tsv").string(), "p\ta\nn\tb\np\tc\n");
  REQUIRE(run({"--out", dir.string(), "evaluate", "sentiment", (dir / "gold.tsv").string(),
               (dir / "sys.tsv").string()}).code == 0);
  // Per class F1: negative 1, neutral 0, positive 2/3.
  CHECK(read_json(dir / "metrics.json")["Sentiment F1"].get<double>() == doctest::Approx(100.0 * (5.0 / 3.0) / 3.0));
}

TEST_CASE("pretraining twice with one seed gives byte-identical checkpoints") {
  const auto dir = scratch("determinism");
  const auto config = write_tiny_config(dir);
  for (const char* name : {"a", "b"})
    REQUIRE(run({"-c", config.string(), "--seed", "11", "--out", (dir / name).string(), "pretrain"}).code == 0);
  const auto a = read_file((dir / "a" / "checkpoint.bin").string());
  CHECK(!a.empty());
  CHECK(a == read_file((dir / "b" / "checkpoint.bin").string()));
  CHECK(read_file((dir / "a" / "train_log.tsv").string()) == read_file((dir / "b" / "train_log.tsv").string()));
  REQUIRE(run({"-c", config.string(), "--seed", "12", "--out", (dir / "c").string(), "pretrain"}).code == 0);
  CHECK(a != read_file((dir / "c" / "checkpoint.bin").string()));
  const auto info = read_json(dir / "a" / "run_info.json");
  CHECK(info["seed"] == 11);
  CHECK(info["command"] == "pretrain");
}

TEST_CASE("end-to-end smoke run") {
  const auto start = std::chrono::steady_clock::now();
  const auto dir = scratch("smoke");
  const auto config = write_tiny_config(dir);
  const auto c = config.string();
  const auto runs = dir / "runs";

  REQUIRE(run({"-c", c, "--out", (dir / "tok").string(), "tokenizer-train"}).code == 0);
  CHECK(fs::exists(dir / "tok" / "vocab.tsv"));
  CHECK(fs::exists(dir / "tok" / "merges.tsv"));

  const auto pre = runs / "pretrain";
  auto p = run({"-c", c, "--set", "tokenizer.dir=" + (dir / "tok").string(), "--out", pre.string(), "pretrain"});
  REQUIRE_MESSAGE(p.code == 0, p.err);
  CHECK(read_file((pre / "vocab.tsv").string()) == read_file((dir / "tok" / "vocab.tsv").string()));
  for (const char* f : {"checkpoint.bin", "train_log.tsv", "metrics.json", "resolved_config.ini", "run_info.json"})
    CHECK_MESSAGE(fs::exists(pre / f), f);

  const auto ckpt = (pre / "checkpoint.bin").string();
  auto tagger = run({"-c", c, "--out", (runs / "tagger").string(), "probe", "--checkpoint", ckpt});
  REQUIRE_MESSAGE(tagger.code == 0, tagger.err);
  CHECK(read_json(runs / "tagger" / "metrics.json").contains("LAS"));
  const auto predictions = ingest_conllu(read_file((runs / "tagger" / "predictions.conllu").string()));
  CHECK(predictions.documents.size() == ingest_conllu(read_file(data_path("treebank/dev.conllu"))).documents.size());

  auto baseline = run({"-c", c, "--out", (runs / "baseline").string(), "probe"});
  REQUIRE_MESSAGE(baseline.code == 0, baseline.err);

  std::string tsv;
  const char* words[] = {"špatný", "stůl", "skvělý"};
  const char* labels[] = {"n", "0", "p"};
  for (int i = 0; i < 30; ++i) tsv += std::string(labels[i % 3]) + "\t" + words[i % 3] + "\n";
  write_file((dir / "sentiment.tsv").string(), tsv);
  auto sentiment = run({"-c", c, "--set", "data.sentiment=" + (dir / "sentiment.tsv").string(), "--out",
                        (runs / "sentiment").string(), "probe", "--task", "sentiment", "--checkpoint", ckpt});
  REQUIRE_MESSAGE(sentiment.code == 0, sentiment.err);
  CHECK(read_json(runs / "sentiment" / "metrics.json").contains("Sentiment F1"));
  CHECK(run({"-c", c, "--out", (runs / "x").string(), "probe", "--task", "sentiment"}).code == 1);

  auto report = run({"report", runs.string()});
  REQUIRE_MESSAGE(report.code == 0, report.err);
  const auto table = read_file((runs / "results.txt").string());
  for (const char* row : {"baseline", "pretrain", "sentiment", "tagger"})
    CHECK_MESSAGE(table.find(row) != std::string::npos, row);
  CHECK(read_json(runs / "results.json")["tagger"].contains("UPOS"));
  CHECK(run({"report", (dir / "missing").string()}).code == 1);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 300.0);
}
