#include "czlm/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "czlm/batching.hpp"
#include "czlm/bbpe.hpp"
#include "czlm/corpus.hpp"
#include "czlm/heads/ner.hpp"
#include "czlm/heads/sentiment.hpp"
#include "czlm/heads/tagger.hpp"
#include "czlm/metrics/conllu_eval.hpp"
#include "czlm/metrics/mrp.hpp"
#include "czlm/metrics/report.hpp"
#include "czlm/nn/checkpoint.hpp"
#include "czlm/nn/pretrain.hpp"
#include "czlm/rng.hpp"

#ifndef CZLM_VERSION
#define CZLM_VERSION "0.0.0"
#endif

namespace czlm::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::vector<std::string> start_run(const ExperimentConfig& config, const RawConfig& raw, const std::string& command) {
  fs::create_directories(config.out);
  const auto resolved = in_dir(config.out, "resolved_config.ini");
  write_file(resolved, raw.resolved_ini());
  ordered_json info = {{"command", command}, {"seed", config.seed}, {"threads", config.threads},
                       {"version", CZLM_VERSION}};
  const auto info_path = in_dir(config.out, "run_info.json");
  write_file(info_path, info.dump(2) + "\n");
  return {resolved, info_path};
}

void write_metrics(const std::string& path, const ordered_json& metrics) { write_file(path, metrics.dump(2) + "\n"); }

bbpe::ByteVocab load_tokenizer(const std::string& dir) {
  return bbpe::load_vocab(read_file(in_dir(dir, "vocab.tsv")), read_file(in_dir(dir, "merges.tsv")));
}

std::vector<std::string> save_tokenizer(const bbpe::ByteVocab& vocab, const std::string& dir) {
  const auto files = bbpe::save_vocab(vocab);
  const auto v = in_dir(dir, "vocab.tsv"), m = in_dir(dir, "merges.tsv");
  write_file(v, files.vocab);
  write_file(m, files.merges);
  return {v, m};
}

Corpus require_corpus(const ExperimentConfig& config) {
  if (config.corpus.empty()) throw CommandError("data.corpus is required");
  return ingest_plaintext(read_file(config.corpus));
}

std::vector<Sentence> sentences_of(const Corpus& corpus) {
  std::vector<Sentence> out;
  for (const auto& d : corpus.documents) out.insert(out.end(), d.sentences.begin(), d.sentences.end());
  return out;
}

}  // namespace

bool artifacts_valid(const std::vector<std::string>& paths) {
  return std::all_of(paths.begin(), paths.end(), [](const std::string& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec) && fs::file_size(p, ec) > 0;
  });
}

std::vector<std::string> cmd_tokenizer_train(const ExperimentConfig& config, const RawConfig& raw, std::ostream& log) {
  auto artifacts = start_run(config, raw, "tokenizer-train");
  const auto corpus = require_corpus(config);
  const auto vocab = bbpe::train_bbpe(corpus, config.vocab_cap);
  log << "tokenizer: " << vocab.size() << " tokens, " << vocab.merges().size() << " merges\n";
  for (auto& p : save_tokenizer(vocab, config.out)) artifacts.push_back(p);
  return artifacts;
}

std::vector<std::string> cmd_pretrain(const ExperimentConfig& config, const RawConfig& raw, std::ostream& log) {
  auto artifacts = start_run(config, raw, "pretrain");
  const auto corpus = require_corpus(config);
  const auto vocab = config.tokenizer_dir.empty() ? bbpe::train_bbpe(corpus, config.vocab_cap)
                                                  : load_tokenizer(config.tokenizer_dir);
  for (auto& p : save_tokenizer(vocab, config.out)) artifacts.push_back(p);

  const auto samples = batching::pack_full_sentences(corpus, vocab, config.max_len);
  auto pcfg = config.pretrain;
  pcfg.model.vocab = vocab.size();
  log << "pretrain: " << samples.size() << " samples, vocabulary " << vocab.size() << ", " << pcfg.steps
      << " steps\n";
  auto result = nn::pretrain_mlm(samples, pcfg, [&](const nn::StepLog& s) {
    if (s.step % 50 == 0 || s.step == pcfg.steps) log << "  step " << s.step << " loss " << s.loss << "\n";
  });

  const auto ckpt = in_dir(config.out, "checkpoint.bin");
  write_file(ckpt, nn::serialize_checkpoint(pcfg.model, result.params));
  const auto log_path = in_dir(config.out, "train_log.tsv");
  write_file(log_path, nn::format_training_log(result.log));

  std::vector<double> losses;
  for (const auto& s : result.log) losses.push_back(s.loss);
  const auto acc = nn::masked_accuracy(pcfg.model, result.params, samples, pcfg.mask_prob, pcfg.policy,
                                       derive_seed(config.seed, 0xACC), 5);
  const auto metrics = in_dir(config.out, "metrics.json");
  ordered_json flat;
  flat["MLM loss"] = nn::smooth(losses).back();
  flat["MLM accuracy"] = 100.0 * acc.value();
  write_metrics(metrics, flat);
  artifacts.insert(artifacts.end(), {ckpt, log_path, metrics});
  return artifacts;
}

namespace {

std::vector<std::string> probe_tagger(const ExperimentConfig& config, std::ostream& log,
                                      std::vector<std::string> artifacts) {
  if (config.treebank_train.empty() || config.treebank_dev.empty())
    throw CommandError("the tagger probe needs data.treebank_train and data.treebank_dev");
  const auto train = sentences_of(ingest_conllu(read_file(config.treebank_train)));
  auto dev_corpus = ingest_conllu(read_file(config.treebank_dev));
  const auto dev = sentences_of(dev_corpus);

  std::optional<nn::Checkpoint> encoder;
  std::optional<bbpe::ByteVocab> vocab;
  if (!config.checkpoint.empty()) {
    encoder = nn::deserialize_checkpoint(read_file(config.checkpoint));
    const auto dir = config.tokenizer_dir.empty() ? fs::path(config.checkpoint).parent_path().string()
                                                  : config.tokenizer_dir;
    vocab = load_tokenizer(dir);
  }
  auto features_of = [&](const std::vector<Sentence>& sents) {
    std::vector<heads::SentenceFeatures> out;
    if (encoder)
      for (const auto& s : sents) out.push_back(heads::contextual_features(encoder->config, encoder->params, *vocab, s));
    return out;
  };
  const auto train_features = features_of(train);
  const auto dev_features = features_of(dev);

  const std::size_t ctx_dim = encoder ? encoder->config.hidden : 0;
  const std::size_t ctx_layers = encoder ? encoder->config.layers + 1 : 0;
  heads::JointTagger model(config.tagger, heads::TaggerVocab::build(train), ctx_dim, ctx_layers, config.seed);
  log << "probe tagger: " << train.size() << " training sentences"
      << (encoder ? ", frozen contextual input" : ", no contextual input") << "\n";
  heads::train_tagger(model, train, train_features, config.tagger_train, [&](std::size_t step, double loss) {
    if (step % 50 == 0 || step == config.tagger_train.steps) log << "  step " << step << " loss " << loss << "\n";
  });

  std::size_t k = 0;
  for (auto& doc : dev_corpus.documents)
    for (auto& s : doc.sentences) {
      auto pred = model.predict(s, dev_features.empty() ? nullptr : &dev_features[k]);
      ++k;
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        auto& t = s.tokens[i];
        const auto& p = pred.tokens[i];
        t.lemma = p.lemma;
        t.upos = p.upos;
        t.xpos = p.xpos;
        t.ufeats = p.ufeats;
        if (config.tagger.parse) {
          t.head = p.head;
          t.deprel = p.deprel;
        }
      }
    }
  const auto predictions = in_dir(config.out, "predictions.conllu");
  write_file(predictions, serialize_conllu(dev_corpus));
  const auto head_path = in_dir(config.out, "tagger.bin");
  write_file(head_path, nn::serialize_checkpoint(encoder ? encoder->config : nn::TransformerConfig{}, model.params()));

  const auto report = metrics::eval_conllu(ingest_conllu(read_file(config.treebank_dev)), dev_corpus);
  ordered_json flat;
  for (const auto& [name, c] : report.metrics()) flat[name] = 100.0 * c.f1();
  const auto metrics_path = in_dir(config.out, "metrics.json");
  write_metrics(metrics_path, flat);
  log << metrics::format_metric_table(report.metrics(), true);
  artifacts.insert(artifacts.end(), {predictions, head_path, metrics_path});
  return artifacts;
}

std::vector<std::string> probe_sentiment(const ExperimentConfig& config, std::ostream& log,
                                         std::vector<std::string> artifacts) {
  if (config.sentiment_data.empty()) throw CommandError("the sentiment probe needs data.sentiment");
  if (config.checkpoint.empty()) throw CommandError("the sentiment probe needs probe.checkpoint");
  const auto data = heads::parse_sentiment_tsv(read_file(config.sentiment_data));
  const auto encoder = nn::deserialize_checkpoint(read_file(config.checkpoint));
  const auto dir =
      config.tokenizer_dir.empty() ? fs::path(config.checkpoint).parent_path().string() : config.tokenizer_dir;
  const auto vocab = load_tokenizer(dir);
  log << "probe sentiment: " << data.size() << " items, " << config.sentiment.lr_grid.size() << " learning rates, "
      << config.sentiment.folds << " folds\n";
  const auto report = heads::run_sentiment_protocol(data, encoder.config, encoder.params, vocab, config.sentiment);

  ordered_json grid = ordered_json::array();
  for (const auto& g : report.grid) {
    ordered_json folds = ordered_json::array();
    for (const auto& f : g.folds) folds.push_back({{"dev_f1", f.dev_f1}, {"test_f1", f.test_f1}});
    grid.push_back({{"lr", g.lr}, {"mean_dev_f1", g.mean_dev}, {"folds", folds}});
  }
  const auto detail = in_dir(config.out, "sentiment_folds.json");
  write_metrics(detail, {{"selected_lr", report.selected_lr}, {"grid", grid}});
  const auto metrics_path = in_dir(config.out, "metrics.json");
  write_metrics(metrics_path, {{"Sentiment F1", report.test_mean}, {"Sentiment std", report.test_std}});
  log << "selected lr " << report.selected_lr << ": test macro-F1 " << report.test_mean << " +- " << report.test_std
      << "\n";
  artifacts.insert(artifacts.end(), {detail, metrics_path});
  return artifacts;
}

}  // namespace

std::vector<std::string> cmd_probe(const ExperimentConfig& config, const RawConfig& raw, std::ostream& log) {
  auto artifacts = start_run(config, raw, "probe " + config.task);
  if (config.task == "tagger") return probe_tagger(config, log, std::move(artifacts));
  return probe_sentiment(config, log, std::move(artifacts));
}

std::vector<std::string> cmd_evaluate(const std::string& kind, const std::string& gold, const std::string& system,
                                      const std::string& out, std::ostream& log) {
  metrics::MetricRows rows;
  ordered_json flat;
  if (kind == "conllu") {
    const auto report = metrics::eval_conllu(ingest_conllu(read_file(gold)), ingest_conllu(read_file(system)));
    rows = report.metrics();
  } else if (kind == "mrp") {
    std::ifstream g(gold), s(system);
    if (!g || !s) throw CommandError("cannot read MRP inputs");
    const auto gold_graphs = metrics::read_mrp(g), sys_graphs = metrics::read_mrp(s);
    std::map<std::string, const metrics::MrpGraph*> by_id;
    for (const auto& graph : sys_graphs) by_id[graph.id] = &graph;
    metrics::MrpScore total;
    for (const auto& graph : gold_graphs) {
      metrics::MrpGraph empty;
      empty.id = graph.id;
      const auto* sys = by_id.count(graph.id) ? by_id[graph.id] : &empty;
      total += metrics::mrp_score(graph, *sys, metrics::mces_align(graph, *sys));
    }
    rows = total.facets();
    rows.emplace_back("all", total.pooled());
  } else if (kind == "spans") {
    rows.emplace_back("Spans", metrics::span_f1(heads::parse_span_list(read_file(gold)),
                                                heads::parse_span_list(read_file(system))));
  } else if (kind == "sentiment") {
    const auto g = heads::parse_sentiment_tsv(read_file(gold));
    const auto s = heads::parse_sentiment_tsv(read_file(system));
    if (g.size() != s.size()) throw CommandError("gold and system sentiment files differ in length");
    std::vector<int> gl, sl;
    for (std::size_t i = 0; i < g.size(); ++i) {
      gl.push_back(g[i].label);
      sl.push_back(s[i].label);
    }
    flat["Sentiment F1"] = metrics::macro_f1(metrics::confusion_matrix(gl, sl, heads::kPolarityCount));
  } else {
    throw CommandError("unknown evaluation kind '" + kind + "' (expected conllu, mrp, spans or sentiment)");
  }

  fs::create_directories(out);
  std::vector<std::string> artifacts;
  if (!rows.empty()) {
    const auto table = metrics::format_metric_table(rows, true);
    log << table;
    const auto txt = in_dir(out, kind + "_report.txt"), json = in_dir(out, kind + "_report.json");
    write_file(txt, table);
    write_file(json, metrics::format_metric_json(rows, true));
    artifacts.insert(artifacts.end(), {txt, json});
    for (const auto& [name, c] : rows) flat[name] = 100.0 * c.f1();
  } else {
    log << "Sentiment macro-F1: " << flat["Sentiment F1"].get<double>() << "\n";
  }
  const auto metrics_path = in_dir(out, "metrics.json");
  write_metrics(metrics_path, flat);
  artifacts.push_back(metrics_path);
  return artifacts;
}

std::vector<std::string> cmd_report(const std::string& root, std::ostream& log) {
  if (!fs::is_directory(root)) throw CommandError("run directory '" + root + "' does not exist");
  std::vector<std::pair<std::string, ordered_json>> runs;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.path().filename() != "metrics.json") continue;
    auto name = fs::relative(entry.path().parent_path(), root).string();
    if (name == ".") name = fs::path(root).filename().string();
    runs.emplace_back(name, ordered_json::parse(read_file(entry.path().string())));
  }
  if (runs.empty()) throw CommandError("no metrics.json below '" + root + "'");
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<std::string> columns;
  for (const auto& [_, m] : runs)
    for (const auto& [key, _v] : m.items())
      if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);

  std::vector<std::vector<std::string>> cells{{"Run"}};
  cells[0].insert(cells[0].end(), columns.begin(), columns.end());
  ordered_json all = ordered_json::object();
  for (const auto& [name, m] : runs) {
    std::vector<std::string> row{name};
    for (const auto& c : columns) {
      if (!m.contains(c) || !m[c].is_number()) {
        row.push_back("-");
        continue;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", m[c].get<double>());
      row.push_back(buf);
    }
    cells.push_back(row);
    all[name] = m;
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& r : cells)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::string table;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      const auto& s = cells[r][i];
      const std::string fill(width[i] - s.size(), ' ');
      table += (i ? " | " : "") + (i == 0 ? s + fill : fill + s);
    }
    table += "\n";
    if (r == 0) {
      for (std::size_t i = 0; i < width.size(); ++i) table += (i ? "-+-" : "") + std::string(width[i], '-');
      table += "\n";
    }
  }
  log << table;
  const auto txt = in_dir(root, "results.txt"), json = in_dir(root, "results.json");
  write_file(txt, table);
  write_file(json, all.dump(2) + "\n");
  return {txt, json};
}

}  // namespace czlm::cli
