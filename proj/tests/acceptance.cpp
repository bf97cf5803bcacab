// Acceptance run: one PASS/FAIL line per criterion. Arguments select criteria by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "czlm/batching.hpp"
#include "czlm/bbpe.hpp"
#include "czlm/corpus.hpp"
#include "czlm/heads/crf.hpp"
#include "czlm/heads/edit_script.hpp"
#include "czlm/heads/ner.hpp"
#include "czlm/heads/parser.hpp"
#include "czlm/heads/sentiment.hpp"
#include "czlm/metrics/conllu_eval.hpp"
#include "czlm/metrics/mrp.hpp"
#include "czlm/nn/gradcheck.hpp"
#include "czlm/nn/layers.hpp"
#include "czlm/nn/ops.hpp"
#include "czlm/nn/pretrain.hpp"
#include "czlm/nn/schedule.hpp"
#include "czlm/nn/transformer.hpp"
#include "czlm/rng.hpp"
#include "czlm/utf8.hpp"
#include "oracles.hpp"

using namespace czlm;
using namespace oracle;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string data_path(const std::string& name) { return std::string(CZLM_DATA_DIR) + "/" + name; }

bool rel_close(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

nn::Tensor random_tensor(nn::Shape shape, Rng& rng, double scale = 1.0, bool grad = true) {
  std::vector<double> v(nn::shape_size(shape));
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return nn::Tensor::from(std::move(shape), std::move(v), grad);
}

// 1
Outcome tokenizer_losslessness() {
  Timer timer;
  const auto corpus = ingest_plaintext(read_file(data_path("corpus.txt")));
  const auto vocab = bbpe::train_bbpe(corpus, 1000);
  Rng rng(20240601);
  std::size_t failures = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto t = random_utf8(rng, 60);
    failures += vocab.decode(vocab.encode_ids(t)) != t;
  }
  const double secs = timer.seconds();
  return {failures == 0 && secs < 30.0, fmt("10000 strings, %zu failures, %.1f s (< 30 s)", failures, secs)};
}

// 2
Outcome tokenizer_oracle() {
  const auto v = bbpe::train_bbpe(std::vector<std::string>{"abab abab"}, 300);
  const auto a = bbpe::kFirstByteId + 'a', b = bbpe::kFirstByteId + 'b';
  // (a,b) occurs four times, then (ab,ab) twice; every remaining pair occurs once.
  const std::vector<bbpe::Merge> expected = {{a, b, bbpe::kByteOnlySize},
                                             {bbpe::kByteOnlySize, bbpe::kByteOnlySize, bbpe::kByteOnlySize + 1}};
  const bool ok = v.merges() == expected && v.token_bytes(bbpe::kByteOnlySize + 1) == "abab";
  return {ok, fmt("%zu merges, expected (a,b) then (ab,ab)", v.merges().size())};
}

// 3
Outcome schedule_constants() {
  bool ok = true;
  nn::ScheduleConfig poly;
  poly.kind = nn::ScheduleKind::PolynomialDecay;
  poly.warmup_steps = 10000;
  poly.peak_lr = 7e-4;
  poly.total_steps = 91075;
  const double at_warmup = nn::schedule_lr(poly, 10000);
  ok = ok && rel_close(at_warmup, 7e-4, 1e-12);
  double worst = 0.0;
  for (double peak : {1e-5, 2e-5, 3e-5, 5e-5}) {
    nn::ScheduleConfig cos;
    cos.kind = nn::ScheduleKind::CosineWarmupDecay;
    cos.peak_lr = peak;
    cos.warmup_epochs = 4;
    cos.decay_epochs = 10;
    const double start = nn::schedule_lr(cos, 0), top = nn::schedule_lr(cos, 4), end = nn::schedule_lr(cos, 14);
    worst = std::max({worst, std::abs(start) / peak, std::abs(top - peak) / peak, std::abs(end) / peak});
  }
  ok = ok && worst <= 1e-12;
  return {ok, fmt("poly(10000) = %.17g; cosine worst relative deviation %.3g", at_warmup, worst)};
}

// 4
Outcome gradient_checks() {
  Timer timer;
  std::vector<std::pair<std::string, double>> errors;
  Rng rng(404);

  {
    nn::TransformerConfig cfg{.layers = 2, .hidden = 32, .heads = 4, .ffn = 64, .vocab = 40, .max_positions = 8};
    auto params = nn::init_transformer(cfg, 41);
    batching::MlmBatch batch;
    batch.rows = 2;
    batch.max_len = 6;
    batch.input_ids = {0, 3, 7, 9, 11, 1, 0, 12, 3, 20, 1, 2};
    batch.target_ids = {-100, 6, -100, 30, -100, -100, -100, -100, 15, -100, -100, -100};
    batch.lengths = {6, 5};
    errors.emplace_back("transformer + MLM", nn::gradient_check([&] { return nn::mlm_forward(cfg, params, batch).loss; },
                                                                 params).max_error());
  }
  {
    nn::ParameterSet p;
    p.add("H", random_tensor({5, 8}, rng));
    p.add("D", random_tensor({4, 8}, rng));
    p.add("U", random_tensor({3, 8, 8}, rng));
    p.add("u", random_tensor({3, 8}, rng));
    p.add("v", random_tensor({3, 8}, rng));
    p.add("b", random_tensor({3}, rng));
    const auto w = random_tensor({4, 15}, rng, 1.0, false);
    errors.emplace_back("biaffine", nn::gradient_check([&] {
                                      return nn::sum(nn::mul(heads::biaffine(p["H"], p["D"], p["U"], p["u"], p["v"], p["b"]), w));
                                    }, p).max_error());
  }
  {
    nn::ParameterSet p;
    p.add("E", random_tensor({5, 3}, rng, 2.0));
    p.add("T", random_tensor({3, 3}, rng, 2.0));
    const auto bio = heads::CrfConstraints::bio({"O", "B-PER", "I-PER"});
    errors.emplace_back("CRF loss", nn::gradient_check([&] {
                                      return heads::crf_nll(p["E"], p["T"], {1, 2, 0, 1, 2}, bio);
                                    }, p).max_error());
  }
  {
    nn::ParameterSet p;
    nn::add_birnn(p, "rnn", 8, 8, rng);
    p.add("x", random_tensor({5, 8}, rng));
    const auto w = random_tensor({5, 16}, rng, 1.0, false);
    errors.emplace_back("birnn layer", nn::gradient_check([&] {
                                         return nn::sum(nn::mul(nn::birnn_layer(p, "rnn", p["x"]), w));
                                       }, p).max_error());
  }
  {
    nn::ParameterSet p;
    p.add("x", random_tensor({4, 16}, rng, 2.0));
    p.add("g", random_tensor({16}, rng));
    p.add("b", random_tensor({16}, rng));
    const auto w = random_tensor({4, 16}, rng, 1.0, false);
    errors.emplace_back("layer norm", nn::gradient_check([&] {
                                        return nn::sum(nn::mul(nn::layer_norm(p["x"], p["g"], p["b"], 1e-5), w));
                                      }, p).max_error());
  }
  {
    nn::ParameterSet p;
    for (int l = 0; l < 3; ++l) p.add("h" + std::to_string(l), random_tensor({3, 8}, rng));
    p.add("mix", random_tensor({3}, rng));
    p.add("gamma", nn::Tensor::scalar(0.7, true));
    const auto w = random_tensor({3, 8}, rng, 1.0, false);
    errors.emplace_back("scalar mix", nn::gradient_check([&] {
                                        return nn::sum(nn::mul(nn::scalar_mix({p["h0"], p["h1"], p["h2"]}, p["mix"], p["gamma"]), w));
                                      }, p).max_error());
  }

  const double secs = timer.seconds();
  bool ok = secs < 300.0;
  std::string detail;
  for (const auto& [name, e] : errors) {
    ok = ok && e < 1e-3;
    detail += fmt("%s %.1e; ", name.c_str(), e);
  }
  return {ok, detail + fmt("%.1f s (< 300 s)", secs)};
}

// 5
Outcome decoder_oracle() {
  Timer timer;
  Rng rng(505);
  std::size_t instances = 0, mismatches = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    const std::size_t n = 1 + rng.uniform(6);
    const bool single_root = trial < 1000;
    auto s = random_scores(n, 0, rng);
    s.label.clear();
    // Integer scores make ties common.
    if (trial % 3 == 0)
      for (auto& x : s.arc) x = std::round(x);
    const auto tree = heads::decode_tree(s, single_root);
    double total = 0.0;
    for (std::size_t j = 1; j <= n; ++j) total += s.arc_score(tree.heads[j - 1], j);
    const bool roots_ok = !single_root || std::count(tree.heads.begin(), tree.heads.end(), 0u) == 1;
    const bool ok = tree.heads.size() == n && reaches_root(tree.heads) && roots_ok &&
                    std::abs(total - brute_force_tree(s, single_root)) < 1e-9;
    ++instances;
    mismatches += !ok;
  }
  const double secs = timer.seconds();
  return {mismatches == 0 && secs < 60.0,
          fmt("%zu instances (1000 single-root), %zu mismatches, %.1f s (< 60 s)", instances, mismatches, secs)};
}

// 6
Outcome crf_oracle() {
  Rng rng(606);
  double worst = 0.0;
  std::size_t viterbi_mismatches = 0;
  const int trials = 600;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = 1 + rng.uniform(5);
    const bool bio = trial % 4 == 0;
    const std::size_t L = bio ? 3 : 1 + rng.uniform(4);
    const auto c = bio ? heads::CrfConstraints::bio({"O", "B-X", "I-X"}) : heads::CrfConstraints::none(L);
    std::vector<double> E(n * L), T(L * L);
    for (auto& x : E) x = rng.uniform(-4.0, 4.0);
    for (auto& x : T) x = rng.uniform(-4.0, 4.0);
    const auto ref = enumerate_paths(E, T, n, L, c);
    worst = std::max(worst, std::abs(heads::crf_log_partition(E, T, L, c) - ref.log_partition));
    const auto path = heads::crf_viterbi(E, T, L, c);
    viterbi_mismatches += !(c.permits(path) && std::abs(heads::crf_path_score(E, T, L, path) - ref.best_score) < 1e-9);
  }
  return {worst < 1e-8 && viterbi_mismatches == 0,
          fmt("%d instances, max |log Z error| %.2e (< 1e-8), %zu Viterbi mismatches", trials, worst, viterbi_mismatches)};
}

// 7
Outcome mces_oracle() {
  Rng rng(707);
  std::size_t mismatches = 0;
  const int pairs = 600;
  for (int trial = 0; trial < pairs; ++trial) {
    const auto gold = random_graph(rng, 5);
    const auto sys = trial % 4 == 0 ? gold : random_graph(rng, 5);
    const auto a = metrics::mces_align(gold, sys);
    mismatches += !(a.certified && a.matched == brute_force_mces(gold, sys) &&
                    metrics::mrp_score(gold, sys, a).pooled().correct == a.matched);
  }
  std::size_t identical = 0, not_one = 0;
  while (identical < 200) {
    const auto g = random_graph(rng, 5);
    const auto a = metrics::mces_align(g, g);
    const auto s = metrics::mrp_score(g, g, a);
    if (s.pooled().gold_total == 0) continue;
    ++identical;
    not_one += s.average_f1() != 1.0;
  }
  return {mismatches == 0 && not_one == 0,
          fmt("%d pairs, %zu mismatches; %zu identical graphs, %zu below F1 1.0", pairs, mismatches, identical, not_one)};
}

// 8
Outcome edit_scripts() {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto* file : {"treebank/train.conllu", "treebank/dev.conllu"})
    for (const auto& doc : ingest_conllu(read_file(data_path(file))).documents)
      for (const auto& s : doc.sentences)
        for (const auto& t : s.tokens)
          if (t.lemma) pairs.emplace_back(t.form, *t.lemma);
  const std::vector<std::pair<std::string, std::string>> wordlist = {
      {"psa", "pes"},         {"psovi", "pes"},       {"Praze", "Praha"},     {"Prahou", "Praha"},
      {"lidé", "člověk"},     {"dětmi", "dítě"},      {"šla", "jít"},         {"půjdu", "jít"},
      {"nejlepší", "dobrý"},  {"nejkrásnější", "krásný"}, {"ženy", "žena"},   {"ženami", "žena"},
      {"USA", "USA"},         {"ČR", "ČR"},           {"Karlovi", "Karel"},   {"Brna", "Brno"},
      {"domech", "dům"},      {"koní", "kůň"},        {"rukou", "ruka"},      {"očima", "oko"},
      {"byl", "být"},         {"jsou", "být"},        {"mě", "já"},           {"nás", "my"},
      {"NEJVĚTŠÍ", "velký"},  {"Čechy", "Čech"},      {"ulicích", "ulice"},   {"nechci", "chtít"},
      {"přečetla", "přečíst"}, {"XVII.", "XVII."},    {"2020", "2020"},       {"e-mailem", "e-mail"}};
  pairs.insert(pairs.end(), wordlist.begin(), wordlist.end());
  const std::size_t real = pairs.size();

  Rng rng(808);
  const std::u32string alphabet = U"abcdeěščřžýáíéúůňťďABCŠČŘŽÝÁ-1";
  auto word = [&](std::size_t max) {
    std::u32string w;
    for (auto n = 1 + rng.uniform(max); n > 0; --n) w.push_back(alphabet[rng.uniform(alphabet.size())]);
    return utf8::encode(w);
  };
  while (pairs.size() < 5000) {
    const auto form = word(12);
    const auto cps = utf8::decode(form);
    const auto lemma = rng.uniform(2) ? word(12) : utf8::encode(cps.substr(0, cps.size() / 2 + 1)) + word(3);
    pairs.emplace_back(form, lemma);
  }

  std::size_t failures = 0;
  std::set<std::string> distinct_scripts;
  std::set<std::pair<std::string, std::string>> distinct_pairs(pairs.begin(), pairs.end());
  for (const auto& [form, lemma] : pairs) {
    const auto script = heads::derive_edit_script(form, lemma);
    failures += heads::apply_edit_script(form, script) != lemma;
    failures += heads::EditScript::parse(script.to_string()) != script;
    distinct_scripts.insert(script.to_string());
  }
  const auto inventory = heads::LemmaInventory::build(pairs);
  std::size_t counted = 0;
  for (std::size_t i = 0; i < inventory.size(); ++i) counted += inventory.frequency(i);
  const bool bound = inventory.size() == distinct_scripts.size() && inventory.size() <= distinct_pairs.size() &&
                     counted == pairs.size();
  return {failures == 0 && bound,
          fmt("%zu pairs (%zu real), %zu failures; %zu categories for %zu distinct pairs", pairs.size(), real, failures,
              inventory.size(), distinct_pairs.size())};
}

// 9
Outcome nested_ner() {
  Rng rng(909);
  std::size_t failures = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform(15));
    const auto spans = random_nested(rng, n);
    const auto stacks = heads::encode_nested(spans, static_cast<std::size_t>(n));
    std::vector<std::vector<std::string>> reread;
    for (const auto& s : stacks) reread.push_back(heads::split_stack(heads::join_stack(s)));
    failures += heads::decode_nested(reread) != spans;
  }
  return {failures == 0, fmt("10000 span sets, %zu failures", failures)};
}

// 10
Outcome conllu_eval() {
  bool ok = true;
  std::string detail;
  for (const auto* file : {"treebank/train.conllu", "treebank/dev.conllu"}) {
    const auto gold = ingest_conllu(read_file(data_path(file)));
    const auto r = metrics::eval_conllu(gold, gold);
    for (const auto& [name, c] : r.metrics()) ok = ok && fmt("%.2f", 100.0 * c.f1()) == "100.00";
  }
  detail += ok ? "gold vs gold 100.00 on all metrics; " : "gold vs gold below 100.00; ";

  auto row = [](std::initializer_list<const char*> cols) {
    std::string line;
    for (const auto* c : cols) line += (line.empty() ? "" : "\t") + std::string(c);
    return line + "\n";
  };
  const auto gold = row({"1", "Velký", "velký", "ADJ", "_", "Case=Nom", "2", "amod", "_", "_"}) +
                    row({"2", "pes", "pes", "NOUN", "_", "Case=Nom|Gender=Masc", "3", "nsubj", "_", "_"}) +
                    row({"3", "štěká", "štěkat", "VERB", "_", "_", "0", "root", "_", "_"}) +
                    row({"4", "hlasitě", "hlasitě", "ADV", "_", "Degree=Pos", "3", "advmod", "_", "_"}) + "\n";
  const auto sys = row({"1", "Velký", "velký", "ADJ", "_", "Case=Nom", "2", "amod", "_", "_"}) +
                   row({"2", "pes", "pes", "NOUN", "_", "Case=Nom|Foo=Bar|Gender=Masc", "3", "nsubj", "_", "_"}) +
                   row({"3", "ště", "ště", "VERB", "_", "_", "0", "root", "_", "_"}) +
                   row({"4", "ká", "ká", "VERB", "_", "_", "3", "dep", "_", "_"}) +
                   row({"5", "hlasitě", "hlasitý", "ADV", "_", "_", "3", "advmod", "_", "_"}) + "\n";
  const auto r = metrics::eval_conllu(ingest_conllu(gold), ingest_conllu(sys));
  // Worked table: F1 = 2c / (system + gold) with 5 system and 4 gold words.
  const std::map<std::string, double> table = {{"UPOS", 66.67}, {"XPOS", 66.67}, {"UFeats", 44.44},
                                               {"Lemmas", 44.44}, {"UAS", 22.22}, {"LAS", 22.22},
                                               {"MLAS", 22.22},  {"BLEX", 22.22}};
  std::size_t off = 0, seen = 0;
  for (const auto& [name, c] : r.metrics()) {
    const auto it = table.find(name);
    if (it == table.end()) continue;
    ++seen;
    off += std::abs(100.0 * c.f1() - it->second) >= 0.01;
  }
  ok = ok && seen == table.size() && off == 0;
  return {ok, detail + fmt("hand table %zu of %zu metrics off by >= 0.01", off, table.size())};
}

// Shared by 11 and 12.
struct MlmRun {
  bbpe::ByteVocab vocab;
  std::vector<batching::Sample> samples;
  nn::PretrainConfig config;
  nn::PretrainResult result;
  double seconds = 0.0;
};

MlmRun run_mlm(std::size_t steps) {
  Timer timer;
  MlmRun run;
  const auto corpus = ingest_plaintext(read_file(data_path("corpus.txt")));
  run.vocab = bbpe::train_bbpe(corpus, 1000);
  run.samples = batching::pack_full_sentences(corpus, run.vocab, 128);
  auto& cfg = run.config;
  cfg.model = {.layers = 2, .hidden = 64, .heads = 4, .ffn = 128, .vocab = run.vocab.size(), .max_positions = 128};
  cfg.steps = steps;
  cfg.batch_size = 8;
  cfg.schedule.kind = nn::ScheduleKind::PolynomialDecay;
  cfg.schedule.warmup_steps = 20;
  cfg.schedule.peak_lr = 3e-3;
  cfg.schedule.total_steps = static_cast<double>(steps);
  run.result = nn::pretrain_mlm(run.samples, cfg);
  run.seconds = timer.seconds();
  return run;
}

std::optional<MlmRun> g_short_run;

const MlmRun& short_run() {
  if (!g_short_run) g_short_run = run_mlm(200);
  return *g_short_run;
}

// 11
Outcome mlm_sanity() {
  const auto& a = short_run();
  std::vector<double> losses;
  for (const auto& s : a.result.log) losses.push_back(s.loss);
  const double smoothed = nn::smooth(losses).back();
  const double threshold = 0.5 * std::log(static_cast<double>(a.vocab.size()));

  const auto b = run_mlm(2000);
  const auto acc = nn::masked_accuracy(b.config.model, b.result.params, b.samples, 0.15, b.config.policy, 99, 20);
  const double secs = a.seconds + b.seconds;
  const bool ok = losses.size() == 200 && smoothed < threshold && acc.value() >= 0.99 && secs < 600.0;
  return {ok, fmt("%zu packed samples, V=%zu; 200 steps: smoothed loss %.3f (< %.3f); 2000 steps: accuracy %.2f%% over "
                  "%zu masked tokens (>= 99%%); %.0f s (< 600 s)",
                  a.samples.size(), a.vocab.size(), smoothed, threshold, 100.0 * acc.value(), acc.total, secs)};
}

// Frozen final-layer <s> vectors.
std::vector<std::vector<double>> document_vectors(const MlmRun& run, const std::vector<std::vector<int>>& ids) {
  nn::NoGradGuard guard;
  std::vector<std::vector<double>> out;
  for (const auto& row : ids) {
    const auto enc = nn::forward_transformer(run.config.model, run.result.params, row, 1, row.size());
    const auto h = enc.hidden.back().values();
    out.emplace_back(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(run.config.model.hidden));
  }
  return out;
}

// Multiclass perceptron; true once an epoch makes no mistake.
bool perceptron_separates(const std::vector<std::vector<double>>& x, const std::vector<int>& y, std::size_t classes) {
  const std::size_t d = x.front().size() + 1;
  std::vector<std::vector<double>> w(classes, std::vector<double>(d, 0.0));
  auto score = [&](std::size_t c, const std::vector<double>& v) {
    double s = w[c][d - 1];
    for (std::size_t k = 0; k + 1 < d; ++k) s += w[c][k] * v[k];
    return s;
  };
  for (int epoch = 0; epoch < 10000; ++epoch) {
    std::size_t mistakes = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto gold = static_cast<std::size_t>(y[i]);
      std::size_t rival = gold == 0 ? 1 : 0;
      for (std::size_t c = 0; c < classes; ++c)
        if (c != gold && score(c, x[i]) > score(rival, x[i])) rival = c;
      if (score(gold, x[i]) > score(rival, x[i])) continue;
      ++mistakes;
      for (std::size_t k = 0; k + 1 < d; ++k) {
        w[gold][k] += x[i][k];
        w[rival][k] -= x[i][k];
      }
      w[gold][d - 1] += 1.0;
      w[rival][d - 1] -= 1.0;
    }
    if (mistakes == 0) return true;
  }
  return false;
}

// 12
Outcome sentiment_protocol() {
  const auto& encoder = short_run();
  // 300 items, one keyword per class repeated one to three times.
  const char* keywords[] = {"špatný", "stůl", "skvělý"};
  Rng rng(1212);
  std::vector<heads::SentimentItem> data;
  for (int i = 0; i < 300; ++i) {
    heads::SentimentItem item;
    item.label = i % 3;
    for (auto k = 1 + rng.uniform(3); k > 0; --k) item.text += (item.text.empty() ? "" : " ") + std::string(keywords[item.label]);
    data.push_back(item);
  }
  std::vector<std::vector<int>> ids;
  std::vector<int> labels;
  for (const auto& item : data) {
    ids.push_back(heads::encode_for_classifier(encoder.vocab, encoder.config.model, item.text));
    labels.push_back(item.label);
  }
  const bool separable = perceptron_separates(document_vectors(encoder, ids), labels, heads::kPolarityCount);

  heads::SentimentConfig protocol;
  protocol.seed = 12;
  const auto first = heads::run_sentiment_protocol(data, encoder.config.model, encoder.result.params, encoder.vocab, protocol);
  const auto second = heads::run_sentiment_protocol(data, encoder.config.model, encoder.result.params, encoder.vocab, protocol);
  bool identical = first.selected == second.selected && first.test_mean == second.test_mean &&
                   first.test_std == second.test_std && first.grid.size() == second.grid.size();
  for (std::size_t g = 0; identical && g < first.grid.size(); ++g)
    for (std::size_t f = 0; f < first.grid[g].folds.size(); ++f)
      identical = identical && first.grid[g].folds[f].dev_f1 == second.grid[g].folds[f].dev_f1 &&
                  first.grid[g].folds[f].test_f1 == second.grid[g].folds[f].test_f1;
  const bool grid_ok = protocol.lr_grid == std::vector<double>{1e-5, 2e-5, 3e-5, 5e-5} && protocol.folds == 10 &&
                       first.grid.size() == 4 && first.grid[0].folds.size() == 10;
  const bool ok = separable && grid_ok && first.test_mean == 100.0 && first.test_std == 0.0 && identical;
  return {ok, fmt("separable %s; selected lr %g; test macro-F1 %.2f +- %.2f over %zu folds; repeat run %s",
                  separable ? "yes" : "no", first.selected_lr, first.test_mean, first.test_std,
                  first.grid[first.selected].folds.size(), identical ? "bit-identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"tokenizer losslessness", tokenizer_losslessness},
      {"tokenizer training oracle", tokenizer_oracle},
      {"schedule constants", schedule_constants},
      {"gradient checks", gradient_checks},
      {"decoder oracle", decoder_oracle},
      {"CRF oracle", crf_oracle},
      {"MCES oracle", mces_oracle},
      {"edit scripts", edit_scripts},
      {"nested NER bijection", nested_ner},
      {"eval_conllu", conllu_eval},
      {"MLM learning sanity", mlm_sanity},
      {"sentiment protocol", sentiment_protocol},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += !outcome.pass;
    std::printf("%s %2zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
