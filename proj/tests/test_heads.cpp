#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "czlm/heads/crf.hpp"
#include "czlm/heads/edit_script.hpp"
#include "czlm/heads/ner.hpp"
#include "czlm/heads/parser.hpp"
#include "czlm/heads/sentiment.hpp"
#include "czlm/heads/tagger.hpp"
#include "czlm/nn/gradcheck.hpp"
#include "czlm/nn/ops.hpp"
#include "czlm/rng.hpp"
#include "czlm/utf8.hpp"
#include "oracles.hpp"

using namespace czlm;
using namespace czlm::heads;
using namespace oracle;

namespace {

nn::Tensor random_tensor(nn::Shape shape, Rng& rng, bool grad = true) {
  std::vector<double> v(nn::shape_size(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return nn::Tensor::from(std::move(shape), std::move(v), grad);
}

Sentence make_sentence(const std::vector<std::string>& forms) {
  Sentence s;
  for (const auto& f : forms) {
    Token t;
    t.form = f;
    s.tokens.push_back(t);
  }
  return s;
}

}  // namespace

TEST_CASE("edit scripts on the documented pairs") {
  auto id = derive_edit_script("kočka", "kočka");
  CHECK(id.is_identity());
  CHECK(apply_edit_script("kočka", id) == "kočka");

  auto s = derive_edit_script("koček", "kočka");
  CHECK(apply_edit_script("koček", s) == "kočka");
  CHECK(apply_edit_script("loděk", s) == apply_edit_script("loděk", s));

  auto praha = derive_edit_script("Prahou", "Praha");
  CHECK(apply_edit_script("Prahou", praha) == "Praha");
  REQUIRE_FALSE(praha.casing.empty());
  CHECK(praha.casing.front().position == 0);
  CHECK(praha.casing.front().target == Case::Upper);
  CHECK(apply_edit_script("PRAHOU", praha) == "Praha");

  CHECK(EditScript::parse(praha.to_string()) == praha);
  CHECK(derive_edit_script("koček", "kočka") == s);
}

TEST_CASE("edit scripts reject over-consumption") {
  auto s = derive_edit_script("nejkrásnější", "krásný");
  CHECK(apply_edit_script("nejkrásnější", s) == "krásný");
  CHECK_THROWS_AS(apply_edit_script("ne", s), EditScriptError);
}

TEST_CASE("edit scripts round trip on random pairs (property)") {
  Rng rng(17);
  const std::u32string alphabet = U"abcdeěščřžýáíéúůňťďABCŠČŘŽÝÁ-1";
  auto word = [&](std::size_t max) {
    std::u32string w;
    for (auto n = 1 + rng.uniform(max); n > 0; --n) w.push_back(alphabet[rng.uniform(alphabet.size())]);
    return utf8::encode(w);
  };
  for (int i = 0; i < 3000; ++i) {
    const auto form = word(10);
    const auto lemma = rng.uniform(2) ? word(10) : form.substr(0, form.size() / 2 + 1) + word(3);
    if (!utf8::first_invalid(lemma).has_value()) {
      const auto script = derive_edit_script(form, lemma);
      REQUIRE(apply_edit_script(form, script) == lemma);
      REQUIRE(EditScript::parse(script.to_string()) == script);
    }
  }
}

TEST_CASE("lemma inventory deduplicates") {
  auto inv = LemmaInventory::build({{"psa", "pes"}, {"psem", "pes"}});
  CHECK(inv.size() == 2);
  std::vector<std::pair<std::string, std::string>> same(100, {"kočky", "kočka"});
  auto one = LemmaInventory::build(same);
  CHECK(one.size() == 1);
  CHECK(one.frequency(0) == 100);
  CHECK(one.find(derive_edit_script("kočky", "kočka")) == 0);
  CHECK(one.find(derive_edit_script("psa", "pes")) == -1);

  auto ordered = LemmaInventory::build({{"psa", "pes"}, {"kočky", "kočka"}, {"žáby", "žába"}});
  CHECK(ordered.frequency(0) == 2);
  CHECK(ordered.script(0) == derive_edit_script("kočky", "kočka"));
}

TEST_CASE("biaffine hand cases") {
  auto H = nn::Tensor::from({2, 2}, {1, 0, 0, 1});
  auto D = nn::Tensor::from({1, 2}, {1, 1});
  auto U = nn::Tensor::from({1, 2, 2}, {2, 0, 0, 5});
  auto zero2 = nn::Tensor::zeros({1, 2});
  auto out = biaffine(H, D, U, zero2, zero2, nn::Tensor::zeros({1}));
  CHECK(out.shape() == nn::Shape{1, 2});
  CHECK(out[0] == 2.0);
  CHECK(out[1] == 5.0);

  auto b3 = biaffine(H, D, nn::Tensor::zeros({1, 2, 2}), zero2, zero2, nn::Tensor::from({1}, {3.0}));
  CHECK(b3[0] == 3.0);
  CHECK(b3[1] == 3.0);
  CHECK_THROWS(biaffine(H, nn::Tensor::zeros({1, 3}), U, zero2, zero2, nn::Tensor::zeros({1})));
}

TEST_CASE("biaffine gradient check") {
  Rng rng(4);
  nn::ParameterSet p;
  p.add("H", random_tensor({4, 3}, rng));
  p.add("D", random_tensor({3, 2}, rng));
  p.add("U", random_tensor({2, 3, 2}, rng));
  p.add("u", random_tensor({2, 3}, rng));
  p.add("v", random_tensor({2, 2}, rng));
  p.add("b", random_tensor({2}, rng));
  auto loss = [&] {
    auto s = biaffine(p["H"], p["D"], p["U"], p["u"], p["v"], p["b"]);
    return nn::softmax_cross_entropy(s, {1, 6, 3});
  };
  auto report = nn::gradient_check(loss, p);
  CHECK(report.max_error() < 1e-6);
}

TEST_CASE("decode_tree small cases") {
  DepArcScores one;
  one.n = 1;
  one.arc = {0.5, 0.0};
  CHECK(decode_tree(one).heads == std::vector<std::size_t>{0});

  // Greedy argmax picks 1 <- 2 and 2 <- 1, a cycle.
  DepArcScores cyc;
  cyc.n = 2;
  cyc.arc = {1.0, 0.0, /*head 1*/ -1.0, 5.0, /*head 2*/ 4.0, -1.0};
  auto t = decode_tree(cyc);
  CHECK(is_valid_tree(t.heads));
  CHECK(t.score == doctest::Approx(brute_force_tree(cyc, true)));
  CHECK(t.heads == std::vector<std::size_t>{0, 1});

  DepArcScores bad = cyc;
  bad.arc[0] = std::nan("");
  CHECK_THROWS(decode_tree(bad));
}

TEST_CASE("decode_tree matches brute force (property)") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform(5);
    auto s = random_scores(n, 3, rng);
    for (bool single : {true, false}) {
      auto t = decode_tree(s, single);
      REQUIRE(reaches_root(t.heads));
      if (single) CHECK(std::count(t.heads.begin(), t.heads.end(), 0u) == 1);
      double total = 0.0;
      for (std::size_t j = 1; j <= n; ++j) total += s.arc_score(t.heads[j - 1], j);
      CHECK(total == doctest::Approx(t.score).epsilon(1e-12));
      REQUIRE(std::abs(total - brute_force_tree(s, single)) < 1e-9);
      for (std::size_t j = 1; j <= n; ++j) {
        const auto h = t.heads[j - 1];
        std::size_t arg = 0;
        for (std::size_t r = 1; r < 3; ++r)
          if (s.label_score(h, j, r) > s.label_score(h, j, arg)) arg = r;
        CHECK(t.labels[j - 1] == arg);
      }
    }
  }
}

TEST_CASE("is_valid_tree") {
  CHECK(is_valid_tree({0, 1, 1}));
  CHECK_FALSE(is_valid_tree({2, 1}));
  CHECK_FALSE(is_valid_tree({0, 2}));
  CHECK_FALSE(is_valid_tree({0, 5}));
}

TEST_CASE("crf uniform partition") {
  for (std::size_t L = 1; L <= 4; ++L)
    for (std::size_t n = 1; n <= 5; ++n) {
      std::vector<double> E(n * L, 0.0), T(L * L, 0.0);
      CHECK(crf_log_partition(E, T, L, CrfConstraints::none(L)) ==
            doctest::Approx(static_cast<double>(n) * std::log(static_cast<double>(L))).epsilon(1e-12));
    }
}

TEST_CASE("crf matches exhaustive enumeration (property)") {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform(5), L = 1 + rng.uniform(4);
    std::vector<double> E(n * L), T(L * L);
    for (auto& x : E) x = rng.uniform(-3.0, 3.0);
    for (auto& x : T) x = rng.uniform(-3.0, 3.0);
    auto c = CrfConstraints::none(L);
    auto oracle = enumerate_paths(E, T, n, L, c);
    CHECK(std::abs(crf_log_partition(E, T, L, c) - oracle.log_partition) < 1e-8);
    auto best = crf_viterbi(E, T, L, c);
    CHECK(std::abs(crf_path_score(E, T, L, best) - oracle.best_score) < 1e-9);
    CHECK(crf_log_partition(E, T, L, c) >= oracle.best_score - 1e-12);
  }
}

TEST_CASE("crf BIO constraints") {
  const std::vector<std::string> tags = {"O", "B-PER", "I-PER", "B-LOC", "I-LOC"};
  auto c = CrfConstraints::bio(tags);
  CHECK(c.permits({0, 1, 2, 2, 0}));
  CHECK_FALSE(c.permits({2, 0}));
  CHECK_FALSE(c.permits({1, 4}));
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform(4);
    std::vector<double> E(n * 5), T(25);
    for (auto& x : E) x = rng.uniform(-3.0, 3.0);
    for (auto& x : T) x = rng.uniform(-3.0, 3.0);
    auto oracle = enumerate_paths(E, T, n, 5, c);
    CHECK(std::abs(crf_log_partition(E, T, 5, c) - oracle.log_partition) < 1e-8);
    CHECK(crf_viterbi(E, T, 5, c) == oracle.best);
  }
  auto E = nn::Tensor::zeros({2, 5}, true);
  auto T = nn::Tensor::zeros({5, 5}, true);
  CHECK_THROWS_AS(crf_nll(E, T, {0, 2}, c), InvalidTagSequenceError);
}

TEST_CASE("crf loss gradient check") {
  Rng rng(21);
  const std::vector<std::string> tags = {"O", "B-PER", "I-PER"};
  auto c = CrfConstraints::bio(tags);
  nn::ParameterSet p;
  p.add("E", random_tensor({4, 3}, rng));
  p.add("T", random_tensor({3, 3}, rng));
  auto loss = [&] { return crf_nll(p["E"], p["T"], {1, 2, 0, 1}, c); };
  const double nll = loss().item();
  auto oracle = enumerate_paths({p["E"].values().begin(), p["E"].values().end()},
                                {p["T"].values().begin(), p["T"].values().end()}, 4, 3, c);
  const double gold = crf_path_score({p["E"].values().begin(), p["E"].values().end()},
                                     {p["T"].values().begin(), p["T"].values().end()}, 3, {1, 2, 0, 1});
  CHECK(nll == doctest::Approx(oracle.log_partition - gold).epsilon(1e-10));
  CHECK(nn::gradient_check(loss, p).max_error() < 1e-3);
}

TEST_CASE("nested encoding examples") {
  auto stacks = encode_nested({{1, 3, "ORG"}, {3, 3, "LOC"}}, 3);
  CHECK(stacks[0] == std::vector<std::string>{"B-ORG"});
  CHECK(stacks[2] == std::vector<std::string>{"I-ORG", "B-LOC"});
  CHECK(join_stack(stacks[2]) == "I-ORG|B-LOC");
  CHECK(split_stack("I-ORG|B-LOC") == stacks[2]);
  auto empty = encode_nested({}, 4);
  for (const auto& s : empty) {
    CHECK(s.empty());
    CHECK(join_stack(s) == "O");
  }
  CHECK_THROWS_AS(encode_nested({{1, 2, "PER"}, {2, 3, "LOC"}}, 3), IllNestedError);
}

TEST_CASE("nested encoding round trips (property)") {
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform(12));
    auto spans = random_nested(rng, n);
    auto stacks = encode_nested(spans, static_cast<std::size_t>(n));
    std::vector<std::vector<std::string>> through_strings;
    for (const auto& s : stacks) through_strings.push_back(split_stack(join_stack(s)));
    REQUIRE(decode_nested(through_strings) == spans);
  }
}

TEST_CASE("flat BIO and span lists") {
  std::vector<EntitySpan> spans = {{1, 2, "PER"}, {4, 4, "LOC"}};
  auto tags = encode_bio(spans, 5);
  CHECK(tags == std::vector<std::string>{"B-PER", "I-PER", "O", "B-LOC", "O"});
  CHECK(decode_bio(tags) == spans);
  CHECK(decode_bio({"I-PER", "I-PER", "O"}) == std::vector<EntitySpan>{{1, 2, "PER"}});
  CHECK_THROWS(encode_bio({{1, 2, "PER"}, {2, 2, "LOC"}}, 3));
  CHECK(parse_span_list(format_span_list(spans)) == spans);
  try {
    parse_span_list("1\t2\tPER\nbad line\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("tagger output shapes and gradient check") {
  std::vector<Sentence> train;
  {
    auto s = make_sentence({"Pes", "štěká", "."});
    const char* upos[] = {"NOUN", "VERB", "PUNCT"};
    const char* lemma[] = {"pes", "štěkat", "."};
    const int head[] = {2, 0, 2};
    const char* rel[] = {"nsubj", "root", "punct"};
    for (int i = 0; i < 3; ++i) {
      s.tokens[i].upos = upos[i];
      s.tokens[i].xpos = upos[i];
      s.tokens[i].lemma = lemma[i];
      s.tokens[i].ufeats = std::vector<Feature>{};
      s.tokens[i].head = head[i];
      s.tokens[i].deprel = rel[i];
    }
    train.push_back(s);
  }
  TaggerConfig cfg{.word_dim = 4, .char_dim = 3, .char_hidden = 3, .hidden = 4, .rnn_layers = 1, .arc_dim = 3, .label_dim = 2};
  JointTagger model(cfg, TaggerVocab::build(train), 0, 0, 3);
  auto out = model.forward(train[0], nullptr);
  CHECK(out.upos.shape() == nn::Shape{3, model.vocab().upos.size()});
  CHECK(out.lemma.shape() == nn::Shape{3, model.vocab().lemmas.size()});
  CHECK(out.arcs.shape() == nn::Shape{3, 4});
  CHECK(out.labels.shape() == nn::Shape{3, 4 * model.vocab().deprels.size()});

  auto report = nn::gradient_check([&] { return model.loss(train[0], nullptr); }, model.params(),
                                   {.max_coordinates = 6, .seed = 2});
  CHECK(report.max_error() < 1e-3);
}

TEST_CASE("tagger memorizes a small training set") {
  const std::vector<std::pair<std::string, std::string>> lexicon = {
      {"pes", "NOUN"}, {"kočka", "NOUN"}, {"dům", "NOUN"},  {"běží", "VERB"}, {"spí", "VERB"},
      {"velký", "ADJ"}, {"malá", "ADJ"},  {"rychle", "ADV"}, {"a", "CCONJ"},  {".", "PUNCT"}};
  Rng rng(30);
  std::vector<Sentence> train;
  for (int i = 0; i < 30; ++i) {
    Sentence s;
    for (auto n = 3 + rng.uniform(5); n > 0; --n) {
      const auto& [form, tag] = lexicon[rng.uniform(lexicon.size())];
      Token t;
      t.form = form;
      t.upos = tag;
      t.xpos = tag;
      t.lemma = form;
      s.tokens.push_back(t);
    }
    train.push_back(s);
  }
  TaggerConfig cfg{.word_dim = 16, .char_dim = 8, .char_hidden = 8, .hidden = 16, .rnn_layers = 1, .parse = false};
  JointTagger model(cfg, TaggerVocab::build(train), 0, 0, 1);
  train_tagger(model, train, {}, {.steps = 300, .batch_size = 8, .lr = 1e-2, .seed = 1});
  std::size_t correct = 0, total = 0;
  for (const auto& s : train) {
    auto pred = model.predict(s, nullptr);
    for (std::size_t i = 0; i < s.size(); ++i, ++total) correct += pred.tokens[i].upos == s.tokens[i].upos;
  }
  CHECK(correct == total);
}

TEST_CASE("sentiment TSV") {
  auto items = parse_sentiment_tsv("p\tskvělé\nn\tstrašné\n0\tnormální\n");
  REQUIRE(items.size() == 3);
  CHECK(items[0].label == kPositive);
  CHECK(items[1].label == kNegative);
  CHECK(items[2].label == kNeutral);
  CHECK(format_sentiment_tsv(items) == "p\tskvělé\nn\tstrašné\n0\tnormální\n");
  CHECK_THROWS(parse_sentiment_tsv("x\ttext\n"));
}

TEST_CASE("sentiment fold freezes the encoder and follows the schedule") {
  nn::TransformerConfig tc{.layers = 1, .hidden = 8, .heads = 2, .ffn = 16, .vocab = 20, .max_positions = 16};
  auto encoder = init_transformer(tc, 1);
  std::vector<std::vector<int>> ids;
  std::vector<int> labels;
  for (int i = 0; i < 24; ++i) {
    ids.push_back({bbpe::kBos, 5 + i % 3, 8 + i % 5, bbpe::kEos});
    labels.push_back(i % 3);
  }
  FoldSplit split;
  for (int i = 0; i < 24; ++i) (i < 16 ? split.train_ids : i < 20 ? split.dev_ids : split.test_ids).push_back(std::to_string(i));
  SentimentConfig protocol;
  protocol.batch_size = 8;
  protocol.schedule.warmup_epochs = 1;
  protocol.schedule.decay_epochs = 2;

  bool frozen_checked = false;
  std::vector<StepTrace> traces;
  FoldHooks hooks;
  hooks.after_epoch = [&](std::size_t epoch, const SentimentModel& model) {
    if (epoch != 1) return;
    for (const auto& [name, t] : encoder) {
      const auto& after = model.params()[name];
      CHECK(std::equal(t.values().begin(), t.values().end(), after.values().begin()));
    }
    frozen_checked = true;
  };
  hooks.on_step = [&](const StepTrace& t) { traces.push_back(t); };
  auto a = run_sentiment_fold(ids, labels, split, tc, encoder, protocol, 3e-5, 7, hooks);
  CHECK(frozen_checked);
  REQUIRE(traces.size() == 4 * 2);
  auto sched = protocol.schedule;
  sched.peak_lr = 3e-5;
  for (const auto& t : traces) {
    if (t.epoch == 1) {
      CHECK(t.lr == 1e-3);
    } else {
      CHECK(t.lr == nn::schedule_lr(sched, t.position));
      if (t.position == std::floor(t.position)) CHECK(t.position == static_cast<double>(t.epoch - 2));
    }
  }
  auto b = run_sentiment_fold(ids, labels, split, tc, encoder, protocol, 3e-5, 7);
  CHECK(a.dev_f1 == b.dev_f1);
  CHECK(a.test_f1 == b.test_f1);

  FoldSplit empty = split;
  empty.test_ids.clear();
  CHECK_THROWS(run_sentiment_fold(ids, labels, empty, tc, encoder, protocol, 3e-5, 7));
}
