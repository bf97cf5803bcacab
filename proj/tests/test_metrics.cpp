#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "czlm/corpus.hpp"
#include "czlm/metrics/basic.hpp"
#include "czlm/metrics/conllu_eval.hpp"
#include "czlm/metrics/mrp.hpp"
#include "czlm/metrics/report.hpp"
#include "czlm/rng.hpp"
#include "oracles.hpp"

using namespace czlm;
using namespace czlm::metrics;
using namespace oracle;

namespace {

// One CoNLL-U word line from its ten columns.
std::string row(std::initializer_list<std::string> cols) {
  std::string line;
  for (const auto& c : cols) line += (line.empty() ? "" : "\t") + c;
  return line + "\n";
}

double pct(const PrfCounts& c) { return 100.0 * c.f1(); }

MrpGraph two_node_graph() {
  return parse_mrp_graph(
      R"({"id":"1","input":"pes spí","tops":[1],"nodes":[{"id":0,"label":"pes","anchors":[{"from":0,"to":3}]},)"
      R"({"id":1,"label":"spát","properties":["tense"],"values":["pres"]}],)"
      R"("edges":[{"source":1,"target":0,"label":"ACT","attributes":["remote"],"values":["false"]}]})");
}

}  // namespace

TEST_CASE("prf counts and zero denominators") {
  PrfCounts c{2, 4, 3};
  CHECK(c.precision() == 0.5);
  CHECK(c.recall() == doctest::Approx(2.0 / 3.0));
  CHECK(c.f1() == doctest::Approx(4.0 / 7.0));
  CHECK(PrfCounts{}.f1() == 0.0);
  CHECK(PrfCounts{0, 0, 5}.precision() == 0.0);
}

TEST_CASE("span F1 examples") {
  std::vector<EntitySpan> gold = {{1, 2, "PER"}};
  CHECK(span_f1(gold, gold).f1() == 1.0);
  auto c = span_f1(gold, {{1, 2, "PER"}, {3, 4, "LOC"}});
  CHECK(c.precision() == 0.5);
  CHECK(c.recall() == 1.0);
  CHECK(c.f1() == doctest::Approx(2.0 / 3.0));
  CHECK(span_f1(gold, {}).f1() == 0.0);
  CHECK(span_f1({{1, 1, "A"}, {1, 1, "A"}}, {{1, 1, "A"}}).correct == 1);
}

TEST_CASE("span F1 monotonicity (property)") {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<EntitySpan> gold, sys;
    for (auto n = rng.uniform(6); n > 0; --n) gold.push_back({1 + (int)rng.uniform(5), 6 + (int)rng.uniform(3), "X"});
    for (auto n = rng.uniform(6); n > 0; --n) sys.push_back({1 + (int)rng.uniform(5), 6 + (int)rng.uniform(3), "X"});
    const auto base = span_f1(gold, sys);
    auto extra = sys;
    extra.push_back({100, 100, "X"});
    CHECK(span_f1(gold, extra).precision() <= base.precision());
    if (!gold.empty()) {
      auto more = gold;
      more.push_back({50, 50, "Y"});
      auto sys_more = sys;
      sys_more.push_back({50, 50, "Y"});
      CHECK(span_f1(more, sys_more).f1() >= span_f1(more, sys).f1());
    }
  }
}

TEST_CASE("macro F1 examples") {
  CHECK(macro_f1({{3, 0}, {0, 4}}) == 100.0);
  // Label 1: P = 5/5, R = 5/10 -> 2/3. Label 2: P = 10/15, R = 10/10 -> 4/5.
  CHECK(macro_f1({{5, 5}, {0, 10}}) == doctest::Approx(100.0 * (2.0 / 3.0 + 0.8) / 2.0));
  CHECK(macro_f1({{5, 5}, {0, 10}}) == doctest::Approx(73.333).epsilon(1e-4));
  CHECK(macro_f1({{2, 0, 0}, {0, 2, 0}, {0, 0, 0}}) == 100.0);
  CHECK(macro_f1({{2, 0, 0}, {0, 1, 1}, {0, 0, 0}}) == doctest::Approx(100.0 * (1.0 + 2.0 / 3.0 + 0.0) / 3.0));
  CHECK(confusion_matrix({0, 1, 1}, {0, 0, 1}, 2) == ConfusionMatrix{{1, 0}, {1, 1}});
}

TEST_CASE("fold aggregation") {
  auto a = aggregate_folds({70, 90});
  CHECK(a.mean == 80.0);
  CHECK(a.stddev == 10.0);
  CHECK(aggregate_folds({5, 5, 5}).stddev == 0.0);
  CHECK(aggregate_folds({42}).mean == 42.0);
  CHECK_THROWS(aggregate_folds({}));
}

TEST_CASE("conllu eval identity") {
  std::string text = "# newdoc id = a\n";
  text += row({"1-2", "abych", "_", "_", "_", "_", "_", "_", "_", "_"});
  text += row({"1", "aby", "aby", "SCONJ", "J,", "_", "3", "mark", "_", "_"});
  text += row({"2", "bych", "být", "AUX", "Vc", "Mood=Cnd|Person=1", "3", "aux", "_", "_"});
  text += row({"3", "šel", "jít", "VERB", "Vp", "Gender=Masc|Foo=Bar", "0", "root", "_", "_"});
  text += "\n";
  auto g = ingest_conllu(text);
  auto r = eval_conllu(g, g);
  for (const auto& [name, c] : r.metrics()) CHECK_MESSAGE(pct(c) == 100.0, name);
  CHECK(pct(r.words) == 100.0);
}

TEST_CASE("conllu eval counts one wrong head") {
  auto build = [](int wrong_head) {
    std::string text;
    for (int i = 1; i <= 10; ++i) {
      const int head = i == 1 ? 0 : (i == 5 ? wrong_head : 1);
      text += row({std::to_string(i), "w" + std::to_string(i), "_", "X", "_", "_", std::to_string(head),
                   i == 1 ? "root" : "dep", "_", "_"});
    }
    return ingest_conllu(text + "\n");
  };
  auto r = eval_conllu(build(1), build(3));
  CHECK(pct(r.uas) == doctest::Approx(90.0));
  CHECK(pct(r.las) == doctest::Approx(90.0));
  CHECK(pct(r.upos) == 100.0);
}

TEST_CASE("conllu eval on a split token, worked by hand") {
  // Gold: Velký pes štěká hlasitě. System splits štěká into ště + ká, so 3 of 4 gold words
  // and 3 of 5 system words align; arcs into ště cannot align.
  std::string gold = row({"1", "Velký", "velký", "ADJ", "_", "Case=Nom", "2", "amod", "_", "_"}) +
                     row({"2", "pes", "pes", "NOUN", "_", "Case=Nom|Gender=Masc", "3", "nsubj", "_", "_"}) +
                     row({"3", "štěká", "štěkat", "VERB", "_", "_", "0", "root", "_", "_"}) +
                     row({"4", "hlasitě", "hlasitě", "ADV", "_", "Degree=Pos", "3", "advmod", "_", "_"}) + "\n";
  std::string sys = row({"1", "Velký", "velký", "ADJ", "_", "Case=Nom", "2", "amod", "_", "_"}) +
                    row({"2", "pes", "pes", "NOUN", "_", "Case=Nom|Foo=Bar|Gender=Masc", "3", "nsubj", "_", "_"}) +
                    row({"3", "ště", "ště", "VERB", "_", "_", "0", "root", "_", "_"}) +
                    row({"4", "ká", "ká", "VERB", "_", "_", "3", "dep", "_", "_"}) +
                    row({"5", "hlasitě", "hlasitý", "ADV", "_", "_", "3", "advmod", "_", "_"}) + "\n";
  auto r = eval_conllu(ingest_conllu(gold), ingest_conllu(sys));
  // metric: correct / system / gold -> F1 = 2c / (s + g)
  // Words  3/5/4 66.67 | UPOS 3 66.67 | XPOS 3 66.67 | UFeats 2 (hlasitě differs) 44.44
  // Lemmas 2 (hlasitý) 44.44 | UAS 1 (only Velký -> pes) 22.22 | LAS 1 22.22
  // MLAS, BLEX: content words 5 system, 4 gold; only Velký 22.22
  struct Expected {
    const PrfCounts* c;
    std::size_t correct, system, gold;
    double f1;
  } table[] = {{&r.words, 3, 5, 4, 66.67},  {&r.upos, 3, 5, 4, 66.67},  {&r.xpos, 3, 5, 4, 66.67},
               {&r.ufeats, 2, 5, 4, 44.44}, {&r.lemmas, 2, 5, 4, 44.44}, {&r.uas, 1, 5, 4, 22.22},
               {&r.las, 1, 5, 4, 22.22},    {&r.mlas, 1, 5, 4, 22.22},   {&r.blex, 1, 5, 4, 22.22}};
  for (const auto& e : table) {
    CHECK(e.c->correct == e.correct);
    CHECK(e.c->system_total == e.system);
    CHECK(e.c->gold_total == e.gold);
    CHECK(std::abs(pct(*e.c) - e.f1) < 0.01);
  }
}

TEST_CASE("conllu eval MLAS checks function-word children") {
  std::string gold = row({"1", "v", "v", "ADP", "_", "_", "2", "case", "_", "_"}) +
                     row({"2", "domě", "dům", "NOUN", "_", "_", "0", "root", "_", "_"}) + "\n";
  std::string sys = row({"1", "v", "v", "ADP", "_", "_", "2", "mark", "_", "_"}) +
                    row({"2", "domě", "dům", "NOUN", "_", "_", "0", "root", "_", "_"}) + "\n";
  auto r = eval_conllu(ingest_conllu(gold), ingest_conllu(sys));
  CHECK(pct(r.las) == doctest::Approx(50.0));
  CHECK(r.mlas == PrfCounts{0, 1, 1});
  CHECK(r.blex == PrfCounts{1, 1, 1});
}

TEST_CASE("conllu eval aligns multiword tokens by LCS") {
  std::string gold = row({"1-2", "abych", "_", "_", "_", "_", "_", "_", "_", "_"}) +
                     row({"1", "aby", "aby", "SCONJ", "_", "_", "3", "mark", "_", "_"}) +
                     row({"2", "bych", "být", "AUX", "_", "_", "3", "aux", "_", "_"}) +
                     row({"3", "šel", "jít", "VERB", "_", "_", "0", "root", "_", "_"}) + "\n";
  std::string sys = row({"1", "abych", "abych", "SCONJ", "_", "_", "2", "mark", "_", "_"}) +
                    row({"2", "šel", "jít", "VERB", "_", "_", "0", "root", "_", "_"}) + "\n";
  auto r = eval_conllu(ingest_conllu(gold), ingest_conllu(sys));
  CHECK(r.words == PrfCounts{1, 2, 3});
  CHECK(r.uas == PrfCounts{1, 2, 3});

  std::string sys_mwt = row({"1-2", "abych", "_", "_", "_", "_", "_", "_", "_", "_"}) +
                        row({"1", "Aby", "aby", "SCONJ", "_", "_", "3", "mark", "_", "_"}) +
                        row({"2", "ch", "být", "AUX", "_", "_", "3", "aux", "_", "_"}) +
                        row({"3", "šel", "jít", "VERB", "_", "_", "0", "root", "_", "_"}) + "\n";
  auto m = eval_conllu(ingest_conllu(gold), ingest_conllu(sys_mwt));
  CHECK(m.words == PrfCounts{2, 3, 3});
}

TEST_CASE("conllu eval rejects different texts") {
  auto a = ingest_conllu(row({"1", "pes", "_", "_", "_", "_", "0", "root", "_", "_"}) + "\n");
  auto b = ingest_conllu(row({"1", "kos", "_", "_", "_", "_", "0", "root", "_", "_"}) + "\n");
  CHECK_THROWS_AS(eval_conllu(a, b), AlignmentError);
}

TEST_CASE("conllu eval identity and order independence (property)") {
  Rng rng(6);
  const char* tags[] = {"NOUN", "VERB", "ADP", "DET"};
  const char* rels[] = {"nsubj", "obj", "case", "det", "amod"};
  for (int trial = 0; trial < 50; ++trial) {
    Corpus c;
    c.documents.emplace_back();
    for (auto s = 1 + rng.uniform(4); s > 0; --s) {
      Sentence sent;
      const auto n = 1 + rng.uniform(7);
      for (std::size_t i = 0; i < n; ++i) {
        Token t;
        t.form = "w" + std::to_string(rng.uniform(20));
        t.lemma = t.form;
        t.upos = tags[rng.uniform(4)];
        t.head = i == 0 ? 0 : static_cast<int>(rng.uniform(i)) + 1;
        t.deprel = i == 0 ? "root" : rels[rng.uniform(5)];
        t.ufeats = std::vector<Feature>{{"Case", "Nom"}};
        sent.tokens.push_back(t);
      }
      c.documents[0].sentences.push_back(sent);
    }
    auto r = eval_conllu(c, c);
    for (const auto& [name, counts] : r.metrics()) CHECK(pct(counts) == 100.0);

    auto perturbed = c;
    for (auto& s : perturbed.documents[0].sentences)
      for (auto& t : s.tokens)
        if (rng.uniform(3) == 0) t.upos = "X";
    auto reversed = perturbed;
    auto reversed_gold = c;
    std::reverse(reversed.documents[0].sentences.begin(), reversed.documents[0].sentences.end());
    std::reverse(reversed_gold.documents[0].sentences.begin(), reversed_gold.documents[0].sentences.end());
    CHECK(eval_conllu(c, perturbed).upos == eval_conllu(reversed_gold, reversed).upos);
  }
}

TEST_CASE("mrp json round trip and validation") {
  auto g = two_node_graph();
  CHECK(g.nodes.size() == 2);
  CHECK(g.nodes[1].properties == std::vector<std::pair<std::string, std::string>>{{"tense", "pres"}});
  CHECK(g.edges[0].attributes.size() == 1);
  CHECK(parse_mrp_graph(format_mrp_graph(g)).nodes[0].anchors == g.nodes[0].anchors);
  CHECK_THROWS_AS(parse_mrp_graph(R"({"id":"x","nodes":[{"id":0}],"edges":[{"source":0,"target":5}]})"),
                  MrpFormatError);
  CHECK_THROWS_AS(parse_mrp_graph(R"({"id":"x","input":"ab","nodes":[{"id":0,"anchors":[{"from":1,"to":4}]}]})"),
                  MrpFormatError);
  std::istringstream lines(format_mrp_graph(g) + "\n\n" + format_mrp_graph(g) + "\n");
  CHECK(read_mrp(lines).size() == 2);
  std::istringstream broken(format_mrp_graph(g) + "\n{not json\n");
  CHECK_THROWS_AS(read_mrp(broken), MrpFormatError);
}

TEST_CASE("mrp identical graphs score 1") {
  auto g = two_node_graph();
  auto a = mces_align(g, g);
  CHECK(a.certified);
  CHECK(a.system_to_gold == std::vector<int>{0, 1});
  auto s = mrp_score(g, g, a);
  CHECK(s.average_f1() == 1.0);
  for (const auto& [name, c] : s.facets())
    if (c.gold_total) CHECK_MESSAGE(c.f1() == 1.0, name);
}

TEST_CASE("mrp extra isolated node") {
  auto gold = two_node_graph();
  auto sys = gold;
  sys.nodes.push_back({7, std::string("navíc"), {}, {}});
  auto a = mces_align(gold, sys);
  CHECK(a.system_to_gold[0] == 0);
  CHECK(a.system_to_gold[1] == 1);
  CHECK(a.system_to_gold[2] == -1);
  auto s = mrp_score(gold, sys, a);
  CHECK(s.edges.correct == 1);
  CHECK(s.labels == PrfCounts{2, 3, 2});
}

TEST_CASE("mrp labels are independent of structure") {
  auto gold = two_node_graph();
  auto sys = gold;
  for (auto& n : sys.nodes) n.label = "špatně";
  MrpAlignment identity{{0, 1}, 0, false};
  auto s = mrp_score(gold, sys, identity);
  CHECK(s.labels.f1() == 0.0);
  CHECK(s.edges.f1() == 1.0);
  CHECK(mrp_score(gold, sys, mces_align(gold, sys)).edges.f1() == 1.0);
}

TEST_CASE("mrp hand 3-node example") {
  // Gold: 0 spát(top) -ACT-> 1 pes, 0 -LOC-> 2 zahrada. System swaps the LOC target's
  // label and drops the top; the best mapping is the identity.
  auto gold = parse_mrp_graph(
      R"({"id":"h","input":"pes spí na zahradě","tops":[0],"nodes":[{"id":0,"label":"spát"},{"id":1,"label":"pes"},)"
      R"({"id":2,"label":"zahrada"}],"edges":[{"source":0,"target":1,"label":"ACT"},{"source":0,"target":2,"label":"LOC"}]})");
  auto sys = parse_mrp_graph(
      R"({"id":"h","input":"pes spí na zahradě","tops":[],"nodes":[{"id":5,"label":"pes"},{"id":6,"label":"spát"},)"
      R"({"id":7,"label":"dům"}],"edges":[{"source":6,"target":5,"label":"ACT"},{"source":6,"target":7,"label":"LOC"}]})");
  auto a = mces_align(gold, sys);
  CHECK(a.system_to_gold == std::vector<int>{1, 0, 2});
  CHECK(a.matched == brute_force_mces(gold, sys));
  auto s = mrp_score(gold, sys, a);
  CHECK(s.tops == PrfCounts{0, 0, 1});
  CHECK(s.labels == PrfCounts{2, 3, 3});
  CHECK(s.edges == PrfCounts{2, 2, 2});
  // Pooled: 4 correct of 5 system and 6 gold items.
  CHECK(s.average_f1() == doctest::Approx(8.0 / 11.0));
}

TEST_CASE("mrp search equals brute force (property)") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    auto gold = random_graph(rng, 5);
    auto sys = rng.uniform(3) == 0 ? gold : random_graph(rng, 5);
    auto a = mces_align(gold, sys);
    REQUIRE(a.certified);
    CHECK(a.matched == brute_force_mces(gold, sys));
    CHECK(a.matched == oracle_matched(gold, sys, a.system_to_gold));
    CHECK(mrp_score(gold, sys, a).pooled().correct == a.matched);
  }
}

TEST_CASE("mrp beyond the exact limit uses hill climbing") {
  MrpGraph g;
  g.id = "big";
  for (int i = 0; i < 12; ++i) {
    g.nodes.push_back({i, "n" + std::to_string(i), {}, {}});
    if (i) g.edges.push_back({i - 1, i, "NEXT", {}});
  }
  auto sys = g;
  std::reverse(sys.nodes.begin(), sys.nodes.end());
  auto a = mces_align(g, sys);
  CHECK_FALSE(a.certified);
  CHECK(mrp_score(g, sys, a).average_f1() == 1.0);
  CHECK(mces_align(g, sys, 12).certified);
}

TEST_CASE("mrp score rejects bad alignments") {
  auto g = two_node_graph();
  CHECK_THROWS_AS(mrp_score(g, g, {{0}, 0, false}), std::invalid_argument);
  CHECK_THROWS_AS(mrp_score(g, g, {{0, 5}, 0, false}), std::invalid_argument);
  CHECK_THROWS_AS(mrp_score(g, g, {{1, 1}, 0, false}), std::invalid_argument);
}

TEST_CASE("metric report formats") {
  MetricRows rows = {{"UPOS", {9, 10, 10}}, {"LAS", {1, 2, 4}}};
  const auto table = format_metric_table(rows, true);
  CHECK(table.find("90.00") != std::string::npos);
  CHECK(table.find("33.33") != std::string::npos);
  std::istringstream lines(table);
  std::set<std::size_t> widths;
  for (std::string line; std::getline(lines, line);) widths.insert(line.size());
  CHECK(widths.size() == 1);
  auto j = nlohmann::json::parse(format_metric_json(rows, true));
  CHECK(j["UPOS"]["f1"].get<double>() == doctest::Approx(90.0));
  CHECK(j["LAS"]["gold"].get<int>() == 4);
}
