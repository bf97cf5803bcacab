#include "czlm/metrics/mrp.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "czlm/rng.hpp"
#include "czlm/utf8.hpp"

namespace czlm::metrics {

using nlohmann::json;

int MrpGraph::node_index(int node_id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == node_id) return static_cast<int>(i);
  return -1;
}

void MrpGraph::validate() const {
  std::set<int> ids;
  for (const auto& n : nodes)
    if (!ids.insert(n.id).second) throw MrpFormatError("graph " + id + ": duplicate node id " + std::to_string(n.id));
  for (int t : tops)
    if (!ids.count(t)) throw MrpFormatError("graph " + id + ": top " + std::to_string(t) + " is not a node");
  for (const auto& e : edges)
    if (!ids.count(e.source) || !ids.count(e.target))
      throw MrpFormatError("graph " + id + ": edge " + std::to_string(e.source) + " -> " + std::to_string(e.target) +
                           " has a missing endpoint");
  const auto length = static_cast<int>(utf8::length(input));
  for (const auto& n : nodes)
    for (auto [from, to] : n.anchors)
      if (from < 0 || from > to || to > length)
        throw MrpFormatError("graph " + id + ": anchor [" + std::to_string(from) + ", " + std::to_string(to) +
                             ") outside the input");
}

namespace {

std::vector<std::pair<std::string, std::string>> read_pairs(const json& obj, const char* names, const char* values) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!obj.contains(names)) return out;
  const auto& n = obj.at(names);
  const auto& v = obj.at(values);
  if (n.size() != v.size()) throw MrpFormatError(std::string(names) + " and " + values + " differ in length");
  for (std::size_t i = 0; i < n.size(); ++i)
    out.emplace_back(n[i].get<std::string>(), v[i].is_string() ? v[i].get<std::string>() : v[i].dump());
  return out;
}

void write_pairs(json& obj, const std::vector<std::pair<std::string, std::string>>& pairs, const char* names,
                 const char* values) {
  if (pairs.empty()) return;
  json n = json::array(), v = json::array();
  for (const auto& [a, b] : pairs) {
    n.push_back(a);
    v.push_back(b);
  }
  obj[names] = n;
  obj[values] = v;
}

}  // namespace

MrpGraph parse_mrp_graph(const std::string& json_line) {
  MrpGraph g;
  try {
    const auto j = json::parse(json_line);
    g.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    g.input = j.value("input", "");
    if (j.contains("tops")) g.tops = j.at("tops").get<std::vector<int>>();
    if (j.contains("nodes"))
      for (const auto& jn : j.at("nodes")) {
        MrpNode n;
        n.id = jn.at("id").get<int>();
        if (jn.contains("label") && !jn.at("label").is_null()) n.label = jn.at("label").get<std::string>();
        n.properties = read_pairs(jn, "properties", "values");
        if (jn.contains("anchors"))
          for (const auto& a : jn.at("anchors")) n.anchors.emplace_back(a.at("from").get<int>(), a.at("to").get<int>());
        g.nodes.push_back(std::move(n));
      }
    if (j.contains("edges"))
      for (const auto& je : j.at("edges")) {
        MrpEdge e;
        e.source = je.at("source").get<int>();
        e.target = je.at("target").get<int>();
        e.label = je.value("label", "");
        e.attributes = read_pairs(je, "attributes", "values");
        g.edges.push_back(std::move(e));
      }
  } catch (const json::exception& ex) {
    throw MrpFormatError(std::string("malformed graph: ") + ex.what());
  }
  g.validate();
  return g;
}

std::string format_mrp_graph(const MrpGraph& g) {
  json j;
  j["id"] = g.id;
  j["input"] = g.input;
  j["tops"] = g.tops;
  j["nodes"] = json::array();
  for (const auto& n : g.nodes) {
    json jn;
    jn["id"] = n.id;
    if (n.label) jn["label"] = *n.label;
    write_pairs(jn, n.properties, "properties", "values");
    if (!n.anchors.empty()) {
      jn["anchors"] = json::array();
      for (auto [from, to] : n.anchors) jn["anchors"].push_back({{"from", from}, {"to", to}});
    }
    j["nodes"].push_back(jn);
  }
  j["edges"] = json::array();
  for (const auto& e : g.edges) {
    json je;
    je["source"] = e.source;
    je["target"] = e.target;
    je["label"] = e.label;
    write_pairs(je, e.attributes, "attributes", "values");
    j["edges"].push_back(je);
  }
  return j.dump();
}

std::vector<MrpGraph> read_mrp(std::istream& in) {
  std::vector<MrpGraph> graphs;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      graphs.push_back(parse_mrp_graph(line));
    } catch (const MrpFormatError& e) {
      throw MrpFormatError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return graphs;
}

PrfCounts MrpScore::pooled() const {
  PrfCounts total;
  for (const auto& [_, c] : facets()) total += c;
  return total;
}

std::vector<std::pair<std::string, PrfCounts>> MrpScore::facets() const {
  return {{"tops", tops},       {"labels", labels}, {"properties", properties},
          {"anchors", anchors}, {"edges", edges},   {"attributes", attributes}};
}

MrpScore& MrpScore::operator+=(const MrpScore& o) {
  tops += o.tops;
  labels += o.labels;
  properties += o.properties;
  anchors += o.anchors;
  edges += o.edges;
  attributes += o.attributes;
  return *this;
}

namespace {

template <class T>
std::size_t multiset_overlap(std::vector<T> a, std::vector<T> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<T> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return common.size();
}

std::set<int> covered(const MrpNode& n, int limit) {
  std::set<int> chars;
  for (auto [from, to] : n.anchors)
    for (int c = from; c < to && c < limit; ++c) chars.insert(c);
  return chars;
}

// Matched counts per facet in MrpScore order.
using Facets = std::array<std::size_t, 6>;

struct Side {
  const MrpGraph* graph;
  std::vector<bool> top;
  std::vector<std::set<int>> anchor_chars;
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;  // (source, target) indices -> edges

  explicit Side(const MrpGraph& g) : graph(&g), top(g.nodes.size(), false) {
    const int limit = static_cast<int>(utf8::length(g.input));
    for (int t : g.tops) top[static_cast<std::size_t>(g.node_index(t))] = true;
    for (const auto& n : g.nodes) anchor_chars.push_back(covered(n, limit));
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      groups[{g.node_index(g.edges[e].source), g.node_index(g.edges[e].target)}].push_back(e);
  }
};

Facets node_facets(const Side& gold, std::size_t g, const Side& sys, std::size_t s) {
  const auto& gn = gold.graph->nodes[g];
  const auto& sn = sys.graph->nodes[s];
  Facets f{};
  f[0] = gold.top[g] && sys.top[s];
  f[1] = gn.label && sn.label && *gn.label == *sn.label;
  f[2] = multiset_overlap(gn.properties, sn.properties);
  f[3] = !gold.anchor_chars[g].empty() && gold.anchor_chars[g] == sys.anchor_chars[s];
  return f;
}

// Pairs parallel edges greedily: each system edge takes the unused gold edge with the same
// label sharing the most attributes, first such edge on ties.
Facets edge_facets(const MrpGraph& gold, const std::vector<std::size_t>& gold_edges, const MrpGraph& sys,
                   const std::vector<std::size_t>& sys_edges) {
  Facets f{};
  std::vector<bool> used(gold_edges.size(), false);
  for (auto se : sys_edges) {
    const auto& s = sys.edges[se];
    int best = -1;
    std::size_t best_attr = 0;
    for (std::size_t k = 0; k < gold_edges.size(); ++k) {
      const auto& g = gold.edges[gold_edges[k]];
      if (used[k] || g.label != s.label) continue;
      const auto attr = multiset_overlap(g.attributes, s.attributes);
      if (best < 0 || attr > best_attr) {
        best = static_cast<int>(k);
        best_attr = attr;
      }
    }
    if (best < 0) continue;
    used[static_cast<std::size_t>(best)] = true;
    f[4] += 1;
    f[5] += best_attr;
  }
  return f;
}

std::size_t total(const Facets& f) { return std::accumulate(f.begin(), f.end(), std::size_t{0}); }

Facets score_facets(const Side& gold, const Side& sys, const std::vector<int>& map) {
  Facets f{};
  for (std::size_t s = 0; s < map.size(); ++s) {
    if (map[s] < 0) continue;
    auto nf = node_facets(gold, static_cast<std::size_t>(map[s]), sys, s);
    for (int k = 0; k < 6; ++k) f[k] += nf[k];
  }
  for (const auto& [key, edges] : sys.groups) {
    const int a = map[static_cast<std::size_t>(key.first)], b = map[static_cast<std::size_t>(key.second)];
    if (a < 0 || b < 0) continue;
    auto it = gold.groups.find({a, b});
    if (it == gold.groups.end()) continue;
    auto ef = edge_facets(*gold.graph, it->second, *sys.graph, edges);
    for (int k = 0; k < 6; ++k) f[k] += ef[k];
  }
  return f;
}

void check_alignment(const MrpGraph& gold, const MrpGraph& system, const std::vector<int>& map) {
  if (map.size() != system.nodes.size())
    throw std::invalid_argument("alignment covers " + std::to_string(map.size()) + " nodes, system graph has " +
                                std::to_string(system.nodes.size()));
  std::vector<bool> used(gold.nodes.size(), false);
  for (int g : map) {
    if (g < 0) continue;
    if (g >= static_cast<int>(gold.nodes.size()))
      throw std::invalid_argument("alignment references unknown gold node index " + std::to_string(g));
    if (used[static_cast<std::size_t>(g)]) throw std::invalid_argument("alignment is not injective");
    used[static_cast<std::size_t>(g)] = true;
  }
}

class Search {
 public:
  Search(const MrpGraph& gold, const MrpGraph& sys) : gold_(gold), sys_(sys), S_(sys.nodes.size()), G_(gold.nodes.size()) {
    unary_.assign(S_, std::vector<std::size_t>(G_, 0));
    max_unary_.assign(S_, 0);
    for (std::size_t s = 0; s < S_; ++s)
      for (std::size_t g = 0; g < G_; ++g) {
        unary_[s][g] = total(node_facets(gold_, g, sys_, s));
        max_unary_[s] = std::max(max_unary_[s], unary_[s][g]);
      }
    for (const auto& [key, edges] : sys_.groups) {
      Group grp{static_cast<std::size_t>(key.first), static_cast<std::size_t>(key.second), &edges, 0};
      for (const auto& [gkey, gedges] : gold_.groups)
        if ((key.first == key.second) == (gkey.first == gkey.second))
          grp.bound = std::max(grp.bound, total(edge_facets(gold, gedges, sys, edges)));
      groups_.push_back(grp);
    }
    by_node_.assign(S_, {});
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      by_node_[groups_[i].a].push_back(i);
      if (groups_[i].b != groups_[i].a) by_node_[groups_[i].b].push_back(i);
    }
  }

  std::size_t value(const std::vector<int>& map) const { return total(score_facets(gold_, sys_, map)); }

  std::vector<int> greedy(Rng* rng) const {
    std::vector<std::size_t> order(S_);
    std::iota(order.begin(), order.end(), 0);
    if (rng) rng->shuffle(order);
    std::vector<int> map(S_, -1);
    std::vector<bool> used(G_, false);
    for (auto s : order) {
      int best = -1;
      std::size_t best_gain = 0;
      for (std::size_t g = 0; g < G_; ++g)
        if (!used[g] && (best < 0 || unary_[s][g] > best_gain)) {
          best = static_cast<int>(g);
          best_gain = unary_[s][g];
        }
      if (best >= 0) {
        map[s] = best;
        used[static_cast<std::size_t>(best)] = true;
      }
    }
    return map;
  }

  // First-improvement local search over reassignments and swaps.
  std::size_t climb(std::vector<int>& map) const {
    std::size_t current = value(map);
    for (bool improved = true; improved;) {
      improved = false;
      for (std::size_t s = 0; s < S_ && !improved; ++s)
        for (int g = -1; g < static_cast<int>(G_) && !improved; ++g) {
          if (g == map[s]) continue;
          auto next = map;
          auto other = std::find(next.begin(), next.end(), g);
          if (g >= 0 && other != next.end()) *other = map[s];
          next[s] = g;
          const auto v = value(next);
          if (v > current) {
            map = std::move(next);
            current = v;
            improved = true;
          }
        }
    }
    return current;
  }

  void exact(std::vector<int>& best, std::size_t& best_value) {
    best_ = best;
    best_value_ = best_value;
    order_.resize(S_);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t x, std::size_t y) { return by_node_[x].size() > by_node_[y].size(); });
    map_.assign(S_, -1);
    assigned_.assign(S_, false);
    used_.assign(G_, false);
    std::size_t bound = 0;
    for (auto u : max_unary_) bound += u;
    for (const auto& grp : groups_) bound += grp.bound;
    recurse(0, 0, bound);
    best = best_;
    best_value = best_value_;
  }

 private:
  struct Group {
    std::size_t a, b;
    const std::vector<std::size_t>* edges;
    std::size_t bound;
  };

  // remaining: optimistic gain still available from unassigned nodes and open groups.
  void recurse(std::size_t depth, std::size_t value, std::size_t remaining) {
    if (value + remaining <= best_value_) return;
    if (depth == S_) {
      if (value > best_value_) {
        best_value_ = value;
        best_ = map_;
      }
      return;
    }
    const std::size_t s = order_[depth];
    assigned_[s] = true;
    // Groups closed by assigning s release their optimistic bound.
    std::size_t closing_bound = 0;
    for (auto gi : by_node_[s]) {
      const auto& grp = groups_[gi];
      const std::size_t other = grp.a == s ? grp.b : grp.a;
      if (assigned_[other]) closing_bound += grp.bound;
    }
    const std::size_t rest = remaining - max_unary_[s] - closing_bound;
    for (std::size_t g = 0; g < G_; ++g) {
      if (used_[g]) continue;
      map_[s] = static_cast<int>(g);
      used_[g] = true;
      std::size_t gain = unary_[s][g];
      for (auto gi : by_node_[s]) {
        const auto& grp = groups_[gi];
        const std::size_t other = grp.a == s ? grp.b : grp.a;
        if (!assigned_[other] || map_[other] < 0) continue;
        auto it = gold_.groups.find({map_[grp.a], map_[grp.b]});
        if (it != gold_.groups.end()) gain += total(edge_facets(*gold_.graph, it->second, *sys_.graph, *grp.edges));
      }
      recurse(depth + 1, value + gain, rest);
      used_[g] = false;
    }
    map_[s] = -1;
    recurse(depth + 1, value, rest);
    assigned_[s] = false;
  }

  Side gold_, sys_;
  std::size_t S_, G_;
  std::vector<std::vector<std::size_t>> unary_;
  std::vector<std::size_t> max_unary_;
  std::vector<Group> groups_;
  std::vector<std::vector<std::size_t>> by_node_;

  std::vector<std::size_t> order_;
  std::vector<int> map_, best_;
  std::vector<bool> assigned_, used_;
  std::size_t best_value_ = 0;
};

}  // namespace

MrpScore mrp_score(const MrpGraph& gold, const MrpGraph& system, const MrpAlignment& alignment) {
  check_alignment(gold, system, alignment.system_to_gold);
  const Side g(gold), s(system);
  const auto f = score_facets(g, s, alignment.system_to_gold);
  MrpScore score;
  PrfCounts* facets[6] = {&score.tops, &score.labels, &score.properties, &score.anchors, &score.edges, &score.attributes};
  for (int k = 0; k < 6; ++k) facets[k]->correct = f[k];

  auto totals = [](const Side& side, PrfCounts& tops, PrfCounts& labels, PrfCounts& props, PrfCounts& anchors,
                   PrfCounts& edges, PrfCounts& attrs, std::size_t PrfCounts::*field) {
    const auto& graph = *side.graph;
    tops.*field = static_cast<std::size_t>(std::count(side.top.begin(), side.top.end(), true));
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      labels.*field += graph.nodes[i].label.has_value();
      props.*field += graph.nodes[i].properties.size();
      anchors.*field += !side.anchor_chars[i].empty();
    }
    edges.*field = graph.edges.size();
    for (const auto& e : graph.edges) attrs.*field += e.attributes.size();
  };
  totals(g, score.tops, score.labels, score.properties, score.anchors, score.edges, score.attributes,
         &PrfCounts::gold_total);
  totals(s, score.tops, score.labels, score.properties, score.anchors, score.edges, score.attributes,
         &PrfCounts::system_total);
  return score;
}

MrpAlignment mces_align(const MrpGraph& gold, const MrpGraph& system, std::size_t node_limit, std::size_t restarts,
                        std::uint64_t seed) {
  Search search(gold, system);
  MrpAlignment out;
  out.system_to_gold = search.greedy(nullptr);
  out.matched = search.climb(out.system_to_gold);
  if (std::max(gold.nodes.size(), system.nodes.size()) <= node_limit) {
    search.exact(out.system_to_gold, out.matched);
    out.certified = true;
    return out;
  }
  for (std::size_t r = 1; r < restarts; ++r) {
    Rng rng(derive_seed(seed, r));
    auto map = search.greedy(&rng);
    const auto v = search.climb(map);
    if (v > out.matched) {
      out.matched = v;
      out.system_to_gold = std::move(map);
    }
  }
  return out;
}

}  // namespace czlm::metrics
