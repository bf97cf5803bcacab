#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "czlm/metrics/basic.hpp"

namespace czlm::metrics {

class MrpFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MrpNode {
  int id = 0;
  std::optional<std::string> label;
  std::vector<std::pair<std::string, std::string>> properties;
  std::vector<std::pair<int, int>> anchors;  // [from, to) character ranges
};

struct MrpEdge {
  int source = 0, target = 0;  // node ids
  std::string label;
  std::vector<std::pair<std::string, std::string>> attributes;
};

struct MrpGraph {
  std::string id;
  std::string input;
  std::vector<int> tops;
  std::vector<MrpNode> nodes;
  std::vector<MrpEdge> edges;

  // Index of the node with this id, or -1.
  int node_index(int node_id) const;
  // Throws MrpFormatError on dangling edges/tops or anchors outside the input.
  void validate() const;
};

MrpGraph parse_mrp_graph(const std::string& json_line);
std::string format_mrp_graph(const MrpGraph& graph);
// One graph per non-empty line.
std::vector<MrpGraph> read_mrp(std::istream& in);

// system node index -> gold node index, or -1 when unmapped.
struct MrpAlignment {
  std::vector<int> system_to_gold;
  std::size_t matched = 0;  // total matched items under the mapping
  bool certified = false;   // proven optimal
};

struct MrpScore {
  PrfCounts tops, labels, properties, anchors, edges, attributes;

  PrfCounts pooled() const;
  double average_f1() const { return pooled().f1(); }
  std::vector<std::pair<std::string, PrfCounts>> facets() const;
  MrpScore& operator+=(const MrpScore& other);
};

// Throws std::invalid_argument for mappings that are not injective or reference unknown nodes.
MrpScore mrp_score(const MrpGraph& gold, const MrpGraph& system, const MrpAlignment& alignment);

// Exact branch and bound when both graphs have at most node_limit nodes, otherwise
// hill climbing from `restarts` seeded greedy starts.
MrpAlignment mces_align(const MrpGraph& gold, const MrpGraph& system, std::size_t node_limit = 10,
                        std::size_t restarts = 16, std::uint64_t seed = 0);

}  // namespace czlm::metrics
