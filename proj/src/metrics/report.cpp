#include "czlm/metrics/report.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

namespace czlm::metrics {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool left) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

}  // namespace

std::string format_metric_table(const MetricRows& rows, bool percent) {
  const double k = percent ? 100.0 : 1.0;
  const int digits = percent ? 2 : 4;
  const std::vector<std::string> header = {"Metric", "Precision", "Recall", "F1", "Correct", "System", "Gold"};
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& [name, c] : rows)
    cells.push_back({name, fixed(k * c.precision(), digits), fixed(k * c.recall(), digits), fixed(k * c.f1(), digits),
                     std::to_string(c.correct), std::to_string(c.system_total), std::to_string(c.gold_total)});
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      if (i) out += " | ";
      out += pad(cells[r][i], width[i], i == 0);
    }
    out += "\n";
    if (r == 0) {
      for (std::size_t i = 0; i < width.size(); ++i) out += (i ? "-+-" : "") + std::string(width[i], '-');
      out += "\n";
    }
  }
  return out;
}

std::string format_metric_json(const MetricRows& rows, bool percent) {
  const double k = percent ? 100.0 : 1.0;
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, c] : rows)
    j[name] = {{"precision", k * c.precision()}, {"recall", k * c.recall()}, {"f1", k * c.f1()},
               {"correct", c.correct},           {"system", c.system_total}, {"gold", c.gold_total}};
  return j.dump(2) + "\n";
}

}  // namespace czlm::metrics
