#pragma once

#include <string>
#include <utility>
#include <vector>

#include "czlm/metrics/basic.hpp"

namespace czlm::metrics {

using MetricRows = std::vector<std::pair<std::string, PrfCounts>>;

// Aligned plain-text table. With percent, P/R/F1 are scaled to [0, 100].
std::string format_metric_table(const MetricRows& rows, bool percent);

// {"<metric>": {"precision", "recall", "f1", "correct", "system", "gold"}, ...}, same scale.
std::string format_metric_json(const MetricRows& rows, bool percent);

}  // namespace czlm::metrics
