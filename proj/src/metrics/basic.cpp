#include "czlm/metrics/basic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace czlm::metrics {

double PrfCounts::precision() const {
  return system_total ? static_cast<double>(correct) / static_cast<double>(system_total) : 0.0;
}

double PrfCounts::recall() const {
  return gold_total ? static_cast<double>(correct) / static_cast<double>(gold_total) : 0.0;
}

double PrfCounts::f1() const {
  const std::size_t denom = system_total + gold_total;
  return denom ? 2.0 * static_cast<double>(correct) / static_cast<double>(denom) : 0.0;
}

PrfCounts& PrfCounts::operator+=(const PrfCounts& other) {
  correct += other.correct;
  system_total += other.system_total;
  gold_total += other.gold_total;
  return *this;
}

PrfCounts span_f1(const std::vector<EntitySpan>& gold, const std::vector<EntitySpan>& system) {
  std::map<EntitySpan, std::size_t> remaining;
  for (const auto& g : gold) ++remaining[g];
  PrfCounts c{0, system.size(), gold.size()};
  for (const auto& s : system) {
    auto it = remaining.find(s);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++c.correct;
    }
  }
  return c;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& gold, const std::vector<int>& predicted, std::size_t labels) {
  if (gold.size() != predicted.size()) throw std::invalid_argument("gold and predicted label counts differ");
  ConfusionMatrix m(labels, std::vector<std::size_t>(labels, 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || predicted[i] < 0 || static_cast<std::size_t>(gold[i]) >= labels ||
        static_cast<std::size_t>(predicted[i]) >= labels)
      throw std::out_of_range("label outside the confusion matrix");
    ++m[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(predicted[i])];
  }
  return m;
}

double macro_f1(const ConfusionMatrix& confusion) {
  const std::size_t L = confusion.size();
  if (L == 0) return 0.0;
  for (const auto& row : confusion)
    if (row.size() != L) throw std::invalid_argument("confusion matrix must be square");
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t l = 0; l < L; ++l) {
    PrfCounts c;
    c.correct = confusion[l][l];
    for (std::size_t k = 0; k < L; ++k) {
      c.gold_total += confusion[l][k];
      c.system_total += confusion[k][l];
    }
    if (c.gold_total + c.system_total == 0) continue;
    sum += c.f1();
    ++present;
  }
  return present ? 100.0 * sum / static_cast<double>(present) : 0.0;
}

FoldAggregate aggregate_folds(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("cannot aggregate zero folds");
  FoldAggregate a;
  for (double s : scores) a.mean += s;
  a.mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - a.mean) * (s - a.mean);
  a.stddev = std::sqrt(var / static_cast<double>(scores.size()));
  return a;
}

}  // namespace czlm::metrics
