#pragma once

#include <cstddef>
#include <vector>

#include "czlm/corpus.hpp"

namespace czlm::metrics {

struct PrfCounts {
  std::size_t correct = 0;
  std::size_t system_total = 0;
  std::size_t gold_total = 0;

  // Zero denominators give 0.
  double precision() const;
  double recall() const;
  double f1() const;

  PrfCounts& operator+=(const PrfCounts& other);
  bool operator==(const PrfCounts&) const = default;
};

// Exact (start, end, type) matches, counted as multisets.
PrfCounts span_f1(const std::vector<EntitySpan>& gold, const std::vector<EntitySpan>& system);

// confusion[gold][predicted].
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;
ConfusionMatrix confusion_matrix(const std::vector<int>& gold, const std::vector<int>& predicted, std::size_t labels);

// Unweighted mean of per-label F1, in [0, 100], over labels seen in gold or predictions.
double macro_f1(const ConfusionMatrix& confusion);

struct FoldAggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by n)
};

FoldAggregate aggregate_folds(const std::vector<double>& scores);

}  // namespace czlm::metrics
