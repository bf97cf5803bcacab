#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "czlm/nn/tensor.hpp"

namespace czlm::nn {

class NonFiniteLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  double max_error() const;
  bool passed(double tolerance) const { return max_error() < tolerance; }
};

struct GradCheckOptions {
  double step = 1e-5;
  // Denominator floor: |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  // 0 checks every coordinate; otherwise a seeded sample of this many per parameter.
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 0;
};

// Compares the autodiff gradient of `loss` with central differences for every
// parameter that requires a gradient. `loss` must rebuild the graph on each call.
GradCheckReport gradient_check(const std::function<Tensor()>& loss, ParameterSet& params,
                               const GradCheckOptions& options = {});

}  // namespace czlm::nn
