#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "czlm/nn/tensor.hpp"

namespace czlm::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-6;
  bool lazy = false;

  void validate() const;
};

// Moments plus a step count per row (the first dimension; rank <= 1 is one row).
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::vector<std::int64_t> row_steps;
};

class NonFiniteGradientError : public std::runtime_error {
 public:
  explicit NonFiniteGradientError(const std::string& parameter)
      : std::runtime_error("non-finite gradient in parameter '" + parameter + "'"), parameter_(parameter) {}
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

// One bias-corrected Adam update. In lazy mode rows whose gradient is entirely zero keep
// their values, moments and step count.
void adam_step(std::span<double> values, std::span<const double> grads, const Shape& shape, AdamState& state,
               const AdamConfig& config, double lr, const std::string& name = "param");

// Adam over every parameter of a set that requires a gradient; parameters without an
// accumulated gradient are treated as having a zero gradient.
class Adam {
 public:
  Adam(ParameterSet& params, AdamConfig config);

  void step(double lr);
  const AdamState& state(const std::string& name) const;
  const AdamConfig& config() const { return config_; }

 private:
  ParameterSet* params_;
  AdamConfig config_;
  std::vector<AdamState> states_;
};

}  // namespace czlm::nn
