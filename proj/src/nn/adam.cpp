#include "czlm/nn/adam.hpp"

#include <cmath>

namespace czlm::nn {

void AdamConfig::validate() const {
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  if (!(eps > 0)) throw std::invalid_argument("Adam epsilon must be positive");
}

void adam_step(std::span<double> values, std::span<const double> grads, const Shape& shape, AdamState& state,
               const AdamConfig& config, double lr, const std::string& name) {
  if (values.size() != grads.size() || values.size() != shape_size(shape))
    throw ShapeError("adam_step: value/gradient/shape sizes disagree for '" + name + "'");
  for (double g : grads)
    if (!std::isfinite(g)) throw NonFiniteGradientError(name);
  const std::size_t rows = shape.empty() || shape.size() == 1 ? 1 : shape[0];
  const std::size_t width = rows ? values.size() / rows : 0;
  if (state.m.empty()) {
    state.m.assign(values.size(), 0.0);
    state.v.assign(values.size(), 0.0);
    state.row_steps.assign(rows, 0);
  }

  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t begin = r * width, end = begin + width;
    if (config.lazy) {
      bool any = false;
      for (std::size_t i = begin; i < end && !any; ++i) any = grads[i] != 0.0;
      if (!any) continue;
    }
    const auto t = static_cast<double>(++state.row_steps[r]);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = begin; i < end; ++i) {
      state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
      state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
      values[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + config.eps);
    }
  }
}

Adam::Adam(ParameterSet& params, AdamConfig config) : params_(&params), config_(config), states_(params.size()) {
  config_.validate();
}

void Adam::step(double lr) {
  std::size_t i = 0;
  for (auto& [name, tensor] : *params_) {
    auto& state = states_[i++];
    if (!tensor.requires_grad()) continue;
    if (tensor.has_grad()) {
      adam_step(tensor.values(), std::as_const(tensor).grad(), tensor.shape(), state, config_, lr, name);
    } else {
      const std::vector<double> zeros(tensor.size(), 0.0);
      adam_step(tensor.values(), zeros, tensor.shape(), state, config_, lr, name);
    }
  }
}

const AdamState& Adam::state(const std::string& name) const {
  std::size_t i = 0;
  for (const auto& [n, _] : *params_) {
    if (n == name) return states_[i];
    ++i;
  }
  throw std::out_of_range("unknown parameter '" + name + "'");
}

}  // namespace czlm::nn
