#include "czlm/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "czlm/rng.hpp"

namespace czlm::nn {

double GradCheckReport::max_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

namespace {

double evaluate(const std::function<Tensor()>& loss) {
  NoGradGuard guard;
  const double v = loss().item();
  if (!std::isfinite(v)) throw NonFiniteLossError("loss is not finite");
  return v;
}

}  // namespace

GradCheckReport gradient_check(const std::function<Tensor()>& loss, ParameterSet& params,
                               const GradCheckOptions& options) {
  params.zero_grad();
  {
    auto l = loss();
    if (!std::isfinite(l.item())) throw NonFiniteLossError("loss is not finite");
    l.backward();
  }
  Rng rng(options.seed);
  GradCheckReport report;
  for (auto& [name, tensor] : params) {
    if (!tensor.requires_grad()) continue;
    const std::vector<double> analytic(tensor.grad().begin(), tensor.grad().end());
    std::vector<std::size_t> coords(tensor.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coordinates && coords.size() > options.max_coordinates) {
      rng.shuffle(coords);
      coords.resize(options.max_coordinates);
      std::sort(coords.begin(), coords.end());
    }
    GradCheckEntry entry{name, 0.0, coords.size()};
    auto values = tensor.values();
    for (std::size_t i : coords) {
      const double original = values[i];
      values[i] = original + options.step;
      const double up = evaluate(loss);
      values[i] = original - options.step;
      const double down = evaluate(loss);
      values[i] = original;
      const double numeric = (up - down) / (2.0 * options.step);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), options.floor});
      entry.max_rel_error = std::max(entry.max_rel_error, std::abs(analytic[i] - numeric) / denom);
    }
    report.entries.push_back(std::move(entry));
  }
  params.zero_grad();
  return report;
}

}  // namespace czlm::nn
