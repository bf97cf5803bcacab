#include "czlm/nn/layers.hpp"

#include <cmath>

namespace czlm::nn {

Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
  std::vector<double> values(shape_size(shape));
  for (auto& v : values) v = rng.uniform(-bound, bound);
  return Tensor::from(std::move(shape), std::move(values), true);
}

void add_linear(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng) {
  params.add(prefix + ".w", init_uniform({in, out}, in, rng));
  params.add(prefix + ".b", Tensor::zeros({out}, true));
}

Tensor apply_linear(const ParameterSet& params, const std::string& prefix, const Tensor& x) {
  return linear(x, params[prefix + ".w"], params[prefix + ".b"]);
}

void add_layer_norm(ParameterSet& params, const std::string& prefix, std::size_t d) {
  params.add(prefix + ".g", Tensor::full({d}, 1.0, true));
  params.add(prefix + ".b", Tensor::zeros({d}, true));
}

Tensor apply_layer_norm(const ParameterSet& params, const std::string& prefix, const Tensor& x, double eps) {
  return layer_norm(x, params[prefix + ".g"], params[prefix + ".b"], eps);
}

void add_gru(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng) {
  params.add(prefix + ".wx", init_uniform({in, 3 * hidden}, in, rng));
  params.add(prefix + ".bx", Tensor::zeros({3 * hidden}, true));
  params.add(prefix + ".wh", init_uniform({hidden, 3 * hidden}, hidden, rng));
  params.add(prefix + ".bh", Tensor::zeros({3 * hidden}, true));
}

Tensor apply_gru(const ParameterSet& params, const std::string& prefix, const Tensor& x, bool reverse) {
  auto xs = linear(x, params[prefix + ".wx"], params[prefix + ".bx"]);
  return gru_sequence(xs, params[prefix + ".wh"], params[prefix + ".bh"], reverse);
}

void add_birnn(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng) {
  add_gru(params, prefix + ".fw", in, hidden, rng);
  add_gru(params, prefix + ".bw", in, hidden, rng);
}

Tensor birnn_layer(const ParameterSet& params, const std::string& prefix, const Tensor& x) {
  return concat_cols({apply_gru(params, prefix + ".fw", x, false), apply_gru(params, prefix + ".bw", x, true)});
}

}  // namespace czlm::nn
