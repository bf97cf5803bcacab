#pragma once

#include <string>

#include "czlm/nn/ops.hpp"
#include "czlm/nn/tensor.hpp"
#include "czlm/rng.hpp"

namespace czlm::nn {

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng);

// Registers `<prefix>.w` (in, out) and `<prefix>.b` (out).
void add_linear(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);
Tensor apply_linear(const ParameterSet& params, const std::string& prefix, const Tensor& x);

// `<prefix>.g` = 1 and `<prefix>.b` = 0, both (d).
void add_layer_norm(ParameterSet& params, const std::string& prefix, std::size_t d);
Tensor apply_layer_norm(const ParameterSet& params, const std::string& prefix, const Tensor& x, double eps = 1e-5);

// One GRU direction: `<prefix>.wx` (in, 3h), `.bx`, `.wh` (h, 3h), `.bh`.
void add_gru(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng);
Tensor apply_gru(const ParameterSet& params, const std::string& prefix, const Tensor& x, bool reverse);

// Bidirectional layer: `<prefix>.fw` and `<prefix>.bw` cells; output (T, 2h) = [forward | backward].
void add_birnn(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng);
Tensor birnn_layer(const ParameterSet& params, const std::string& prefix, const Tensor& x);

}  // namespace czlm::nn
