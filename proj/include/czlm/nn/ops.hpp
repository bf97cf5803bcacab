#pragma once

#include <cstdint>
#include <vector>

#include "czlm/nn/tensor.hpp"

namespace czlm::nn {

inline constexpr int kIgnoreIndex = -100;

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor reshape(const Tensor& a, Shape shape);

// x: (n, d), bias: (d)
Tensor add_bias(const Tensor& x, const Tensor& bias);

// (m, k) x (k, n); with transpose_b, b is (n, k).
Tensor matmul(const Tensor& a, const Tensor& b, bool transpose_b = false);

// x: (n, in), weight: (in, out), bias: (out) or undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor gelu(const Tensor& x);  // tanh approximation
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// table: (V, d) -> (ids.size(), d)
Tensor embedding(const Tensor& table, const std::vector<int>& ids);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count);
Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& rows);

// Per-row standardization over the last dimension, then gain/bias. x: (n, d).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);

// Mean cross-entropy over rows whose target is not kIgnoreIndex; 0 when none remain.
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& targets);

// Row-wise softmax of plain values (no graph).
std::vector<double> softmax(const std::vector<double>& logits);

// Multi-head self-attention over packed projections. qkv: (batch*seq, 3*d), rows
// ordered batch-major. Keys at positions >= lengths[b] are masked. If probs is given,
// receives (batch, heads, seq, seq) attention weights.
Tensor attention(const Tensor& qkv, std::size_t batch, std::size_t seq, std::size_t heads,
                 const std::vector<std::size_t>& lengths, std::vector<double>* probs = nullptr);

// gamma * sum_l softmax(mix_logits)_l * layers[l]; gamma has one element.
Tensor scalar_mix(const std::vector<Tensor>& layers, const Tensor& mix_logits, const Tensor& gamma);

// groups[t] lists the rows of x summed into output row t.
Tensor pool_subwords(const Tensor& x, const std::vector<std::vector<std::size_t>>& groups);

// Gated recurrent unit over precomputed input projections xs: (T, 3h) holding the
// reset, update and candidate blocks. w_h: (h, 3h), b_h: (3h). Returns (T, h), aligned
// with input positions in both directions.
Tensor gru_sequence(const Tensor& xs, const Tensor& w_h, const Tensor& b_h, bool reverse);

}  // namespace czlm::nn
