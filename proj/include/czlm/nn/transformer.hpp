#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "czlm/batching.hpp"
#include "czlm/nn/tensor.hpp"

namespace czlm::nn {

struct TransformerConfig {
  std::size_t layers = 2;
  std::size_t hidden = 64;
  std::size_t heads = 4;
  std::size_t ffn = 128;
  std::size_t vocab = 0;
  std::size_t max_positions = 512;
  double ln_eps = 1e-5;

  // Throws std::invalid_argument listing every violated constraint.
  void validate() const;
  bool operator==(const TransformerConfig&) const = default;
};

// Encoder and MLM head parameters, seeded.
ParameterSet init_transformer(const TransformerConfig& config, std::uint64_t seed);

struct EncoderOutput {
  // layers + 1 tensors of shape (batch*seq, hidden), rows batch-major. Entry 0 is the
  // embedding sum; the last one has the final layer norm applied.
  std::vector<Tensor> hidden;
  // Per layer, (batch, heads, seq, seq) attention weights; filled on request.
  std::vector<std::vector<double>> attention;
};

// ids: batch*seq row-major. lengths may be empty (every row full length).
EncoderOutput forward_transformer(const TransformerConfig& config, const ParameterSet& params,
                                  const std::vector<int>& ids, std::size_t batch, std::size_t seq,
                                  const std::vector<std::size_t>& lengths = {}, bool keep_attention = false);

// Vocabulary logits (rows.size(), vocab) for the given rows of the final hidden state.
// The decoder is tied to the token embedding.
Tensor mlm_logits(const TransformerConfig& config, const ParameterSet& params, const Tensor& final_hidden,
                  const std::vector<std::size_t>& rows);

struct MlmOutput {
  Tensor loss;  // mean cross-entropy over masked positions; 0 when there are none
  std::size_t correct = 0;
  std::size_t total = 0;
};

MlmOutput mlm_forward(const TransformerConfig& config, const ParameterSet& params, const batching::MlmBatch& batch);

}  // namespace czlm::nn
