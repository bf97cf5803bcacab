#include "czlm/nn/transformer.hpp"

#include <algorithm>
#include <stdexcept>

#include "czlm/nn/layers.hpp"
#include "czlm/nn/ops.hpp"

namespace czlm::nn {

namespace {

std::string layer_prefix(std::size_t l) { return "layer" + std::to_string(l); }

}  // namespace

void TransformerConfig::validate() const {
  std::vector<std::string> problems;
  if (layers == 0) problems.push_back("layers must be positive");
  if (hidden == 0) problems.push_back("hidden must be positive");
  if (heads == 0 || hidden % heads != 0) problems.push_back("hidden must be divisible by heads");
  if (ffn == 0) problems.push_back("ffn must be positive");
  if (vocab == 0) problems.push_back("vocab must be positive");
  if (max_positions == 0) problems.push_back("max_positions must be positive");
  if (!(ln_eps > 0)) problems.push_back("ln_eps must be positive");
  if (problems.empty()) return;
  std::string message = "invalid transformer config:";
  for (const auto& p : problems) message += " " + p + ";";
  throw std::invalid_argument(message);
}

ParameterSet init_transformer(const TransformerConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const std::size_t d = config.hidden;
  ParameterSet p;
  p.add("tok_emb", init_uniform({config.vocab, d}, d, rng));
  p.add("pos_emb", init_uniform({config.max_positions, d}, d, rng));
  for (std::size_t l = 0; l < config.layers; ++l) {
    const auto pre = layer_prefix(l);
    add_layer_norm(p, pre + ".ln1", d);
    add_linear(p, pre + ".qkv", d, 3 * d, rng);
    add_linear(p, pre + ".out", d, d, rng);
    add_layer_norm(p, pre + ".ln2", d);
    add_linear(p, pre + ".ff1", d, config.ffn, rng);
    add_linear(p, pre + ".ff2", config.ffn, d, rng);
  }
  add_layer_norm(p, "final_ln", d);
  add_linear(p, "mlm.dense", d, d, rng);
  add_layer_norm(p, "mlm.ln", d);
  p.add("mlm.bias", Tensor::zeros({config.vocab}, true));
  return p;
}

EncoderOutput forward_transformer(const TransformerConfig& config, const ParameterSet& params,
                                  const std::vector<int>& ids, std::size_t batch, std::size_t seq,
                                  const std::vector<std::size_t>& lengths, bool keep_attention) {
  if (ids.size() != batch * seq) throw ShapeError("forward_transformer: ids must hold batch*seq entries");
  if (seq > config.max_positions)
    throw std::out_of_range("sequence length " + std::to_string(seq) + " exceeds max positions " +
                            std::to_string(config.max_positions));
  for (int id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= config.vocab)
      throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(config.vocab));
  std::vector<std::size_t> lens = lengths;
  if (lens.empty()) lens.assign(batch, seq);

  std::vector<int> positions(batch * seq);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < seq; ++t) positions[b * seq + t] = static_cast<int>(t);

  EncoderOutput out;
  Tensor x = add(embedding(params["tok_emb"], ids), embedding(params["pos_emb"], positions));
  out.hidden.push_back(x);
  for (std::size_t l = 0; l < config.layers; ++l) {
    const auto pre = layer_prefix(l);
    auto h = apply_layer_norm(params, pre + ".ln1", x, config.ln_eps);
    std::vector<double> probs;
    auto a = attention(apply_linear(params, pre + ".qkv", h), batch, seq, config.heads, lens,
                       keep_attention ? &probs : nullptr);
    x = add(x, apply_linear(params, pre + ".out", a));
    auto f = apply_layer_norm(params, pre + ".ln2", x, config.ln_eps);
    f = apply_linear(params, pre + ".ff2", gelu(apply_linear(params, pre + ".ff1", f)));
    x = add(x, f);
    if (keep_attention) out.attention.push_back(std::move(probs));
    out.hidden.push_back(l + 1 == config.layers ? apply_layer_norm(params, "final_ln", x, config.ln_eps) : x);
  }
  return out;
}

Tensor mlm_logits(const TransformerConfig& config, const ParameterSet& params, const Tensor& final_hidden,
                  const std::vector<std::size_t>& rows) {
  auto h = gelu(apply_linear(params, "mlm.dense", gather_rows(final_hidden, rows)));
  h = apply_layer_norm(params, "mlm.ln", h, config.ln_eps);
  return add_bias(matmul(h, params["tok_emb"], true), params["mlm.bias"]);
}

MlmOutput mlm_forward(const TransformerConfig& config, const ParameterSet& params, const batching::MlmBatch& batch) {
  std::vector<int> ids(batch.input_ids.begin(), batch.input_ids.end());
  auto enc = forward_transformer(config, params, ids, batch.rows, batch.max_len, batch.lengths);
  std::vector<std::size_t> rows;
  std::vector<int> targets;
  for (std::size_t i = 0; i < batch.target_ids.size(); ++i)
    if (batch.target_ids[i] != batching::kIgnore) {
      rows.push_back(i);
      targets.push_back(batch.target_ids[i]);
    }
  MlmOutput out;
  out.total = rows.size();
  if (rows.empty()) {
    out.loss = Tensor::scalar(0.0);
    return out;
  }
  auto logits = mlm_logits(config, params, enc.hidden.back(), rows);
  const std::size_t v = logits.dim(1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = logits.values().subspan(i * v, v);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == targets[i]) ++out.correct;
  }
  out.loss = softmax_cross_entropy(logits, targets);
  return out;
}

}  // namespace czlm::nn
