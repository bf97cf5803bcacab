#include "czlm/nn/pretrain.hpp"

#include <cstdio>
#include <numeric>

#include "czlm/rng.hpp"

namespace czlm::nn {

std::vector<StepLog> train_mlm(ParameterSet& params, const std::vector<batching::Sample>& samples,
                               const PretrainConfig& config, const std::function<void(const StepLog&)>& on_step) {
  if (samples.empty()) throw std::invalid_argument("no training samples");
  if (config.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  config.schedule.validate();
  Adam adam(params, config.adam);
  const std::size_t batch = std::min(config.batch_size, samples.size());

  std::vector<std::size_t> order(samples.size());
  std::size_t cursor = order.size(), pass = 0;
  std::vector<StepLog> log;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    std::vector<batching::Sample> chosen;
    while (chosen.size() < batch) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(config.seed, 2 * pass++));
        rng.shuffle(order);
        cursor = 0;
      }
      chosen.push_back(samples[order[cursor++]]);
    }
    auto mlm = batching::make_mlm_batch(chosen, config.model.vocab, config.mask_prob, config.policy,
                                        derive_seed(config.seed, 2 * step + 1));
    params.zero_grad();
    auto out = mlm_forward(config.model, params, mlm);
    out.loss.backward();
    const double lr = schedule_lr(config.schedule, static_cast<double>(step));
    adam.step(lr);
    log.push_back({step, lr, out.loss.item()});
    if (on_step) on_step(log.back());
  }
  params.zero_grad();
  return log;
}

PretrainResult pretrain_mlm(const std::vector<batching::Sample>& samples, const PretrainConfig& config,
                            const std::function<void(const StepLog&)>& on_step) {
  PretrainResult result;
  result.params = init_transformer(config.model, config.seed);
  result.log = train_mlm(result.params, samples, config, on_step);
  return result;
}

std::string format_training_log(const std::vector<StepLog>& log) {
  std::string out;
  char buf[96];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%zu\t%.9g\t%.9g\n", e.step, e.lr, e.loss);
    out += buf;
  }
  return out;
}

std::vector<double> smooth(const std::vector<double>& values, std::size_t window) {
  std::vector<double> out(values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= window) acc -= values[i - window];
    out[i] = acc / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

MaskedAccuracy masked_accuracy(const TransformerConfig& config, const ParameterSet& params,
                               const std::vector<batching::Sample>& samples, double mask_prob,
                               const batching::MaskingPolicy& policy, std::uint64_t seed, std::size_t rounds) {
  NoGradGuard guard;
  MaskedAccuracy acc;
  for (std::size_t r = 0; r < rounds; ++r) {
    auto batch = batching::make_mlm_batch(samples, config.vocab, mask_prob, policy, derive_seed(seed, r));
    auto out = mlm_forward(config, params, batch);
    acc.correct += out.correct;
    acc.total += out.total;
  }
  return acc;
}

}  // namespace czlm::nn
