#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "czlm/batching.hpp"
#include "czlm/nn/adam.hpp"
#include "czlm/nn/schedule.hpp"
#include "czlm/nn/transformer.hpp"

namespace czlm::nn {

struct PretrainConfig {
  TransformerConfig model;
  AdamConfig adam;
  ScheduleConfig schedule;
  std::size_t steps = 200;
  std::size_t batch_size = 32;
  double mask_prob = 0.15;
  batching::MaskingPolicy policy;
  std::uint64_t seed = 1;
};

struct StepLog {
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct PretrainResult {
  ParameterSet params;
  std::vector<StepLog> log;
};

// Samples are visited in a seeded order reshuffled every pass; each step re-masks its
// batch with a fresh seed. Step s (1-based) uses schedule_lr(schedule, s).
PretrainResult pretrain_mlm(const std::vector<batching::Sample>& samples, const PretrainConfig& config,
                            const std::function<void(const StepLog&)>& on_step = {});

// Continues training an existing parameter set.
std::vector<StepLog> train_mlm(ParameterSet& params, const std::vector<batching::Sample>& samples,
                               const PretrainConfig& config, const std::function<void(const StepLog&)>& on_step = {});

// `step<TAB>lr<TAB>loss` per line.
std::string format_training_log(const std::vector<StepLog>& log);

// Trailing mean over up to `window` values.
std::vector<double> smooth(const std::vector<double>& values, std::size_t window = 10);

struct MaskedAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

// Masked-token accuracy over all samples for `rounds` independent maskings.
MaskedAccuracy masked_accuracy(const TransformerConfig& config, const ParameterSet& params,
                               const std::vector<batching::Sample>& samples, double mask_prob,
                               const batching::MaskingPolicy& policy, std::uint64_t seed, std::size_t rounds = 1);

}  // namespace czlm::nn
