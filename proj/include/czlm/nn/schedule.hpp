#pragma once

#include <string>

namespace czlm::nn {

enum class ScheduleKind { PolynomialDecay, InverseSqrt, CosineWarmupDecay };

ScheduleKind parse_schedule_kind(const std::string& name);
std::string to_string(ScheduleKind kind);

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::PolynomialDecay;
  double warmup_steps = 10000;
  double peak_lr = 7e-4;
  double total_steps = 91075;
  double end_lr = 0.0;
  double power = 1.0;
  double frozen_prefix_steps = 0;
  double warmup_epochs = 4;
  double decay_epochs = 10;

  void validate() const;
};

// `at` is an optimizer step for the step-based kinds and a (fractional) epoch for the
// cosine kind.
double schedule_lr(const ScheduleConfig& config, double at);

}  // namespace czlm::nn
