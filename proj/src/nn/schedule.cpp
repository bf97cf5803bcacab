#include "czlm/nn/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace czlm::nn {

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "polynomial_decay") return ScheduleKind::PolynomialDecay;
  if (name == "inverse_sqrt") return ScheduleKind::InverseSqrt;
  if (name == "cosine_warmup_decay") return ScheduleKind::CosineWarmupDecay;
  throw std::invalid_argument("unknown schedule kind '" + name + "'");
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::PolynomialDecay: return "polynomial_decay";
    case ScheduleKind::InverseSqrt: return "inverse_sqrt";
    case ScheduleKind::CosineWarmupDecay: return "cosine_warmup_decay";
  }
  return "?";
}

void ScheduleConfig::validate() const {
  if (!(peak_lr > 0)) throw std::invalid_argument("peak_lr must be positive");
  switch (kind) {
    case ScheduleKind::PolynomialDecay:
      if (warmup_steps < 0 || warmup_steps > total_steps)
        throw std::invalid_argument("warmup_steps must lie in [0, total_steps]");
      break;
    case ScheduleKind::InverseSqrt:
      if (!(warmup_steps > 0)) throw std::invalid_argument("inverse_sqrt needs positive warmup_steps");
      if (frozen_prefix_steps < 0) throw std::invalid_argument("frozen_prefix_steps must be non-negative");
      break;
    case ScheduleKind::CosineWarmupDecay:
      if (!(warmup_epochs > 0) || !(decay_epochs > 0))
        throw std::invalid_argument("cosine schedule needs positive warmup and decay epochs");
      break;
  }
}

double schedule_lr(const ScheduleConfig& c, double at) {
  if (!(at >= 0)) throw std::invalid_argument("schedule position must be non-negative");
  switch (c.kind) {
    case ScheduleKind::PolynomialDecay: {
      if (at < c.warmup_steps) return c.peak_lr * at / c.warmup_steps;
      if (at >= c.total_steps) return c.end_lr;
      const double remaining = (c.total_steps - at) / (c.total_steps - c.warmup_steps);
      return (c.peak_lr - c.end_lr) * std::pow(remaining, c.power) + c.end_lr;
    }
    case ScheduleKind::InverseSqrt: {
      if (at < c.frozen_prefix_steps) return 0.0;
      const double s = at - c.frozen_prefix_steps;
      if (s < c.warmup_steps) return c.peak_lr * s / c.warmup_steps;
      return c.peak_lr * std::sqrt(c.warmup_steps / s);
    }
    case ScheduleKind::CosineWarmupDecay: {
      if (at <= c.warmup_epochs) return c.peak_lr * (1.0 - std::cos(std::numbers::pi * at / c.warmup_epochs)) / 2.0;
      if (at <= c.warmup_epochs + c.decay_epochs)
        return c.peak_lr * (1.0 + std::cos(std::numbers::pi * (at - c.warmup_epochs) / c.decay_epochs)) / 2.0;
      return 0.0;
    }
  }
  return 0.0;
}

}  // namespace czlm::nn
