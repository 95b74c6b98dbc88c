#pragma once

#include <cstdint>

#include "simuda/trainer/config.hpp"

namespace simuda::trainer {

/// Step-indexed learning-rate schedule.
struct LrSchedule {
  SchedulerKind kind = SchedulerKind::none;
  double lr_max = 0.0;
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 1;

  /// Warmup epochs are converted with the loader's steps per epoch.
  static LrSchedule from_config(const OptimConfig& optim, int epochs, std::int64_t steps_per_epoch);
};

/// none: lr_max. warmup_cosine: linear ramp from 0 over the warmup steps, then
/// a single cosine decay reaching 0 at total_steps (floored at 0 beyond).
/// Throws ConfigError unless total_steps > warmup_steps >= 0.
double lr_at(std::int64_t step, const LrSchedule& schedule);

}  // namespace simuda::trainer
