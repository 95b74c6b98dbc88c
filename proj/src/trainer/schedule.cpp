#include "simuda/trainer/schedule.hpp"

#include <cmath>
#include <numbers>

#include "simuda/core/errors.hpp"

namespace simuda::trainer {

LrSchedule LrSchedule::from_config(const OptimConfig& optim, int epochs, std::int64_t steps_per_epoch) {
  LrSchedule s;
  s.kind = optim.scheduler;
  s.lr_max = optim.lr;
  s.total_steps = static_cast<std::int64_t>(epochs) * steps_per_epoch;
  s.warmup_steps = optim.scheduler == SchedulerKind::none
                       ? 0
                       : static_cast<std::int64_t>(std::llround(optim.warmup_epochs * static_cast<double>(steps_per_epoch)));
  return s;
}

double lr_at(std::int64_t step, const LrSchedule& s) {
  if (s.kind == SchedulerKind::none) return s.lr_max;
  if (s.warmup_steps < 0 || s.total_steps <= s.warmup_steps) {
    throw ConfigError("schedule needs total_steps > warmup_steps >= 0");
  }
  if (step < s.warmup_steps) return s.lr_max * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  const double progress =
      static_cast<double>(step - s.warmup_steps) / static_cast<double>(s.total_steps - s.warmup_steps);
  if (progress >= 1.0) return 0.0;
  return std::max(0.0, s.lr_max * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

}  // namespace simuda::trainer
