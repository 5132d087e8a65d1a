// SPDX-License-Identifier: Apache-2.0
#include "unifault/optim.hpp"

#include <algorithm>
#include <numbers>

#include "unifault/errors.hpp"

namespace unifault {

void OptimizerConfig::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
    throw ConfigError("optimizer: betas must lie in (0, 1)");
  if (!(learning_rate > 0.0)) throw ConfigError("optimizer: learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("optimizer: weight_decay must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("optimizer: epsilon must be > 0");
}

void ScheduleConfig::validate() const {
  if (!(cycle_mult >= 1.0)) throw ConfigError("schedule: cycle_mult must be >= 1");
  if (!(min_lr_fraction >= 0.0 && min_lr_fraction < 1.0)) throw ConfigError("schedule: min_lr_fraction must be in [0, 1)");
}

CosineRestartSchedule::CosineRestartSchedule(double base_lr, std::size_t first_cycle, double cycle_mult,
                                             double min_lr_fraction)
    : base_lr_(base_lr), min_lr_(base_lr * min_lr_fraction), first_cycle_(first_cycle), cycle_mult_(cycle_mult) {
  if (first_cycle_ < 1) throw ConfigError("schedule: first cycle must span at least one step");
  if (!(cycle_mult_ >= 1.0)) throw ConfigError("schedule: cycle_mult must be >= 1");
}

CosineRestartSchedule::Position CosineRestartSchedule::locate(std::size_t step) const {
  Position pos{0, step, first_cycle_};
  double exact = static_cast<double>(first_cycle_);
  while (pos.offset >= pos.length) {
    pos.offset -= pos.length;
    ++pos.cycle;
    exact *= cycle_mult_;
    pos.length = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(exact)));
  }
  return pos;
}

double CosineRestartSchedule::lr_at(std::size_t step) const {
  const auto pos = locate(step);
  if (pos.length == 1) return base_lr_;
  const double progress = static_cast<double>(pos.offset) / static_cast<double>(pos.length - 1);
  return min_lr_ + (base_lr_ - min_lr_) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace unifault
