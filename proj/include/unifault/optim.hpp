// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "unifault/encoder.hpp"

namespace unifault {

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  double epsilon = 1e-8;

  void validate() const;
};

struct ScheduleConfig {
  /// Steps in the first cosine cycle; 0 means one epoch of steps.
  std::size_t first_cycle = 0;
  double cycle_mult = 2.0;
  double min_lr_fraction = 0.01;

  void validate() const;
};

/// Cosine annealing with warm restarts. Each cycle starts at the base rate and
/// reaches base * min_lr_fraction on its last step; cycle i has
/// round(first_cycle * cycle_mult^i) steps.
class CosineRestartSchedule {
 public:
  CosineRestartSchedule(double base_lr, std::size_t first_cycle, double cycle_mult, double min_lr_fraction);

  double lr_at(std::size_t step) const;

  struct Position {
    std::size_t cycle;
    std::size_t offset;
    std::size_t length;
  };
  Position locate(std::size_t step) const;

 private:
  double base_lr_;
  double min_lr_;
  std::size_t first_cycle_;
  double cycle_mult_;
};

/// AdamW with decoupled weight decay (decay is applied to the parameter, not
/// folded into the gradient). State is allocated on the first step.
template <typename T>
class AdamW {
 public:
  explicit AdamW(const OptimizerConfig& cfg) : cfg_(cfg) {}

  void step(const std::vector<TensorRef<T>>& params, const std::vector<TensorRef<const T>>& grads, double lr) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const double decay = 1.0 - lr * cfg_.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto pv = params[i].values();
      auto gv = grads[i].values();
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t k = 0; k < pv.size(); ++k) {
        const double g = static_cast<double>(gv[k]);
        m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
        v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
        const double update = (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg_.epsilon);
        pv[k] = static_cast<T>(static_cast<double>(pv[k]) * decay - lr * update);
      }
    }
  }

  std::size_t steps_taken() const { return t_; }

 private:
  OptimizerConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace unifault
