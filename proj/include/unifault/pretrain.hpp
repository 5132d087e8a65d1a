// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unifault/augment.hpp"
#include "unifault/contrastive.hpp"
#include "unifault/encoder.hpp"
#include "unifault/optim.hpp"

namespace unifault {

struct PretrainRunConfig {
  std::size_t batch_size = 128;
  std::size_t epochs = 5;
  std::uint64_t seed = 0;
  bool fusion = true;

  void validate() const;
};

struct PretrainSettings {
  AugmentConfig augment;
  ContrastiveConfig contrastive;
  OptimizerConfig optimizer;
  ScheduleConfig schedule;
  PretrainRunConfig run;
};

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double lr = 0.0;
  double wall_ms = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double mean_loss = 0.0;
  double wall_ms = 0.0;
};

std::string to_jsonl(const StepRecord& r);
std::string to_jsonl(const EpochRecord& r);

struct PretrainHooks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const EpochRecord&, const Parameters<float>&)> on_epoch;
};

struct PretrainResult {
  Parameters<float> params;
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
};

/// [begin, end) offsets of each batch for n items. A trailing remainder of
/// one item joins the previous batch so every batch has at least two rows
/// whenever n >= 2.
std::vector<std::pair<std::size_t, std::size_t>> batch_bounds(std::size_t n, std::size_t batch_size);

/// Contrastive pretraining over `corpus` (raw windows, plus fused windows
/// when enabled by the caller). Deterministic given the settings' seeds.
PretrainResult pretrain(std::span<const Window> corpus, Parameters<float> init, const EncoderConfig& cfg,
                        const PretrainSettings& settings, const PretrainHooks& hooks = {});

}  // namespace unifault
