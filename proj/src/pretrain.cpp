// SPDX-License-Identifier: Apache-2.0
#include "unifault/pretrain.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "unifault/errors.hpp"
#include "unifault/rng.hpp"

namespace unifault {

void PretrainRunConfig::validate() const {
  if (batch_size < 2) throw ConfigError("pretrain.batch_size must be >= 2");
  if (epochs < 1) throw ConfigError("pretrain.epochs must be >= 1");
}

std::string to_jsonl(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["epoch"] = r.epoch;
  j["loss"] = r.loss;
  j["lr"] = r.lr;
  j["wall_ms"] = r.wall_ms;
  return j.dump();
}

std::string to_jsonl(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["epoch_summary"] = r.epoch;
  j["steps"] = r.steps;
  j["mean_loss"] = r.mean_loss;
  j["wall_ms"] = r.wall_ms;
  return j.dump();
}

std::vector<std::pair<std::size_t, std::size_t>> batch_bounds(std::size_t n, std::size_t batch_size) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  for (std::size_t b = 0; b < n; b += batch_size) out.emplace_back(b, std::min(n, b + batch_size));
  if (out.size() >= 2 && out.back().second - out.back().first == 1) {
    out[out.size() - 2].second = n;
    out.pop_back();
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void zero(Parameters<float>& g) {
  for (auto& t : g.tensors())
    for (auto& v : t.values()) v = 0.0f;
}

}  // namespace

PretrainResult pretrain(std::span<const Window> corpus, Parameters<float> init, const EncoderConfig& cfg,
                        const PretrainSettings& settings, const PretrainHooks& hooks) {
  cfg.validate();
  settings.augment.validate();
  settings.contrastive.validate();
  settings.optimizer.validate();
  settings.schedule.validate();
  settings.run.validate();
  if (corpus.empty()) throw DataError("pretrain: empty corpus");
  check_shapes(init, cfg);
  for (const auto& w : corpus) {
    if (w.values.size() != cfg.input_length)
      throw ShapeError("pretrain: window " + w.id + " has length " + std::to_string(w.values.size()) +
                       ", encoder expects " + std::to_string(cfg.input_length));
  }

  const auto& run = settings.run;
  const std::size_t n = corpus.size();
  const auto bounds = batch_bounds(n, run.batch_size);
  for (const auto& [b, e] : bounds)
    if (e - b < 2 && !settings.contrastive.include_self_term)
      throw DegenerateBatchError("pretrain: batch of size 1 has no contrastive denominator without the self term");

  const std::size_t first_cycle = settings.schedule.first_cycle == 0 ? bounds.size() : settings.schedule.first_cycle;
  const CosineRestartSchedule schedule(settings.optimizer.learning_rate, first_cycle, settings.schedule.cycle_mult,
                                       settings.schedule.min_lr_fraction);

  PretrainResult result{std::move(init), {}, {}};
  Parameters<float>& params = result.params;
  Parameters<float> grads = Parameters<float>::zeros(cfg);
  AdamW<float> optimizer(settings.optimizer);
  const auto grad_refs = std::as_const(grads).tensors();
  const auto param_refs = params.tensors();

  const std::size_t L = cfg.input_length;
  std::vector<std::size_t> order(n);
  ForwardCache<float> cache1, cache2;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= run.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffler(derive_seed(run.seed, 0x5EED5, epoch));
    shuffler.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    for (const auto& [begin, end] : bounds) {
      const auto step_start = Clock::now();
      const auto rows = static_cast<Eigen::Index>(end - begin);
      Matrix<float> x1(rows, static_cast<Eigen::Index>(L)), x2(rows, static_cast<Eigen::Index>(L));
      for (std::size_t r = begin; r < end; ++r) {
        const std::size_t idx = order[r];
        const auto row = static_cast<Eigen::Index>(r - begin);
        // Views depend only on (seed, epoch, window), not on batch layout.
        Rng view_rng(derive_seed(run.seed, settings.augment.seed, 0x71E5, epoch, idx));
        augment_into(corpus[idx].values, settings.augment, view_rng, std::span<float>(x1.row(row).data(), L));
        augment_into(corpus[idx].values, settings.augment, view_rng, std::span<float>(x2.row(row).data(), L));
      }

      const Matrix<float> pooled1 = encoder_forward(params, cfg, x1, &cache1);
      const Matrix<float> pooled2 = encoder_forward(params, cfg, x2, &cache2);
      const Matrix<float> z1 = project(params, pooled1);
      const Matrix<float> z2 = project(params, pooled2);
      const auto res = contrastive_loss<float>(z1, z2, settings.contrastive);
      if (!std::isfinite(res.loss))
        throw NumericError("pretrain: non-finite loss at step " + std::to_string(step));

      zero(grads);
      encoder_backward(params, cfg, cache1, project_backward(params, pooled1, res.grad_z1, grads), grads);
      encoder_backward(params, cfg, cache2, project_backward(params, pooled2, res.grad_z2, grads), grads);

      const double lr = schedule.lr_at(step);
      optimizer.step(param_refs, grad_refs, lr);

      StepRecord rec{step, epoch, static_cast<double>(res.loss), lr, elapsed_ms(step_start)};
      loss_sum += rec.loss;
      result.steps.push_back(rec);
      if (hooks.on_step) hooks.on_step(rec);
      ++step;
    }
    if (!params.all_finite()) throw NumericError("pretrain: parameters diverged in epoch " + std::to_string(epoch));

    EpochRecord summary{epoch, bounds.size(), loss_sum / static_cast<double>(bounds.size()), elapsed_ms(epoch_start)};
    result.epochs.push_back(summary);
    if (hooks.on_epoch) hooks.on_epoch(summary, params);
  }
  return result;
}

}  // namespace unifault
