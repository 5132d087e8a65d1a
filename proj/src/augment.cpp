// SPDX-License-Identifier: Apache-2.0
#include "unifault/augment.hpp"

#include "unifault/errors.hpp"

namespace unifault {

void AugmentConfig::validate() const {
  if (!(shift_low >= 0.0 && shift_low <= shift_high && shift_high <= 1.0))
    throw ConfigError("augment.shift_range must lie within [0, 1)");
  if (!(scale_std >= 0.0)) throw ConfigError("augment.scale_std must be >= 0");
  if (!(jitter_std >= 0.0)) throw ConfigError("augment.jitter_std must be >= 0");
}

std::vector<float> scale_jitter(std::span<const float> x, const AugmentConfig& cfg, Rng& rng) {
  const double scale = rng.normal(cfg.scale_mean, cfg.scale_std);
  std::vector<double> jitter(x.size());
  for (auto& j : jitter) j = rng.normal(0.0, cfg.jitter_std);
  return scale_jitter<float>(x, scale, jitter);
}

void augment_into(std::span<const float> x, const AugmentConfig& cfg, Rng& rng, std::span<float> out) {
  const std::size_t L = x.size();
  const double s = cfg.shift_low + (cfg.shift_high - cfg.shift_low) * rng.uniform();
  const std::size_t k = shift_amount(s, L);
  const double scale = rng.normal(cfg.scale_mean, cfg.scale_std);
  for (std::size_t t = 0; t < L; ++t) {
    const double jitter = rng.normal(0.0, cfg.jitter_std);
    out[t] = static_cast<float>(scale * static_cast<double>(x[(t + L - k) % L]) + jitter);
  }
}

std::pair<Window, Window> make_views(const Window& x, const AugmentConfig& cfg, Rng& rng) {
  std::pair<Window, Window> views{x, x};
  augment_into(x.values, cfg, rng, views.first.values);
  augment_into(x.values, cfg, rng, views.second.values);
  return views;
}

}  // namespace unifault
