// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "unifault/data_model.hpp"
#include "unifault/rng.hpp"

namespace unifault {

struct AugmentConfig {
  double shift_low = 0.0;
  double shift_high = 1.0;
  double scale_mean = 1.0;
  double scale_std = 0.1;
  double jitter_std = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Whole-sample cyclic shift amount for ratio s on a length-L sequence.
inline std::size_t shift_amount(double s, std::size_t length) {
  const auto k = static_cast<long long>(std::llround(s * static_cast<double>(length)));
  const auto L = static_cast<long long>(length);
  return static_cast<std::size_t>(((k % L) + L) % L);
}

/// out[t] = x[(t - round(s * L)) mod L]
template <typename T>
std::vector<T> temporal_shift(std::span<const T> x, double s) {
  const std::size_t L = x.size();
  std::vector<T> out(L);
  if (L == 0) return out;
  const std::size_t k = shift_amount(s, L);
  for (std::size_t t = 0; t < L; ++t) out[t] = x[(t + L - k) % L];
  return out;
}

/// out[t] = scale * x[t] + jitter[t]
template <typename T>
std::vector<T> scale_jitter(std::span<const T> x, double scale, std::span<const double> jitter) {
  std::vector<T> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t)
    out[t] = static_cast<T>(scale * static_cast<double>(x[t]) + jitter[t]);
  return out;
}

/// Draws one gain per window and i.i.d. per-timestep jitter.
std::vector<float> scale_jitter(std::span<const float> x, const AugmentConfig& cfg, Rng& rng);

/// Two independent shift-then-scale/jitter draws of the same window.
std::pair<Window, Window> make_views(const Window& x, const AugmentConfig& cfg, Rng& rng);

/// Writes one view of x into out (size |x|); used by the batched trainer.
void augment_into(std::span<const float> x, const AugmentConfig& cfg, Rng& rng, std::span<float> out);

}  // namespace unifault
