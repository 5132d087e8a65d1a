// SPDX-License-Identifier: Apache-2.0
//
// Cross-domain temporal fusion. A fused sample keeps a dominant sample with
// weight lambda in (0.5, 1) and blends in a centered moving average of a
// sample drawn from a different dataset. Both directions are emitted.
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unifault/data_model.hpp"
#include "unifault/errors.hpp"

namespace unifault {

enum class PairPolicy { cross_dataset_uniform };

struct FusionConfig {
  double lambda_low = 0.55;
  double lambda_high = 0.95;
  std::size_t window_T = 5;
  double fused_fraction = 0.5;
  PairPolicy pair_policy = PairPolicy::cross_dataset_uniform;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Mean of x over [i - (T-1)/2, i + (T-1)/2] clipped to the sequence; the
/// divisor is the number of indices that survive clipping.
template <typename T>
T moving_average(std::span<const T> x, std::size_t i, std::size_t window_T) {
  const std::size_t half = (window_T - 1) / 2;
  const std::size_t lo = i >= half ? i - half : 0;
  const std::size_t hi = std::min(x.size() - 1, i + half);
  T acc = 0;
  for (std::size_t j = lo; j <= hi; ++j) acc += x[j];
  return acc / static_cast<T>(hi - lo + 1);
}

/// Returns (a-dominant, b-dominant) blends of two equal-length sequences.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> fuse_values(std::span<const T> a, std::span<const T> b, T lambda,
                                                      std::size_t window_T) {
  if (a.size() != b.size())
    throw InvalidPairError("fuse: length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  if (a.empty()) throw InvalidPairError("fuse: empty sequences");
  if (window_T == 0 || window_T % 2 == 0) throw ConfigError("fuse: window_T must be odd");
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.resize(a.size());
  out.second.resize(a.size());
  const T rest = T(1) - lambda;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.first[i] = lambda * a[i] + rest * moving_average(b, i, window_T);
    out.second[i] = lambda * b[i] + rest * moving_average(a, i, window_T);
  }
  return out;
}

/// Window-level fusion; arithmetic in double, rounded to the stored float.
std::pair<Window, Window> fuse_pair(const Window& xa, const Window& xb, double lambda, std::size_t window_T);

/// Fuses randomly paired windows from distinct datasets. The budget is
/// floor(fused_fraction * raw size) rounded down to an even count. Input
/// order matters for reproducibility.
std::vector<Window> generate_fused_corpus(const std::vector<std::pair<std::string, std::vector<Window>>>& corpora,
                                          const FusionConfig& cfg);

}  // namespace unifault
