// SPDX-License-Identifier: Apache-2.0
#include "unifault/fusion.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "unifault/rng.hpp"

namespace unifault {

void FusionConfig::validate() const {
  if (!(0.5 < lambda_low && lambda_low <= lambda_high && lambda_high < 1.0))
    throw ConfigError("fusion.lambda_range must satisfy 0.5 < low <= high < 1");
  if (window_T == 0 || window_T % 2 == 0) throw ConfigError("fusion.window_T must be an odd count >= 1");
  if (!(fused_fraction >= 0.0 && fused_fraction <= 1.0)) throw ConfigError("fusion.fused_fraction must be in [0, 1]");
}

std::pair<Window, Window> fuse_pair(const Window& xa, const Window& xb, double lambda, std::size_t window_T) {
  if (xa.values.size() != xb.values.size())
    throw InvalidPairError("fuse_pair: windows " + xa.id + " and " + xb.id + " differ in length");
  if (!(lambda > 0.5 && lambda < 1.0)) throw InvalidPairError("fuse_pair: lambda must lie in (0.5, 1)");
  const std::vector<double> a(xa.values.begin(), xa.values.end());
  const std::vector<double> b(xb.values.begin(), xb.values.end());
  auto [fa, fb] = fuse_values<double>(a, b, lambda, window_T);

  const std::string dataset = "fused:" + xa.dataset_id + "+" + xb.dataset_id;
  auto make = [&](const Window& dominant, const std::vector<double>& values, const char* tag) {
    Window w;
    w.id = "fused(" + xa.id + "," + xb.id + ")/" + tag;
    w.values.assign(values.begin(), values.end());
    w.source_recording = dominant.source_recording;
    w.source_channel = dominant.source_channel;
    w.segment_index = dominant.segment_index;
    w.dataset_id = dataset;
    w.provenance = Provenance::fused;
    return w;
  };
  return {make(xa, fa, "a"), make(xb, fb, "b")};
}

std::vector<Window> generate_fused_corpus(const std::vector<std::pair<std::string, std::vector<Window>>>& corpora,
                                          const FusionConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> usable;
  std::size_t raw_total = 0;
  for (std::size_t d = 0; d < corpora.size(); ++d) {
    raw_total += corpora[d].second.size();
    if (!corpora[d].second.empty()) usable.push_back(d);
  }
  if (usable.size() < 2) {
    spdlog::warn("temporal fusion needs at least two non-empty datasets; {} available, no fused samples generated",
                 usable.size());
    return {};
  }

  auto budget = static_cast<std::size_t>(std::floor(cfg.fused_fraction * static_cast<double>(raw_total)));
  budget -= budget % 2;
  const std::size_t n_pairs = budget / 2;

  std::vector<std::pair<std::size_t, std::size_t>> dataset_pairs;
  for (std::size_t i = 0; i < usable.size(); ++i)
    for (std::size_t j = i + 1; j < usable.size(); ++j) dataset_pairs.emplace_back(usable[i], usable[j]);

  std::vector<Window> out;
  out.reserve(budget);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    // One stream per pair keeps generation order-independent.
    Rng rng(derive_seed(cfg.seed, 0xF05E, k));
    const auto [da, db] = dataset_pairs[rng.index(dataset_pairs.size())];
    const auto& wa = corpora[da].second;
    const auto& wb = corpora[db].second;
    const Window& xa = wa[rng.index(wa.size())];
    const Window& xb = wb[rng.index(wb.size())];
    const double lambda = rng.uniform(cfg.lambda_low, cfg.lambda_high);
    auto [fa, fb] = fuse_pair(xa, xb, lambda, cfg.window_T);
    fa.id = "fused/" + std::to_string(k) + "/a";
    fb.id = "fused/" + std::to_string(k) + "/b";
    out.push_back(std::move(fa));
    out.push_back(std::move(fb));
  }
  return out;
}

}  // namespace unifault
