// SPDX-License-Identifier: Apache-2.0
//
// Standardization of heterogeneous recordings into a corpus of fixed-length
// univariate windows: split, fixed-duration segmentation, length
// standardization, channel unification and train-only min-max normalization.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unifault/data_model.hpp"

namespace unifault {

struct HarmonizeConfig {
  double window_duration_s = 0.1;
  std::size_t target_length = 1024;
  double normalize_low = 0.0;
  double normalize_high = 1.0;
  double epsilon_degenerate = 1e-12;
  /// Boxcar low-pass before downsampling. Off by default.
  bool prefilter = false;

  void validate() const;
};

/// Extrema of one (dataset_id, channel) group over the training split.
struct ChannelExtrema {
  double min = 0.0;
  double max = 0.0;
};

using NormalizerKey = std::pair<std::string, std::uint32_t>;

struct NormalizerStats {
  std::map<NormalizerKey, ChannelExtrema> groups;
  Split fitted_on = Split::train;

  const ChannelExtrema& at(const std::string& dataset_id, std::uint32_t channel) const;
  std::string to_json() const;
  static NormalizerStats from_json(const std::string& text);
};

/// Per-recording split. Counts follow the ratios under largest-remainder
/// rounding; membership is a seeded shuffle of the manifest order.
SplitAssignment split_dataset(const DatasetManifest& manifest, const std::array<double, 3>& ratios,
                              std::uint64_t seed);

/// Number of native samples in one fixed-duration window.
std::size_t segment_length(double sample_rate_hz, double window_duration_s);

struct RawSegment {
  std::uint32_t channel = 0;
  std::uint64_t index = 0;
  std::vector<double> values;
};

/// Consecutive non-overlapping segments for every channel; partial tails are
/// dropped. Channel-major order.
std::vector<RawSegment> segment_windows(const RawRecording& rec, const HarmonizeConfig& cfg);

/// Linear interpolation onto target_length points; output k samples input
/// position k * (n - 1) / (target_length - 1).
std::vector<double> standardize_length(std::span<const double> segment, std::size_t target_length,
                                       bool prefilter = false);

std::vector<Window> unify_channels(const MultichannelWindow& mw);

NormalizerStats fit_normalizer(std::span<const Window> train_windows);

Window apply_normalizer(const Window& w, const NormalizerStats& stats, const HarmonizeConfig& cfg);

/// Groups univariate windows back into their multichannel segments, ordered by
/// first appearance, channels ascending.
std::vector<MultichannelWindow> group_multichannel(std::span<const Window> windows);

struct HarmonizedSplit {
  std::vector<Window> windows;
  std::vector<MultichannelWindow> groups;
};

struct HarmonizedDataset {
  std::string dataset_id;
  std::vector<std::string> label_names;
  std::array<HarmonizedSplit, 3> splits;
  NormalizerStats stats;

  HarmonizedSplit& of(Split s) { return splits[static_cast<std::size_t>(s)]; }
  const HarmonizedSplit& of(Split s) const { return splits[static_cast<std::size_t>(s)]; }
};

/// Runs every stage in order. When keep_groups is set the multichannel
/// groupings used for fine-tuning are emitted as well.
HarmonizedDataset harmonize_dataset(const DatasetManifest& manifest, const std::filesystem::path& root,
                                    const HarmonizeConfig& cfg, const SplitAssignment& split,
                                    bool keep_groups = false);

// On-disk corpus: one UFB1 file per window plus index.json -------------------

struct CorpusEntry {
  Window window;
  Split split = Split::train;
};

void write_corpus(const std::filesystem::path& dir, std::span<const CorpusEntry> entries,
                  const HarmonizeConfig& cfg);
std::vector<CorpusEntry> read_corpus(const std::filesystem::path& dir);

}  // namespace unifault
