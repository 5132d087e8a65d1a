// SPDX-License-Identifier: Apache-2.0
//
// Synthetic bearing vibration: a jittered impulse train exciting a decaying
// resonance, plus Gaussian sensor noise. Domains differ in sampling rate,
// channel count, amplitude, resonance and noise.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "unifault/data_model.hpp"
#include "unifault/rng.hpp"

namespace unifault {

struct FaultClassSpec {
  std::string class_name;
  double impulse_rate_hz = 0.0;  // 0 means healthy
  double impulse_amplitude = 0.0;
  double resonance_hz = 1000.0;
  double resonance_decay = 500.0;  // 1/s
  double amplitude_jitter = 0.0;
};

struct SynthDomainSpec {
  std::string domain_id;
  double sample_rate_hz = 8192.0;
  std::uint32_t channels = 1;
  std::vector<FaultClassSpec> classes;
  double recording_duration_s = 1.0;
  std::size_t num_recordings_per_class = 10;
  double noise_std = 0.05;
  std::uint64_t seed = 0;
  /// Fixed gain per channel; empty means 1 / (1 + 0.35 c).
  std::vector<double> channel_gains;
  /// Relative half-width of the uniform impulse spacing jitter.
  double timing_jitter = 0.02;

  void validate() const;
  double channel_gain(std::uint32_t c) const;
};

/// Draws impulse times, amplitudes and noise from rng, in that order.
RawRecording generate_recording(const SynthDomainSpec& spec, std::size_t class_idx, Rng& rng);

/// Seeded from (spec.seed, class_idx, recording_index).
RawRecording generate_recording(const SynthDomainSpec& spec, std::size_t class_idx, std::size_t recording_index);

struct BenchmarkSpec {
  std::uint64_t seed = 0;
  std::vector<SynthDomainSpec> domains;
  /// Index into domains of the fine-tune target, excluded from pretraining.
  std::size_t target = 0;
};

/// Domains with distinct rates, channel counts and shifted resonance, noise
/// and amplitude; the last one is the target. Supports 2 to 5 domains and
/// 2 to 4 classes.
BenchmarkSpec default_benchmark(std::uint64_t seed, std::size_t num_domains = 3, std::size_t num_classes = 4);

struct BenchmarkLayout {
  std::vector<std::filesystem::path> manifests;  // one per domain, in spec order
  std::vector<std::string> pretrain_domains;
  std::string target_domain;
};

/// Writes <out>/<domain>/manifest.json with recordings under
/// <out>/<domain>/rec/, plus <out>/benchmark.json describing domain roles.
BenchmarkLayout generate_benchmark(const BenchmarkSpec& spec, const std::filesystem::path& out_dir);

/// Reads benchmark.json back.
BenchmarkLayout read_benchmark_layout(const std::filesystem::path& out_dir);

}  // namespace unifault
