#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <set>

#include "unifault/errors.hpp"
#include "unifault/synth.hpp"

using namespace unifault;
namespace fs = std::filesystem;

namespace {

SynthDomainSpec clean_domain(double rate) {
  SynthDomainSpec s;
  s.domain_id = "probe";
  s.sample_rate_hz = rate;
  s.noise_std = 0.0;
  s.timing_jitter = 0.0;
  s.recording_duration_s = 1.0;
  s.classes = {{"healthy", 0, 0, 1000, 500, 0}, {"fault", 100.0, 1.0, 2000.0, 900.0, 0.0}};
  return s;
}

// Lag in [lo, hi] maximizing the autocorrelation of the signal energy.
std::size_t dominant_lag(std::span<const float> x, std::size_t lo, std::size_t hi) {
  std::vector<double> e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) e[i] = double(x[i]) * x[i];
  std::size_t best = lo;
  double best_val = -1;
  for (std::size_t lag = lo; lag <= hi; ++lag) {
    double acc = 0;
    for (std::size_t i = 0; i + lag < e.size(); ++i) acc += e[i] * e[i + lag];
    acc /= double(e.size() - lag);
    if (acc > best_val) {
      best_val = acc;
      best = lag;
    }
  }
  return best;
}

double variance(std::span<const float> x) {
  double m = 0, s = 0;
  for (float v : x) m += v;
  m /= double(x.size());
  for (float v : x) s += (v - m) * (v - m);
  return s / double(x.size());
}

}  // namespace

TEST_CASE("healthy recordings carry noise only") {
  auto spec = clean_domain(10240);
  const auto silent = generate_recording(spec, 0, std::size_t(0));
  CHECK(std::all_of(silent.samples.begin(), silent.samples.end(), [](float v) { return v == 0.f; }));
  spec.noise_std = 0.1;
  spec.channels = 2;
  const auto noisy = generate_recording(spec, 0, std::size_t(0));
  CHECK(std::abs(std::sqrt(variance(noisy.channel(0))) - 0.1) < 0.005);
  CHECK(std::abs(std::sqrt(variance(noisy.channel(1))) - 0.1) < 0.005);
}

TEST_CASE("impulse spacing follows the fault rate") {
  for (double rate : {10240.0, 20480.0}) {
    const auto spec = clean_domain(rate);
    const auto rec = generate_recording(spec, 1, std::size_t(3));
    CHECK(rec.length == std::size_t(rate));
    const double expected = rate / 100.0;
    const auto lag = dominant_lag(rec.channel(0), std::size_t(expected * 0.5), std::size_t(expected * 1.5));
    CHECK(std::abs(double(lag) - expected) <= 0.02 * expected);
  }
}

TEST_CASE("channels share the fault signal with fixed gains") {
  auto spec = clean_domain(10240);
  spec.channels = 3;
  const auto rec = generate_recording(spec, 1, std::size_t(0));
  CHECK(std::abs(variance(rec.channel(1)) / variance(rec.channel(0)) - 1.0 / (1.35 * 1.35)) < 1e-4);
  CHECK(std::abs(variance(rec.channel(2)) / variance(rec.channel(0)) - 1.0 / (1.7 * 1.7)) < 1e-4);
}

TEST_CASE("generation is deterministic per recording index") {
  auto spec = clean_domain(8192);
  spec.noise_std = 0.05;
  spec.timing_jitter = 0.02;
  const auto a = generate_recording(spec, 1, std::size_t(4));
  CHECK(generate_recording(spec, 1, std::size_t(4)).samples == a.samples);
  CHECK(generate_recording(spec, 1, std::size_t(5)).samples != a.samples);
  CHECK(a.recording_id == "probe/rec/fault_004.ufb");
  spec.seed = 1;
  CHECK(generate_recording(spec, 1, std::size_t(4)).samples != a.samples);
}

TEST_CASE("domain validation") {
  auto spec = clean_domain(2048);
  CHECK_THROWS_AS(spec.validate(), ConfigError);  // 2 kHz resonance at 1 kHz Nyquist
  CHECK_THROWS_AS(default_benchmark(0, 1, 4), ConfigError);
  CHECK_THROWS_AS(default_benchmark(0, 3, 5), ConfigError);
}

TEST_CASE("default benchmark layout and class separability") {
  const auto spec = default_benchmark(7, 3, 4);
  REQUIRE(spec.domains.size() == 3);
  CHECK(spec.target == 2);
  std::set<double> rates;
  for (const auto& d : spec.domains) rates.insert(d.sample_rate_hz);
  CHECK(rates.size() == 3);

  const auto dir = fs::temp_directory_path() / "unifault_test_synth";
  fs::remove_all(dir);
  const auto layout = generate_benchmark(spec, dir);
  CHECK(layout.manifests.size() == 3);
  CHECK(layout.pretrain_domains.size() == 2);
  CHECK(layout.target_domain == spec.domains[2].domain_id);
  const auto back = read_benchmark_layout(dir);
  CHECK(back.target_domain == layout.target_domain);
  CHECK(back.pretrain_domains == layout.pretrain_domains);

  for (std::size_t d = 0; d < 3; ++d) {
    const auto m = read_manifest(layout.manifests[d]);
    CHECK(m.recordings.size() == 4 * spec.domains[d].num_recordings_per_class);
    CHECK(m.label_names.size() == 4);
    CHECK(validate_manifest(m, layout.manifests[d].parent_path()).empty());
  }

  // Faulty recordings carry clearly more energy than healthy ones in the target domain.
  const auto m = read_manifest(layout.manifests[2]);
  std::array<double, 4> energy{};
  std::array<int, 4> count{};
  for (std::size_t i = 0; i < m.recordings.size(); ++i) {
    const auto rec = load_recording(m, i, layout.manifests[2].parent_path());
    energy[std::size_t(*rec.label)] += variance(rec.channel(0));
    ++count[std::size_t(*rec.label)];
  }
  for (std::size_t c = 1; c < 4; ++c) CHECK(energy[c] / count[c] >= 1.5 * energy[0] / count[0]);
  fs::remove_all(dir);
}
