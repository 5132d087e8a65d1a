#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "unifault/errors.hpp"
#include "unifault/harmonize.hpp"
#include "unifault/rng.hpp"

using namespace unifault;
namespace fs = std::filesystem;

namespace {

DatasetManifest manifest_of(std::size_t n, const std::string& id = "ds") {
  DatasetManifest m;
  m.dataset_id = id;
  m.label_names = {"a", "b"};
  for (std::size_t i = 0; i < n; ++i) m.recordings.push_back({"r" + std::to_string(i) + ".ufb", int(i % 2), {}});
  return m;
}

RawRecording ramp_recording(double rate, std::uint64_t length, std::uint32_t channels) {
  RawRecording r;
  r.recording_id = "ds/ramp";
  r.dataset_id = "ds";
  r.channels = channels;
  r.length = length;
  r.sample_rate_hz = rate;
  r.samples.resize(channels * length);
  for (std::uint32_t c = 0; c < channels; ++c)
    for (std::uint64_t t = 0; t < length; ++t) r.samples[c * length + t] = float(c * 1000 + t);
  return r;
}

}  // namespace

TEST_CASE("split counts follow the ratios") {
  const auto m = manifest_of(10);
  const auto s = split_dataset(m, {0.8, 0.1, 0.1}, 0);
  CHECK(s.counts() == std::array<std::size_t, 3>{8, 1, 1});
  CHECK(s.assignment.size() == 10);
  CHECK(split_dataset(m, {0.8, 0.1, 0.1}, 0).assignment == s.assignment);

  const auto s7 = split_dataset(manifest_of(7), {0.5, 0.1, 0.4}, 3);
  const auto c = s7.counts();
  CHECK(c[0] + c[1] + c[2] == 7);
  CHECK(c == std::array<std::size_t, 3>{3, 1, 3});

  CHECK_THROWS_AS(split_dataset(m, {0.8, 0.1, 0.2}, 0), ConfigError);
  CHECK_THROWS_AS(split_dataset(m, {1.1, -0.1, 0.0}, 0), ConfigError);
}

TEST_CASE("split membership varies with the seed") {
  const auto m = manifest_of(40);
  std::size_t differ = 0;
  const auto a = split_dataset(m, {0.5, 0.25, 0.25}, 1);
  const auto b = split_dataset(m, {0.5, 0.25, 0.25}, 2);
  for (const auto& [id, s] : a.assignment) differ += b.assignment.at(id) != s;
  CHECK(differ > 0);
}

TEST_CASE("segmentation drops the partial tail") {
  HarmonizeConfig cfg;
  CHECK(segment_length(12000, 0.1) == 1200);
  CHECK(segment_length(25600, 0.1) == 2560);
  CHECK(segment_length(48000, 0.1) == 4800);
  const auto rec = ramp_recording(12000, 3 * 1200 + 500, 2);
  const auto segs = segment_windows(rec, cfg);
  REQUIRE(segs.size() == 6);
  CHECK(segs[0].values.size() == 1200);
  CHECK(segs[1].values.front() == 1200.0);
  CHECK(segs[3].channel == 1);
  CHECK(segs[3].index == 0);
  CHECK(segs[5].values.back() == 1000.0 + 3 * 1200 - 1);

  HarmonizeConfig tiny;
  tiny.window_duration_s = 1e-4;
  CHECK_THROWS_AS(segment_windows(rec, tiny), ConfigError);
}

TEST_CASE("length standardization") {
  for (std::size_t n : {2u, 7u, 1024u, 1200u, 2560u, 4800u}) {
    std::vector<double> ramp(n);
    for (std::size_t i = 0; i < n; ++i) ramp[i] = 3.0 + 2.5 * double(i);
    const auto out = standardize_length(ramp, 1024);
    REQUIRE(out.size() == 1024);
    CHECK(out.front() == ramp.front());
    CHECK(out.back() == ramp.back());
    double worst = 0;
    for (std::size_t k = 0; k < 1024; ++k) {
      const double expected = 3.0 + 2.5 * double(k) * double(n - 1) / 1023.0;
      worst = std::max(worst, std::abs(out[k] - expected));
    }
    CHECK(worst < 1e-9 * 2.5 * double(n));
    const auto filtered = standardize_length(ramp, 1024, true);
    CHECK(filtered.size() == 1024);
  }
  CHECK_THROWS_AS(standardize_length(std::vector<double>{1.0}, 1024), InvalidInputError);
}

TEST_CASE("normalization statistics and mapping") {
  std::vector<Window> train(3);
  for (std::size_t i = 0; i < 3; ++i) {
    train[i].dataset_id = "ds";
    train[i].source_channel = i == 2 ? 1 : 0;
    train[i].values = i == 0 ? std::vector<float>{-2, 0, 1} : i == 1 ? std::vector<float>{3, 1, 0} : std::vector<float>{5, 5, 5};
  }
  const auto stats = fit_normalizer(train);
  CHECK(stats.groups.size() == 2);
  CHECK(stats.at("ds", 0).min == -2.0);
  CHECK(stats.at("ds", 0).max == 3.0);
  CHECK_THROWS_AS(stats.at("ds", 7), MissingStatsError);

  HarmonizeConfig cfg;
  const auto n0 = apply_normalizer(train[0], stats, cfg);
  CHECK(n0.values == std::vector<float>{0.f, 0.4f, 0.6f});
  const auto flat = apply_normalizer(train[2], stats, cfg);
  CHECK(flat.values == std::vector<float>{0.f, 0.f, 0.f});

  HarmonizeConfig centered;
  centered.normalize_low = -1;
  centered.normalize_high = 1;
  const auto c1 = apply_normalizer(train[1], stats, centered).values;
  CHECK(c1[0] == 1.f);
  CHECK(c1[1] == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(c1[2] == doctest::Approx(-0.2).epsilon(1e-6));

  const auto back = NormalizerStats::from_json(stats.to_json());
  CHECK(back.groups.size() == 2);
  CHECK(back.at("ds", 0).max == 3.0);
}

TEST_CASE("end-to-end harmonization and leakage") {
  const auto dir = fs::temp_directory_path() / "unifault_test_harmonize";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto m = manifest_of(10);
  Rng rng(4);
  for (std::size_t i = 0; i < m.recordings.size(); ++i) {
    RawRecording r;
    r.channels = 2;
    r.length = 12800 / 2;
    r.sample_rate_hz = 12800;
    r.samples.resize(r.channels * r.length);
    for (auto& v : r.samples) v = float(rng.normal(0.0, 1.0 + double(i)));
    write_recording(dir / m.recordings[i].path, r);
  }
  HarmonizeConfig cfg;
  const auto split = split_dataset(m, {0.8, 0.1, 0.1}, 5);
  const auto h = harmonize_dataset(m, dir, cfg, split, true);
  // 0.5 s at 12.8 kHz gives 5 segments of 1280 samples, two channels.
  CHECK(h.of(Split::train).windows.size() == 8 * 5 * 2);
  CHECK(h.of(Split::test).windows.size() == 5 * 2);
  CHECK(h.of(Split::train).groups.size() == 8 * 5);
  CHECK(h.stats.groups.size() == 2);
  float lo = 1e9f, hi = -1e9f;
  for (const auto& w : h.of(Split::train).windows) {
    CHECK(w.values.size() == 1024);
    lo = std::min(lo, *std::min_element(w.values.begin(), w.values.end()));
    hi = std::max(hi, *std::max_element(w.values.begin(), w.values.end()));
  }
  CHECK(lo == 0.f);
  CHECK(hi == 1.f);
  const auto& first = h.of(Split::train).groups.front();
  CHECK(first.channels() == 2);
  CHECK(first.per_channel[1].id.find("#c1#s0") != std::string::npos);

  // Rewriting a test recording must not move the statistics.
  std::string test_id;
  for (const auto& [id, s] : split.assignment)
    if (s == Split::test) test_id = id;
  std::size_t test_idx = 0;
  for (std::size_t i = 0; i < m.recordings.size(); ++i)
    if (m.recording_id(i) == test_id) test_idx = i;
  auto rec = load_recording(m, test_idx, dir);
  for (auto& v : rec.samples) v *= 1000.f;
  write_recording(dir / m.recordings[test_idx].path, rec);
  const auto h2 = harmonize_dataset(m, dir, cfg, split, false);
  CHECK(h2.stats.to_json() == h.stats.to_json());
  CHECK(h2.of(Split::train).windows.front().values == h.of(Split::train).windows.front().values);

  std::vector<CorpusEntry> entries;
  for (const auto& w : h.of(Split::validation).windows) entries.push_back({w, Split::validation});
  write_corpus(dir / "corpus", entries, cfg);
  const auto read = read_corpus(dir / "corpus");
  REQUIRE(read.size() == entries.size());
  CHECK(read[3].window.id == entries[3].window.id);
  CHECK(read[3].window.values == entries[3].window.values);
  CHECK(read[3].window.label == entries[3].window.label);
  CHECK(read[3].split == Split::validation);
  fs::remove_all(dir);
}
