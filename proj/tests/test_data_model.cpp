#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "unifault/data_model.hpp"
#include "unifault/errors.hpp"

using namespace unifault;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("UFB1 layout and round trip") {
  SignalFile s{2, 3, 12800.0, {1.f, 2.f, 3.f, -4.f, 0.5f, 1e-30f}};
  const auto bytes = encode_signal(s);
  REQUIRE(bytes.size() == 4 + 4 + 4 + 8 + 8 + 6 * 4);
  CHECK(std::memcmp(bytes.data(), "UFB1", 4) == 0);
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 4, 4);
  CHECK(version == 1);
  double rate;
  std::memcpy(&rate, bytes.data() + 20, 8);
  CHECK(rate == 12800.0);
  float first;
  std::memcpy(&first, bytes.data() + 28, 4);
  CHECK(first == 1.f);

  const auto back = decode_signal(bytes);
  CHECK(back.channels == 2);
  CHECK(back.length == 3);
  CHECK(back.sample_rate_hz == 12800.0);
  CHECK(back.samples == s.samples);
}

TEST_CASE("UFB1 rejects malformed input") {
  SignalFile s{1, 4, 100.0, {1, 2, 3, 4}};
  auto bytes = encode_signal(s);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_signal(bad), SignalFormatError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_signal(bad), SignalFormatError);
  bad.assign(bytes.begin(), bytes.end() - 1);
  CHECK_THROWS_AS(decode_signal(bad), SignalFormatError);
  bad.assign(bytes.begin(), bytes.begin() + 10);
  CHECK_THROWS_AS(decode_signal(bad), SignalFormatError);
}

TEST_CASE("recording and window checks") {
  RawRecording r;
  r.recording_id = "d/x";
  r.channels = 2;
  r.length = 3;
  r.sample_rate_hz = 10;
  r.samples = {0, 1, 2, 3, 4, 5};
  CHECK_NOTHROW(check_recording(r));
  CHECK(r.channel(1)[0] == 3.f);
  r.samples[4] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(check_recording(r), InvalidInputError);
  r.samples[4] = 0;
  r.sample_rate_hz = 0;
  CHECK_THROWS_AS(check_recording(r), InvalidInputError);
  r.sample_rate_hz = 10;
  r.samples.pop_back();
  CHECK_THROWS_AS(check_recording(r), InvalidInputError);

  Window w;
  w.id = "w";
  w.values.assign(8, 0.f);
  CHECK_NOTHROW(check_window(w, 8));
  CHECK_THROWS_AS(check_window(w, 16), InvalidInputError);
  w.values[3] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(check_window(w, 8), InvalidInputError);

  MultichannelWindow mw;
  CHECK_THROWS_AS(check_multichannel(mw), InvalidInputError);
  Window a;
  a.values.assign(4, 0.f);
  a.source_recording = "r";
  a.label = 1;
  Window b = a;
  b.source_channel = 1;
  mw.per_channel = {a, b};
  CHECK_NOTHROW(check_multichannel(mw));
  mw.per_channel[1].label = 2;
  CHECK_THROWS_AS(check_multichannel(mw), InvalidInputError);
}

TEST_CASE("split and provenance names") {
  for (auto s : {Split::train, Split::validation, Split::test}) CHECK(split_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(split_from_string("dev"), DataError);
  CHECK(provenance_from_string(to_string(Provenance::fused)) == Provenance::fused);
}

TEST_CASE("manifest parse, serialize and validate") {
  const auto dir = scratch("unifault_test_manifest");
  const std::string text = R"({
    "dataset_id": "bench",
    "label_names": ["healthy", "outer"],
    "recordings": [
      {"path": "a.ufb", "label": 0},
      {"path": "b.ufb", "label": 1, "condition_id": "1hp"},
      {"path": "c.ufb", "label": 5},
      {"path": "a.ufb", "label": 0},
      {"path": "missing.ufb"},
      {"path": "broken.ufb", "label": 1}
    ]})";
  const auto m = parse_manifest(text);
  CHECK(m.dataset_id == "bench");
  CHECK(m.recordings.size() == 6);
  CHECK(m.recordings[1].condition_id == "1hp");
  CHECK_FALSE(m.recordings[4].label.has_value());
  CHECK(m.recording_id(1) == "bench/b.ufb");

  const auto again = parse_manifest(manifest_to_json(m));
  CHECK(again.recordings.size() == m.recordings.size());
  CHECK(again.recordings[1].condition_id == m.recordings[1].condition_id);

  for (const char* f : {"a.ufb", "b.ufb", "c.ufb"}) write_signal(dir / f, SignalFile{1, 4, 100.0, {0, 1, 2, 3}});
  write_text_file(dir / "broken.ufb", "not a signal");
  const auto issues = validate_manifest(m, dir);
  REQUIRE(issues.size() == 4);
  CHECK(issues[0].path == "c.ufb");
  CHECK(issues[0].message.find("label out of range") != std::string::npos);
  CHECK(issues[1].message.find("duplicate") != std::string::npos);
  CHECK(issues[2].message.find("missing") != std::string::npos);
  CHECK(issues[3].path == "broken.ufb");

  const auto rec = load_recording(m, 1, dir);
  CHECK(rec.recording_id == "bench/b.ufb");
  CHECK(rec.label == 1);
  CHECK(rec.length == 4);

  CHECK_THROWS_AS(parse_manifest("{"), ManifestParseError);
  CHECK_THROWS_AS(parse_manifest(R"({"dataset_id": "x"})"), ManifestParseError);
  CHECK_THROWS_AS(read_manifest(dir / "nope.json"), ManifestParseError);
  fs::remove_all(dir);
}
