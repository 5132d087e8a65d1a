// SPDX-License-Identifier: Apache-2.0
#include "unifault/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "byte_io.hpp"
#include "unifault/errors.hpp"

namespace unifault {

namespace fs = std::filesystem;
using nlohmann::json;

void check_recording(const RawRecording& rec) {
  if (rec.channels < 1) throw InvalidInputError("recording " + rec.recording_id + ": channel count must be >= 1");
  if (rec.length < 1) throw InvalidInputError("recording " + rec.recording_id + ": length must be >= 1");
  if (!(rec.sample_rate_hz > 0.0) || !std::isfinite(rec.sample_rate_hz))
    throw InvalidInputError("recording " + rec.recording_id + ": sample rate must be positive");
  if (rec.samples.size() != static_cast<std::size_t>(rec.channels) * rec.length)
    throw InvalidInputError("recording " + rec.recording_id + ": sample grid does not match channels x length");
  if (!std::all_of(rec.samples.begin(), rec.samples.end(), [](float v) { return std::isfinite(v); }))
    throw InvalidInputError("recording " + rec.recording_id + ": non-finite sample value");
}

void check_window(const Window& w, std::size_t target_length) {
  if (w.values.size() != target_length)
    throw InvalidInputError("window " + w.id + ": expected " + std::to_string(target_length) + " values, got " +
                            std::to_string(w.values.size()));
  if (!std::all_of(w.values.begin(), w.values.end(), [](float v) { return std::isfinite(v); }))
    throw InvalidInputError("window " + w.id + ": non-finite value");
}

void check_multichannel(const MultichannelWindow& mw) {
  if (mw.per_channel.empty()) throw InvalidInputError("multichannel window has no channels");
  const auto& first = mw.per_channel.front();
  for (const auto& w : mw.per_channel) {
    if (w.values.size() != first.values.size()) throw InvalidInputError("multichannel window: channel lengths differ");
    if (w.label != first.label) throw InvalidInputError("multichannel window: channel labels differ");
    if (w.source_recording != first.source_recording)
      throw InvalidInputError("multichannel window: channels come from different recordings");
  }
}

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "validation") return Split::validation;
  if (s == "test") return Split::test;
  throw DataError("unknown split '" + s + "'");
}

const char* to_string(Provenance p) { return p == Provenance::raw ? "raw" : "fused"; }

Provenance provenance_from_string(const std::string& s) {
  if (s == "raw") return Provenance::raw;
  if (s == "fused") return Provenance::fused;
  throw DataError("unknown provenance '" + s + "'");
}

Split SplitAssignment::of(const std::string& recording_id) const {
  auto it = assignment.find(recording_id);
  if (it == assignment.end()) throw DataError("recording " + recording_id + " has no split assignment");
  return it->second;
}

std::array<std::size_t, 3> SplitAssignment::counts() const {
  std::array<std::size_t, 3> c{0, 0, 0};
  for (const auto& [id, s] : assignment) ++c[static_cast<std::size_t>(s)];
  return c;
}

// UFB1 ------------------------------------------------------------------------

std::vector<char> encode_signal(const SignalFile& s) {
  detail::ByteWriter w;
  w.put_bytes(std::span<const char>(reinterpret_cast<const char*>(kSignalMagic.data()), kSignalMagic.size()));
  w.put<std::uint32_t>(kSignalVersion);
  w.put<std::uint32_t>(s.channels);
  w.put<std::uint64_t>(s.length);
  w.put<double>(s.sample_rate_hz);
  w.put_array(std::span<const float>(s.samples));
  return std::move(w).take();
}

SignalFile decode_signal(std::span<const char> bytes) {
  detail::ByteReader r(bytes);
  constexpr std::size_t header = 4 + 4 + 4 + 8 + 8;
  if (!r.has(header)) throw SignalFormatError("UFB1: truncated header");
  auto magic = r.get_bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kSignalMagic.begin(),
                  [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; }))
    throw SignalFormatError("UFB1: bad magic");
  const auto version = r.get<std::uint32_t>();
  if (version != kSignalVersion) throw SignalFormatError("UFB1: unsupported version " + std::to_string(version));
  SignalFile s;
  s.channels = r.get<std::uint32_t>();
  s.length = r.get<std::uint64_t>();
  s.sample_rate_hz = r.get<double>();
  const auto count = static_cast<std::size_t>(s.channels) * s.length;
  if (s.length != 0 && count / s.length != s.channels) throw SignalFormatError("UFB1: dimension overflow");
  if (r.remaining() != count * sizeof(float))
    throw SignalFormatError("UFB1: payload size " + std::to_string(r.remaining()) + " does not match " +
                            std::to_string(count) + " float32 values");
  s.samples.resize(count);
  r.get_array(std::span<float>(s.samples));
  return s;
}

std::vector<char> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const fs::path& path, std::span<const char> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::string read_text_file(const fs::path& path) {
  auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text_file(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span<const char>(text.data(), text.size()));
}

void write_signal(const fs::path& path, const SignalFile& s) { write_file_bytes(path, encode_signal(s)); }

SignalFile read_signal(const fs::path& path) {
  auto bytes = read_file_bytes(path);
  return decode_signal(bytes);
}

void write_recording(const fs::path& path, const RawRecording& rec) {
  check_recording(rec);
  write_signal(path, SignalFile{rec.channels, rec.length, rec.sample_rate_hz, rec.samples});
}

// Manifests -------------------------------------------------------------------

DatasetManifest parse_manifest(const std::string& json_text) {
  DatasetManifest m;
  try {
    const json j = json::parse(json_text);
    m.dataset_id = j.at("dataset_id").get<std::string>();
    m.label_names = j.at("label_names").get<std::vector<std::string>>();
    m.notes = j.value("notes", std::string{});
    for (const auto& r : j.at("recordings")) {
      ManifestEntry e;
      e.path = r.at("path").get<std::string>();
      if (r.contains("label") && !r.at("label").is_null()) e.label = r.at("label").get<int>();
      if (r.contains("condition_id") && !r.at("condition_id").is_null())
        e.condition_id = r.at("condition_id").get<std::string>();
      m.recordings.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ManifestParseError(std::string("manifest: ") + e.what());
  }
  return m;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json j;
  j["dataset_id"] = m.dataset_id;
  j["label_names"] = m.label_names;
  j["notes"] = m.notes;
  j["recordings"] = json::array();
  for (const auto& e : m.recordings) {
    json r;
    r["path"] = e.path;
    r["label"] = e.label ? json(*e.label) : json(nullptr);
    r["condition_id"] = e.condition_id ? json(*e.condition_id) : json(nullptr);
    j["recordings"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

DatasetManifest read_manifest(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ManifestParseError(e.what());
  }
  return parse_manifest(text);
}

void write_manifest(const fs::path& path, const DatasetManifest& m) { write_text_file(path, manifest_to_json(m)); }

RawRecording load_recording(const DatasetManifest& m, std::size_t i, const fs::path& root) {
  const auto& e = m.recordings.at(i);
  SignalFile s = read_signal(root / e.path);
  RawRecording rec;
  rec.recording_id = m.recording_id(i);
  rec.channels = s.channels;
  rec.length = s.length;
  rec.sample_rate_hz = s.sample_rate_hz;
  rec.samples = std::move(s.samples);
  rec.label = e.label;
  rec.dataset_id = m.dataset_id;
  rec.condition_id = e.condition_id;
  check_recording(rec);
  return rec;
}

std::vector<ManifestIssue> validate_manifest(const DatasetManifest& m, const fs::path& root) {
  std::vector<ManifestIssue> issues;
  std::set<std::string> seen;
  const auto n_labels = static_cast<int>(m.label_names.size());
  for (std::size_t i = 0; i < m.recordings.size(); ++i) {
    const auto& e = m.recordings[i];
    if (!seen.insert(e.path).second) {
      issues.push_back({e.path, "duplicate recording path"});
      continue;
    }
    if (e.label && (*e.label < 0 || *e.label >= n_labels)) {
      issues.push_back({e.path, "label out of range: " + std::to_string(*e.label) + " not in [0, " +
                                    std::to_string(n_labels) + ")"});
    }
    const fs::path p = root / e.path;
    if (!fs::exists(p)) {
      issues.push_back({e.path, "missing file: " + p.string()});
      continue;
    }
    try {
      (void)load_recording(m, i, root);
    } catch (const Error& err) {
      issues.push_back({e.path, err.what()});
    }
  }
  return issues;
}

}  // namespace unifault
