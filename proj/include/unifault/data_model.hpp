// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace unifault {

/// One multi-channel vibration recording at its native sampling rate.
/// Samples are stored channel-major: sample (c, t) lives at c * length + t.
struct RawRecording {
  std::string recording_id;
  std::uint32_t channels = 0;
  std::uint64_t length = 0;
  double sample_rate_hz = 0.0;
  std::vector<float> samples;
  std::optional<int> label;
  std::string dataset_id;
  std::optional<std::string> condition_id;

  std::span<const float> channel(std::uint32_t c) const {
    return std::span<const float>(samples).subspan(c * length, length);
  }
};

/// Throws InvalidInputError describing the first violated invariant.
void check_recording(const RawRecording& rec);

struct ManifestEntry {
  std::string path;
  std::optional<int> label;
  std::optional<std::string> condition_id;
};

struct DatasetManifest {
  std::string dataset_id;
  std::vector<ManifestEntry> recordings;
  std::vector<std::string> label_names;
  std::string notes;

  /// Stable identifier of entry i; unique because manifest paths are unique.
  std::string recording_id(std::size_t i) const { return dataset_id + "/" + recordings.at(i).path; }
};

struct ManifestIssue {
  std::string path;
  std::string message;
};

enum class Provenance { raw, fused };

/// Standardized univariate sequence, the encoder's unit of input.
struct Window {
  std::string id;
  std::vector<float> values;
  std::string source_recording;
  std::uint32_t source_channel = 0;
  std::uint64_t segment_index = 0;
  std::optional<int> label;
  std::string dataset_id;
  Provenance provenance = Provenance::raw;
};

/// The C time-aligned channels of one segment, kept together for fine-tuning.
struct MultichannelWindow {
  std::vector<Window> per_channel;

  std::size_t channels() const { return per_channel.size(); }
  std::optional<int> label() const {
    return per_channel.empty() ? std::nullopt : per_channel.front().label;
  }
};

void check_window(const Window& w, std::size_t target_length);
void check_multichannel(const MultichannelWindow& mw);

enum class Split { train, validation, test };

const char* to_string(Split s);
Split split_from_string(const std::string& s);
const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct SplitAssignment {
  std::map<std::string, Split> assignment;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{1.0, 0.0, 0.0};

  Split of(const std::string& recording_id) const;
  std::array<std::size_t, 3> counts() const;
};

// UFB1 signal files -----------------------------------------------------------

inline constexpr std::array<unsigned char, 4> kSignalMagic{0x55, 0x46, 0x42, 0x31};
inline constexpr std::uint32_t kSignalVersion = 1;

struct SignalFile {
  std::uint32_t channels = 0;
  std::uint64_t length = 0;
  double sample_rate_hz = 0.0;
  std::vector<float> samples;
};

std::vector<char> encode_signal(const SignalFile& s);
SignalFile decode_signal(std::span<const char> bytes);
void write_signal(const std::filesystem::path& path, const SignalFile& s);
SignalFile read_signal(const std::filesystem::path& path);

/// Writes the recording's samples; identity and label live in the manifest.
void write_recording(const std::filesystem::path& path, const RawRecording& rec);

// Manifests -------------------------------------------------------------------

DatasetManifest parse_manifest(const std::string& json_text);
std::string manifest_to_json(const DatasetManifest& m);
/// Throws ManifestParseError when the file is unreadable or malformed.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);

/// Loads recording i of the manifest, resolving its path against root.
RawRecording load_recording(const DatasetManifest& m, std::size_t i, const std::filesystem::path& root);

/// One issue per violation; empty when every recording exists, parses and is valid.
std::vector<ManifestIssue> validate_manifest(const DatasetManifest& m, const std::filesystem::path& root);

// Small file helpers shared by the I/O modules.
std::vector<char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const char> bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace unifault
