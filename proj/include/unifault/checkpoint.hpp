// SPDX-License-Identifier: Apache-2.0
//
// UFCK container: magic "UFCK", u32 version, u32-length JSON config block,
// u32 tensor count, then per tensor a u16-length name, u8 rank, u64 dims and
// float32 payload. Little-endian, no padding.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "unifault/encoder.hpp"

namespace unifault {

inline constexpr std::array<unsigned char, 4> kCheckpointMagic{0x55, 0x46, 0x43, 0x4B};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorRecord {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<float> values;
};

struct CheckpointFile {
  std::string config_json;
  std::vector<TensorRecord> tensors;
};

std::vector<char> encode_checkpoint(const CheckpointFile& file);
/// Throws CheckpointFormatError on bad magic or version and
/// CheckpointTruncatedError when the byte stream ends early.
CheckpointFile decode_checkpoint(std::span<const char> bytes);

nlohmann::json encoder_config_to_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

void save_checkpoint(const Parameters<float>& p, const EncoderConfig& cfg, const std::filesystem::path& path);
std::vector<char> checkpoint_bytes(const Parameters<float>& p, const EncoderConfig& cfg);

std::pair<Parameters<float>, EncoderConfig> load_checkpoint(const std::filesystem::path& path);
/// As above, but the stored config must equal `expected` (ConfigMismatchError otherwise).
std::pair<Parameters<float>, EncoderConfig> load_checkpoint(const std::filesystem::path& path,
                                                            const EncoderConfig& expected);

}  // namespace unifault
