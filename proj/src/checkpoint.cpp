// SPDX-License-Identifier: Apache-2.0
#include "unifault/checkpoint.hpp"

#include <algorithm>
#include <cstring>

#include "byte_io.hpp"
#include "unifault/errors.hpp"

namespace unifault {

using nlohmann::json;

std::vector<char> encode_checkpoint(const CheckpointFile& file) {
  detail::ByteWriter w;
  w.put_bytes(std::span<const char>(reinterpret_cast<const char*>(kCheckpointMagic.data()), kCheckpointMagic.size()));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(file.config_json.size()));
  w.put_bytes(file.config_json);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(file.tensors.size()));
  for (const auto& t : file.tensors) {
    if (t.name.size() > UINT16_MAX) throw CheckpointFormatError("tensor name too long: " + t.name);
    if (t.shape.size() > UINT8_MAX) throw CheckpointFormatError("tensor rank too large: " + t.name);
    w.put<std::uint16_t>(static_cast<std::uint16_t>(t.name.size()));
    w.put_bytes(t.name);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.shape.size()));
    for (auto dim : t.shape) w.put<std::uint64_t>(dim);
    w.put_array(std::span<const float>(t.values));
  }
  return std::move(w).take();
}

CheckpointFile decode_checkpoint(std::span<const char> bytes) {
  detail::ByteReader r(bytes);
  auto need = [&](std::size_t n, const char* what) {
    if (!r.has(n)) throw CheckpointTruncatedError(std::string("checkpoint truncated while reading ") + what);
  };
  need(4, "magic");
  auto magic = r.get_bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kCheckpointMagic.begin(),
                  [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; }))
    throw CheckpointFormatError("not a UFCK checkpoint (bad magic)");
  need(4, "version");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointFormatError("unsupported checkpoint version " + std::to_string(version));

  CheckpointFile file;
  need(4, "config length");
  const auto cfg_len = r.get<std::uint32_t>();
  need(cfg_len, "config block");
  auto cfg = r.get_bytes(cfg_len);
  file.config_json.assign(cfg.begin(), cfg.end());
  need(4, "tensor count");
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord t;
    need(2, "tensor name length");
    const auto name_len = r.get<std::uint16_t>();
    need(name_len, "tensor name");
    auto name = r.get_bytes(name_len);
    t.name.assign(name.begin(), name.end());
    need(1, "tensor rank");
    const auto rank = r.get<std::uint8_t>();
    need(8 * static_cast<std::size_t>(rank), "tensor dims");
    std::size_t elements = 1;
    for (std::uint8_t k = 0; k < rank; ++k) {
      t.shape.push_back(r.get<std::uint64_t>());
      elements *= static_cast<std::size_t>(t.shape.back());
    }
    if (elements > r.remaining() / sizeof(float))
      throw CheckpointTruncatedError("checkpoint truncated while reading tensor payload of " + t.name);
    t.values.resize(elements);
    r.get_array(std::span<float>(t.values));
    file.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) throw CheckpointFormatError("trailing bytes after last tensor");
  return file;
}

json encoder_config_to_json(const EncoderConfig& cfg) {
  return json{{"kind", "encoder"},
              {"variant", cfg.variant},
              {"input_length", cfg.input_length},
              {"patch_size", cfg.patch_size},
              {"model_dim", cfg.model_dim},
              {"num_layers", cfg.num_layers},
              {"num_heads", cfg.num_heads},
              {"ffn_ratio", cfg.ffn_ratio}};
}

EncoderConfig encoder_config_from_json(const json& j) {
  try {
    EncoderConfig cfg;
    cfg.variant = j.value("variant", std::string("custom"));
    cfg.input_length = j.at("input_length").get<std::size_t>();
    cfg.patch_size = j.at("patch_size").get<std::size_t>();
    cfg.model_dim = j.at("model_dim").get<std::size_t>();
    cfg.num_layers = j.at("num_layers").get<std::size_t>();
    cfg.num_heads = j.at("num_heads").get<std::size_t>();
    cfg.ffn_ratio = j.at("ffn_ratio").get<std::size_t>();
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw CheckpointFormatError(std::string("encoder config block: ") + e.what());
  }
}

std::vector<char> checkpoint_bytes(const Parameters<float>& p, const EncoderConfig& cfg) {
  check_shapes(p, cfg);
  CheckpointFile file;
  file.config_json = encoder_config_to_json(cfg).dump();
  for (const auto& t : p.tensors()) {
    auto v = t.values();
    file.tensors.push_back({t.name, t.shape, std::vector<float>(v.begin(), v.end())});
  }
  return encode_checkpoint(file);
}

void save_checkpoint(const Parameters<float>& p, const EncoderConfig& cfg, const std::filesystem::path& path) {
  write_file_bytes(path, checkpoint_bytes(p, cfg));
}

std::pair<Parameters<float>, EncoderConfig> load_checkpoint(const std::filesystem::path& path) {
  const auto file = decode_checkpoint(read_file_bytes(path));
  json j;
  try {
    j = json::parse(file.config_json);
  } catch (const json::exception& e) {
    throw CheckpointFormatError(std::string("checkpoint config block is not JSON: ") + e.what());
  }
  if (j.value("kind", std::string()) != "encoder") throw CheckpointFormatError("checkpoint does not hold an encoder");
  const auto cfg = encoder_config_from_json(j);
  auto p = Parameters<float>::zeros(cfg);
  auto refs = p.tensors();
  if (refs.size() != file.tensors.size())
    throw ConfigMismatchError("checkpoint holds " + std::to_string(file.tensors.size()) + " tensors, config implies " +
                              std::to_string(refs.size()));
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& rec = file.tensors[i];
    if (rec.name != refs[i].name || rec.shape != refs[i].shape)
      throw ConfigMismatchError("checkpoint tensor " + rec.name + " disagrees with the stored config");
    std::copy(rec.values.begin(), rec.values.end(), refs[i].data);
  }
  return {std::move(p), cfg};
}

std::pair<Parameters<float>, EncoderConfig> load_checkpoint(const std::filesystem::path& path,
                                                            const EncoderConfig& expected) {
  auto loaded = load_checkpoint(path);
  const auto& got = loaded.second;
  if (got.input_length != expected.input_length || got.patch_size != expected.patch_size ||
      got.model_dim != expected.model_dim || got.num_layers != expected.num_layers ||
      got.num_heads != expected.num_heads || got.ffn_ratio != expected.ffn_ratio)
    throw ConfigMismatchError("checkpoint config (d=" + std::to_string(got.model_dim) + ", N=" +
                              std::to_string(got.num_layers) + ") does not match expected (d=" +
                              std::to_string(expected.model_dim) + ", N=" + std::to_string(expected.num_layers) + ")");
  return loaded;
}

}  // namespace unifault
