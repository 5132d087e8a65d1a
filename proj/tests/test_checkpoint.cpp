#include <doctest.h>

#include <filesystem>

#include "unifault/checkpoint.hpp"
#include "unifault/errors.hpp"

using namespace unifault;
namespace fs = std::filesystem;

namespace {

EncoderConfig tiny() {
  EncoderConfig c;
  c.variant = "tiny";
  c.input_length = 32;
  c.patch_size = 8;
  c.model_dim = 8;
  c.num_layers = 2;
  c.num_heads = 2;
  return c;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit-exact") {
  const auto cfg = tiny();
  const auto p = init_parameters<float>(cfg, 11);
  const auto dir = fs::temp_directory_path() / "unifault_test_ckpt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  save_checkpoint(p, cfg, dir / "a.ufck");
  const auto [q, cfg2] = load_checkpoint(dir / "a.ufck");
  CHECK(cfg2 == cfg);
  const auto ta = p.tensors();
  const auto tb = q.tensors();
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i].name == tb[i].name);
    CHECK(ta[i].shape == tb[i].shape);
    CHECK(std::equal(ta[i].values().begin(), ta[i].values().end(), tb[i].values().begin()));
  }
  CHECK(checkpoint_bytes(q, cfg2) == checkpoint_bytes(p, cfg));

  Matrix<float> x(3, 32);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = float(std::sin(0.37 * double(i)));
  CHECK(encoder_forward(p, cfg, x) == encoder_forward(q, cfg2, x));

  auto other = cfg;
  other.num_layers = 1;
  CHECK_THROWS_AS(load_checkpoint(dir / "a.ufck", other), ConfigMismatchError);
  fs::remove_all(dir);
}

TEST_CASE("malformed checkpoints are rejected") {
  const auto bytes = checkpoint_bytes(init_parameters<float>(tiny(), 1), tiny());
  CHECK(bytes[0] == 'U');
  CHECK(bytes[3] == 'K');
  auto bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), CheckpointFormatError);
  bad = bytes;
  bad[4] = 9;
  CHECK_THROWS_AS(decode_checkpoint(bad), CheckpointFormatError);
  for (std::size_t cut : {std::size_t(6), bytes.size() / 2, bytes.size() - 1}) {
    std::vector<char> part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    CHECK_THROWS_AS(decode_checkpoint(part), CheckpointTruncatedError);
  }
  bad = bytes;
  bad.push_back(0);
  CHECK_THROWS_AS(decode_checkpoint(bad), CheckpointFormatError);
}

TEST_CASE("generic container round trip") {
  CheckpointFile f;
  f.config_json = R"({"kind":"adapter"})";
  f.tensors.push_back({"w", {2, 3}, {1, 2, 3, 4, 5, 6}});
  f.tensors.push_back({"b", {3}, {0.5f, -0.5f, 0}});
  const auto back = decode_checkpoint(encode_checkpoint(f));
  CHECK(back.config_json == f.config_json);
  REQUIRE(back.tensors.size() == 2);
  CHECK(back.tensors[0].shape == f.tensors[0].shape);
  CHECK(back.tensors[1].values == f.tensors[1].values);
}
