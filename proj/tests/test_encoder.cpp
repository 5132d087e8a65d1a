#include <doctest.h>

#include <cmath>
#include <cstring>

#include "unifault/checkpoint.hpp"
#include "unifault/contrastive.hpp"
#include "unifault/encoder.hpp"
#include "unifault/errors.hpp"
#include "unifault/rng.hpp"
#include "oracles.hpp"

using namespace unifault;
using Md = Matrix<double>;

namespace {

EncoderConfig tiny() {
  EncoderConfig c;
  c.variant = "tiny";
  c.input_length = 32;
  c.patch_size = 8;
  c.model_dim = 8;
  c.num_layers = 1;
  c.num_heads = 2;
  c.ffn_ratio = 4;
  return c;
}

Md random_inputs(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Md x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  return x;
}

// Pushes every tensor off its initial value so LayerNorm gains and biases
// take generic values.
Parameters<double> perturbed(const EncoderConfig& cfg, std::uint64_t seed) {
  auto p = init_parameters<double>(cfg, seed);
  Rng rng(seed + 99);
  for (auto& t : p.tensors())
    for (auto& v : t.values()) v += rng.normal(0.0, 0.3);
  return p;
}

}  // namespace

TEST_CASE("parameter counts") {
  // Per layer: four d x d attention maps with biases, two FFN maps with
  // biases, two LayerNorms. Outside: patch map, positional table, final LN, head.
  auto formula = [](std::size_t d, std::size_t n, std::size_t patch, std::size_t tokens, std::size_t f) {
    const std::size_t layer = 4 * (d * d + d) + (d * f + f) + (f * d + d) + 4 * d;
    return n * layer + (patch * d + d) + tokens * d + 2 * d + (d * d + d);
  };
  CHECK(parameter_count(EncoderConfig::lite()) == formula(128, 4, 16, 64, 512));
  CHECK(parameter_count(EncoderConfig::base()) == formula(256, 8, 16, 64, 1024));
  CHECK(count_parameters(Parameters<float>::zeros(EncoderConfig::lite())) == parameter_count(EncoderConfig::lite()));
  CHECK(count_parameters(Parameters<float>::zeros(EncoderConfig::base())) == parameter_count(EncoderConfig::base()));
  CHECK(std::abs(static_cast<double>(parameter_count(EncoderConfig::lite())) / 823000.0 - 1.0) <= 0.03);
  CHECK(std::abs(static_cast<double>(parameter_count(EncoderConfig::base())) / 6400000.0 - 1.0) <= 0.03);
}

TEST_CASE("config validation") {
  auto c = EncoderConfig::lite();
  c.input_length = 1000;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = EncoderConfig::lite();
  c.num_heads = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(EncoderConfig::preset("huge"), ConfigError);
}

TEST_CASE("initialization statistics and determinism") {
  const auto cfg = EncoderConfig::lite();
  const auto a = init_parameters<float>(cfg, 5);
  const auto b = init_parameters<float>(cfg, 5);
  const auto c = init_parameters<float>(cfg, 6);
  CHECK(checkpoint_bytes(a, cfg) == checkpoint_bytes(b, cfg));
  CHECK(checkpoint_bytes(a, cfg) != checkpoint_bytes(c, cfg));
  CHECK((a.layers[0].ln1_gain.array() == 1.0f).all());
  CHECK((a.layers[0].bq.array() == 0.0f).all());
  const auto& w = a.layers[0].w1;
  const double mean = w.cast<double>().mean();
  const double sd = std::sqrt((w.cast<double>().array() - mean).square().mean());
  CHECK(std::abs(mean) < 1e-3);
  CHECK(sd == doctest::Approx(0.02).epsilon(0.02));
}

TEST_CASE("forward shapes and input validation") {
  const auto cfg = tiny();
  const auto p = init_parameters<double>(cfg, 1);
  const Md x = random_inputs(3, 32, 2);
  const Md out = encoder_forward(p, cfg, x);
  CHECK(out.rows() == 3);
  CHECK(out.cols() == 8);
  CHECK_THROWS_AS(encoder_forward(p, cfg, random_inputs(3, 31, 2)), ShapeError);
  Md bad = x;
  bad(1, 4) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(encoder_forward(p, cfg, bad), NumericInputError);
}

TEST_CASE("rows are encoded independently") {
  const auto cfg = tiny();
  const auto p = perturbed(cfg, 4);
  const Md x = random_inputs(4, 32, 8);
  const Md all = encoder_forward(p, cfg, x);
  for (Eigen::Index r = 0; r < 4; ++r) {
    const Md one = encoder_forward(p, cfg, Md(x.row(r)));
    CHECK((one.row(0) - all.row(r)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("end-to-end parameter gradients match central differences") {
  for (std::uint64_t seed : {3u, 4u}) {
    const auto r = oracle::encoder_grad_check(tiny(), 3, seed);
    INFO("worst tensor " << r.tensor);
    CHECK(r.worst < 1e-4);
  }
}

TEST_CASE("threaded encoding matches single-threaded bits") {
  const auto cfg = EncoderConfig::lite();
  const auto p = init_parameters<float>(cfg, 9);
  std::vector<Window> ws(130);
  Rng rng(4);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    ws[i].id = "w" + std::to_string(i);
    ws[i].values.resize(1024);
    for (auto& v : ws[i].values) v = static_cast<float>(rng.uniform());
  }
  const auto a = encode(ws, p, cfg, false, 1);
  const auto b = encode(ws, p, cfg, false, 3);
  CHECK(a.pooled.rows() == 130);
  CHECK(std::memcmp(a.pooled.data(), b.pooled.data(), sizeof(float) * static_cast<std::size_t>(a.pooled.size())) == 0);
  const auto t = encode(std::span<const Window>(ws).first(2), p, cfg, true, 1);
  REQUIRE(t.tokens.has_value());
  CHECK(t.tokens->rows() == 2 * 64);
}

TEST_CASE("multichannel encoding concatenates channels") {
  const auto cfg = tiny();
  const auto p = init_parameters<float>(cfg, 9);
  MultichannelWindow mw;
  Rng rng(1);
  for (int c = 0; c < 3; ++c) {
    Window w;
    w.id = "r#c" + std::to_string(c) + "#s0";
    w.source_channel = static_cast<std::uint32_t>(c);
    w.values.resize(32);
    for (auto& v : w.values) v = static_cast<float>(rng.uniform());
    mw.per_channel.push_back(w);
  }
  const std::vector<MultichannelWindow> batch{mw, mw};
  const auto out = encode(batch, p, cfg);
  CHECK(out.pooled.cols() == 24);
  const auto single = encode(std::span<const Window>(mw.per_channel), p, cfg);
  for (Eigen::Index c = 0; c < 3; ++c)
    CHECK((out.pooled.row(1).segment(c * 8, 8) - single.pooled.row(c)).cwiseAbs().maxCoeff() < 1e-6f);
}

TEST_CASE("attention rows are probability distributions") {
  EncoderConfig cfg = tiny();
  cfg.num_layers = 2;
  const auto p = init_parameters<double>(cfg, 12);
  ForwardCache<double> cache;
  encoder_forward(p, cfg, random_inputs(4, 32, 13), &cache);
  REQUIRE(cache.layers.size() == 2);
  double worst = 0;
  for (const auto& layer : cache.layers) {
    REQUIRE(layer.attention.size() == 4 * cfg.num_heads);
    for (const auto& a : layer.attention) {
      CHECK(a.rows() == Eigen::Index(cfg.tokens()));
      CHECK(a.minCoeff() >= 0.0);
      worst = std::max(worst, (a.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("patch order matters") {
  const auto cfg = tiny();
  const auto p = init_parameters<double>(cfg, 14);
  const Md x = random_inputs(2, 32, 15);
  Md swapped = x;
  // Exchange the first and last patch of every row.
  swapped.leftCols(8) = x.rightCols(8);
  swapped.rightCols(8) = x.leftCols(8);
  const Md a = encoder_forward(p, cfg, x);
  const Md b = encoder_forward(p, cfg, swapped);
  CHECK((a - b).cwiseAbs().maxCoeff() > 1e-9);
}
