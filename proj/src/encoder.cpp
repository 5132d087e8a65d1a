// SPDX-License-Identifier: Apache-2.0
#include "unifault/encoder.hpp"

#include <cmath>
#include <numbers>
#include <thread>

#include <unsupported/Eigen/SpecialFunctions>

#include "unifault/errors.hpp"
#include "unifault/rng.hpp"

namespace unifault {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStd = 0.02;
constexpr std::size_t kEncodeChunk = 64;

}  // namespace

EncoderConfig EncoderConfig::lite() { return EncoderConfig{"lite", 1024, 16, 128, 4, 4, 4}; }

EncoderConfig EncoderConfig::base() { return EncoderConfig{"base", 1024, 16, 256, 8, 8, 4}; }

EncoderConfig EncoderConfig::preset(const std::string& name) {
  if (name == "lite") return lite();
  if (name == "base") return base();
  throw ConfigError("unknown encoder variant '" + name + "' (expected lite or base)");
}

void EncoderConfig::validate() const {
  if (input_length < 1 || patch_size < 1 || model_dim < 1 || num_layers < 1 || num_heads < 1 || ffn_ratio < 1)
    throw ConfigError("encoder: every count must be >= 1");
  if (input_length % patch_size != 0)
    throw ConfigError("encoder: patch_size " + std::to_string(patch_size) + " does not divide input_length " +
                      std::to_string(input_length));
  if (model_dim % num_heads != 0)
    throw ConfigError("encoder: num_heads " + std::to_string(num_heads) + " does not divide model_dim " +
                      std::to_string(model_dim));
}

// Parameter bookkeeping -------------------------------------------------------

template <typename T>
Parameters<T> Parameters<T>::zeros(const EncoderConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(cfg.model_dim);
  const auto f = static_cast<Eigen::Index>(cfg.ffn_dim());
  Parameters<T> p;
  p.patch_weight = Matrix<T>::Zero(static_cast<Eigen::Index>(cfg.patch_size), d);
  p.patch_bias = RowVector<T>::Zero(d);
  p.positional = Matrix<T>::Zero(static_cast<Eigen::Index>(cfg.tokens()), d);
  p.layers.resize(cfg.num_layers);
  for (auto& L : p.layers) {
    L.ln1_gain = RowVector<T>::Zero(d);
    L.ln1_bias = RowVector<T>::Zero(d);
    L.wq = Matrix<T>::Zero(d, d);
    L.wk = Matrix<T>::Zero(d, d);
    L.wv = Matrix<T>::Zero(d, d);
    L.wo = Matrix<T>::Zero(d, d);
    L.bq = RowVector<T>::Zero(d);
    L.bk = RowVector<T>::Zero(d);
    L.bv = RowVector<T>::Zero(d);
    L.bo = RowVector<T>::Zero(d);
    L.ln2_gain = RowVector<T>::Zero(d);
    L.ln2_bias = RowVector<T>::Zero(d);
    L.w1 = Matrix<T>::Zero(d, f);
    L.b1 = RowVector<T>::Zero(f);
    L.w2 = Matrix<T>::Zero(f, d);
    L.b2 = RowVector<T>::Zero(d);
  }
  p.final_gain = RowVector<T>::Zero(d);
  p.final_bias = RowVector<T>::Zero(d);
  p.head_weight = Matrix<T>::Zero(d, d);
  p.head_bias = RowVector<T>::Zero(d);
  return p;
}

namespace {

template <typename Q, typename P>
std::vector<TensorRef<Q>> collect_tensors(P& p) {
  std::vector<TensorRef<Q>> out;
  auto mat = [&](std::string name, auto& m) {
    out.push_back({std::move(name), m.data(),
                   {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}});
  };
  auto vec = [&](std::string name, auto& v) {
    out.push_back({std::move(name), v.data(), {static_cast<std::uint64_t>(v.size())}});
  };
  mat("patch.weight", p.patch_weight);
  vec("patch.bias", p.patch_bias);
  mat("positional", p.positional);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    const std::string pre = "layers." + std::to_string(l) + ".";
    vec(pre + "ln1.gain", L.ln1_gain);
    vec(pre + "ln1.bias", L.ln1_bias);
    mat(pre + "attn.wq", L.wq);
    vec(pre + "attn.bq", L.bq);
    mat(pre + "attn.wk", L.wk);
    vec(pre + "attn.bk", L.bk);
    mat(pre + "attn.wv", L.wv);
    vec(pre + "attn.bv", L.bv);
    mat(pre + "attn.wo", L.wo);
    vec(pre + "attn.bo", L.bo);
    vec(pre + "ln2.gain", L.ln2_gain);
    vec(pre + "ln2.bias", L.ln2_bias);
    mat(pre + "ffn.w1", L.w1);
    vec(pre + "ffn.b1", L.b1);
    mat(pre + "ffn.w2", L.w2);
    vec(pre + "ffn.b2", L.b2);
  }
  vec("final_ln.gain", p.final_gain);
  vec("final_ln.bias", p.final_bias);
  mat("head.weight", p.head_weight);
  vec("head.bias", p.head_bias);
  return out;
}

bool is_gain(const std::string& name) { return name.ends_with(".gain"); }
bool is_bias(const std::string& name) { return name.ends_with("bias") || name.ends_with(".bq") ||
                                               name.ends_with(".bk") || name.ends_with(".bv") ||
                                               name.ends_with(".bo") || name.ends_with(".b1") ||
                                               name.ends_with(".b2"); }

}  // namespace

template <typename T>
std::vector<TensorRef<T>> Parameters<T>::tensors() {
  return collect_tensors<T>(*this);
}

template <typename T>
std::vector<TensorRef<const T>> Parameters<T>::tensors() const {
  return collect_tensors<const T>(*this);
}

template <typename T>
template <typename U>
Parameters<U> Parameters<T>::cast() const {
  Parameters<U> out;
  out.patch_weight = patch_weight.template cast<U>();
  out.patch_bias = patch_bias.template cast<U>();
  out.positional = positional.template cast<U>();
  out.layers.resize(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& a = layers[l];
    auto& b = out.layers[l];
    b.ln1_gain = a.ln1_gain.template cast<U>();
    b.ln1_bias = a.ln1_bias.template cast<U>();
    b.wq = a.wq.template cast<U>();
    b.wk = a.wk.template cast<U>();
    b.wv = a.wv.template cast<U>();
    b.wo = a.wo.template cast<U>();
    b.bq = a.bq.template cast<U>();
    b.bk = a.bk.template cast<U>();
    b.bv = a.bv.template cast<U>();
    b.bo = a.bo.template cast<U>();
    b.ln2_gain = a.ln2_gain.template cast<U>();
    b.ln2_bias = a.ln2_bias.template cast<U>();
    b.w1 = a.w1.template cast<U>();
    b.b1 = a.b1.template cast<U>();
    b.w2 = a.w2.template cast<U>();
    b.b2 = a.b2.template cast<U>();
  }
  out.final_gain = final_gain.template cast<U>();
  out.final_bias = final_bias.template cast<U>();
  out.head_weight = head_weight.template cast<U>();
  out.head_bias = head_bias.template cast<U>();
  return out;
}

template <typename T>
bool Parameters<T>::all_finite() const {
  for (const auto& t : tensors()) {
    for (T v : t.values())
      if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename T>
Parameters<T> init_parameters(const EncoderConfig& cfg, std::uint64_t seed) {
  auto p = Parameters<T>::zeros(cfg);
  std::uint64_t index = 0;
  for (auto& t : p.tensors()) {
    Rng rng(derive_seed(seed, 0x1417, index++));
    if (is_gain(t.name)) {
      for (auto& v : t.values()) v = T(1);
    } else if (!is_bias(t.name)) {
      for (auto& v : t.values()) v = static_cast<T>(rng.normal(0.0, kInitStd));
    }
  }
  return p;
}

template <typename T>
std::size_t count_parameters(const Parameters<T>& p) {
  std::size_t n = 0;
  for (const auto& t : p.tensors()) n += t.size();
  return n;
}

std::size_t parameter_count(const EncoderConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.model_dim;
  const std::size_t f = cfg.ffn_dim();
  const std::size_t per_layer = 4 * (d * d + d) + (d * f + f) + (f * d + d) + 4 * d;
  return cfg.num_layers * per_layer + (cfg.patch_size * d + d) + cfg.tokens() * d + 2 * d + (d * d + d);
}

template <typename T>
void check_shapes(const Parameters<T>& p, const EncoderConfig& cfg) {
  const auto expected = Parameters<T>::zeros(cfg);
  const auto want = expected.tensors();
  const auto have = p.tensors();
  if (want.size() != have.size())
    throw ConfigMismatchError("parameter tensor count " + std::to_string(have.size()) + " does not match config (" +
                              std::to_string(want.size()) + ")");
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].shape != have[i].shape)
      throw ConfigMismatchError("tensor " + want[i].name + " has a shape inconsistent with the encoder config");
  }
}

// Forward / backward ------------------------------------------------------------

namespace {

template <typename T>
void layer_norm(const Matrix<T>& x, const RowVector<T>& gain, const RowVector<T>& bias, Matrix<T>& xhat,
                ColVector<T>& rstd, Matrix<T>& y) {
  const T n = static_cast<T>(x.cols());
  const ColVector<T> mean = x.rowwise().mean();
  xhat = x.colwise() - mean;
  const ColVector<T> var = xhat.array().square().rowwise().sum() / n;
  rstd = (var.array() + static_cast<T>(kLayerNormEps)).rsqrt();
  xhat.array().colwise() *= rstd.array();
  y = (xhat.array().rowwise() * gain.array()).rowwise() + bias.array();
}

template <typename T>
Matrix<T> layer_norm_backward(const Matrix<T>& dy, const Matrix<T>& xhat, const ColVector<T>& rstd,
                              const RowVector<T>& gain, RowVector<T>& dgain, RowVector<T>& dbias) {
  dgain += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbias += dy.colwise().sum();
  Matrix<T> dxhat = dy.array().rowwise() * gain.array();
  const ColVector<T> m1 = dxhat.rowwise().mean();
  const ColVector<T> m2 = (dxhat.array() * xhat.array()).rowwise().mean();
  dxhat = (dxhat.colwise() - m1) - (xhat.array().colwise() * m2.array()).matrix();
  dxhat.array().colwise() *= rstd.array();
  return dxhat;
}

template <typename T>
void softmax_rows(Matrix<T>& s) {
  const ColVector<T> mx = s.rowwise().maxCoeff();
  s = (s.colwise() - mx).array().exp();
  const ColVector<T> sum = s.rowwise().sum();
  s.array().colwise() /= sum.array();
}

template <typename T>
Matrix<T> gelu(const Matrix<T>& u) {
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  return (u.array() * (T(0.5) * (T(1) + (u.array() * inv_sqrt2).erf()))).matrix();
}

template <typename T>
Matrix<T> gelu_grad(const Matrix<T>& u) {
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  const T inv_sqrt2pi = static_cast<T>(1.0 / std::sqrt(2.0 * std::numbers::pi));
  const auto a = u.array();
  return (T(0.5) * (T(1) + (a * inv_sqrt2).erf()) + a * (T(-0.5) * a.square()).exp() * inv_sqrt2pi).matrix();
}

}  // namespace

template <typename T>
Matrix<T> encoder_forward(const Parameters<T>& p, const EncoderConfig& cfg, const Matrix<T>& inputs,
                          ForwardCache<T>* cache) {
  using Index = Eigen::Index;
  if (static_cast<std::size_t>(inputs.cols()) != cfg.input_length)
    throw ShapeError("encoder: input length " + std::to_string(inputs.cols()) + " != " +
                     std::to_string(cfg.input_length));
  if (!inputs.allFinite()) throw NumericInputError("encoder: non-finite input value");

  const Index B = inputs.rows();
  const auto Tk = static_cast<Index>(cfg.tokens());
  const auto P = static_cast<Index>(cfg.patch_size);
  const auto d = static_cast<Index>(cfg.model_dim);
  const auto H = static_cast<Index>(cfg.num_heads);
  const auto hd = static_cast<Index>(cfg.head_dim());
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));

  // A row-major batch x L matrix has the same memory layout as (batch * tokens) x P.
  Matrix<T> patches = Eigen::Map<const Matrix<T>>(inputs.data(), B * Tk, P);
  Matrix<T> z = (patches * p.patch_weight).rowwise() + p.patch_bias;
  for (Index b = 0; b < B; ++b) z.middleRows(b * Tk, Tk) += p.positional;

  if (cache) {
    cache->batch = static_cast<std::size_t>(B);
    cache->patches = std::move(patches);
    cache->layers.assign(p.layers.size(), {});
  }

  Matrix<T> xhat, h, q, k, v, context(B * Tk, d), s, u, g;
  ColVector<T> rstd;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& L = p.layers[l];
    layer_norm(z, L.ln1_gain, L.ln1_bias, xhat, rstd, h);
    q = (h * L.wq).rowwise() + L.bq;
    k = (h * L.wk).rowwise() + L.bk;
    v = (h * L.wv).rowwise() + L.bv;
    std::vector<Matrix<T>> attention;
    if (cache) attention.reserve(static_cast<std::size_t>(B * H));
    for (Index b = 0; b < B; ++b) {
      for (Index hh = 0; hh < H; ++hh) {
        s.noalias() = q.block(b * Tk, hh * hd, Tk, hd) * k.block(b * Tk, hh * hd, Tk, hd).transpose();
        s *= scale;
        softmax_rows(s);
        context.block(b * Tk, hh * hd, Tk, hd).noalias() = s * v.block(b * Tk, hh * hd, Tk, hd);
        if (cache) attention.push_back(s);
      }
    }
    z.noalias() += context * L.wo;
    z.rowwise() += L.bo;

    if (cache) {
      auto& C = cache->layers[l];
      C.xhat1 = std::move(xhat);
      C.rstd1 = std::move(rstd);
      C.h1 = std::move(h);
      C.q = std::move(q);
      C.k = std::move(k);
      C.v = std::move(v);
      C.context = context;
      C.attention = std::move(attention);
    }

    layer_norm(z, L.ln2_gain, L.ln2_bias, xhat, rstd, h);
    u = (h * L.w1).rowwise() + L.b1;
    g = gelu(u);
    z.noalias() += g * L.w2;
    z.rowwise() += L.b2;

    if (cache) {
      auto& C = cache->layers[l];
      C.xhat2 = std::move(xhat);
      C.rstd2 = std::move(rstd);
      C.h2 = std::move(h);
      C.u = std::move(u);
      C.g = std::move(g);
    }
  }

  Matrix<T> y;
  layer_norm(z, p.final_gain, p.final_bias, xhat, rstd, y);
  Matrix<T> pooled(B, d);
  for (Index b = 0; b < B; ++b) pooled.row(b) = y.middleRows(b * Tk, Tk).colwise().mean();
  if (cache) {
    cache->xhat_final = std::move(xhat);
    cache->rstd_final = std::move(rstd);
    cache->tokens_out = std::move(y);
  }
  return pooled;
}

template <typename T>
void encoder_backward(const Parameters<T>& p, const EncoderConfig& cfg, const ForwardCache<T>& cache,
                      const Matrix<T>& grad_pooled, Parameters<T>& grads) {
  using Index = Eigen::Index;
  const auto B = static_cast<Index>(cache.batch);
  const auto Tk = static_cast<Index>(cfg.tokens());
  const auto d = static_cast<Index>(cfg.model_dim);
  const auto H = static_cast<Index>(cfg.num_heads);
  const auto hd = static_cast<Index>(cfg.head_dim());
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
  if (grad_pooled.rows() != B || grad_pooled.cols() != d) throw ShapeError("encoder_backward: gradient shape");

  Matrix<T> dy(B * Tk, d);
  const T inv_tokens = T(1) / static_cast<T>(Tk);
  for (Index b = 0; b < B; ++b) dy.middleRows(b * Tk, Tk).rowwise() = grad_pooled.row(b) * inv_tokens;
  Matrix<T> dz =
      layer_norm_backward(dy, cache.xhat_final, cache.rstd_final, p.final_gain, grads.final_gain, grads.final_bias);

  Matrix<T> dg, du, dh, dctx, dq(B * Tk, d), dk(B * Tk, d), dv(B * Tk, d), dA, dS;
  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const auto& L = p.layers[li];
    auto& G = grads.layers[li];
    const auto& C = cache.layers[li];

    // Feed-forward sublayer.
    G.w2.noalias() += C.g.transpose() * dz;
    G.b2 += dz.colwise().sum();
    dg.noalias() = dz * L.w2.transpose();
    du = dg.cwiseProduct(gelu_grad(C.u));
    G.w1.noalias() += C.h2.transpose() * du;
    G.b1 += du.colwise().sum();
    dh.noalias() = du * L.w1.transpose();
    dz += layer_norm_backward(dh, C.xhat2, C.rstd2, L.ln2_gain, G.ln2_gain, G.ln2_bias);

    // Attention sublayer.
    G.wo.noalias() += C.context.transpose() * dz;
    G.bo += dz.colwise().sum();
    dctx.noalias() = dz * L.wo.transpose();
    for (Index b = 0; b < B; ++b) {
      for (Index hh = 0; hh < H; ++hh) {
        const auto& A = C.attention[static_cast<std::size_t>(b * H + hh)];
        const auto rows = b * Tk;
        const auto cols = hh * hd;
        const auto dctx_bh = dctx.block(rows, cols, Tk, hd);
        dA.noalias() = dctx_bh * C.v.block(rows, cols, Tk, hd).transpose();
        dv.block(rows, cols, Tk, hd).noalias() = A.transpose() * dctx_bh;
        const ColVector<T> inner = (dA.array() * A.array()).rowwise().sum();
        dS = (A.array() * (dA.colwise() - inner).array()).matrix() * scale;
        dq.block(rows, cols, Tk, hd).noalias() = dS * C.k.block(rows, cols, Tk, hd);
        dk.block(rows, cols, Tk, hd).noalias() = dS.transpose() * C.q.block(rows, cols, Tk, hd);
      }
    }
    G.wq.noalias() += C.h1.transpose() * dq;
    G.wk.noalias() += C.h1.transpose() * dk;
    G.wv.noalias() += C.h1.transpose() * dv;
    G.bq += dq.colwise().sum();
    G.bk += dk.colwise().sum();
    G.bv += dv.colwise().sum();
    dh.noalias() = dq * L.wq.transpose();
    dh.noalias() += dk * L.wk.transpose();
    dh.noalias() += dv * L.wv.transpose();
    dz += layer_norm_backward(dh, C.xhat1, C.rstd1, L.ln1_gain, G.ln1_gain, G.ln1_bias);
  }

  for (Index b = 0; b < B; ++b) grads.positional += dz.middleRows(b * Tk, Tk);
  grads.patch_weight.noalias() += cache.patches.transpose() * dz;
  grads.patch_bias += dz.colwise().sum();
}

template <typename T>
Matrix<T> project(const Parameters<T>& p, const Matrix<T>& pooled) {
  return (pooled * p.head_weight).rowwise() + p.head_bias;
}

template <typename T>
Matrix<T> project_backward(const Parameters<T>& p, const Matrix<T>& pooled, const Matrix<T>& grad_projected,
                           Parameters<T>& grads) {
  grads.head_weight.noalias() += pooled.transpose() * grad_projected;
  grads.head_bias += grad_projected.colwise().sum();
  return grad_projected * p.head_weight.transpose();
}

// Batch encoding ----------------------------------------------------------------

Matrix<float> stack_inputs(std::span<const Window> batch, const EncoderConfig& cfg) {
  Matrix<float> x(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(cfg.input_length));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& w = batch[i];
    if (w.values.size() != cfg.input_length)
      throw ShapeError("window " + w.id + " has length " + std::to_string(w.values.size()) + ", encoder expects " +
                       std::to_string(cfg.input_length));
    for (std::size_t t = 0; t < w.values.size(); ++t) {
      if (!std::isfinite(w.values[t])) throw NumericInputError("window " + w.id + " contains a non-finite value");
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = w.values[t];
    }
  }
  return x;
}

EmbeddingBatch encode(std::span<const Window> batch, const Parameters<float>& p, const EncoderConfig& cfg,
                      bool keep_tokens, std::size_t threads) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto d = static_cast<Eigen::Index>(cfg.model_dim);
  const auto Tk = static_cast<Eigen::Index>(cfg.tokens());
  EmbeddingBatch out;
  out.pooled.resize(n, d);
  if (keep_tokens) out.tokens = Matrix<float>(n * Tk, d);

  const std::size_t chunks = (batch.size() + kEncodeChunk - 1) / kEncodeChunk;
  auto run_chunk = [&](std::size_t c) {
    const std::size_t lo = c * kEncodeChunk;
    const std::size_t len = std::min(kEncodeChunk, batch.size() - lo);
    const auto x = stack_inputs(batch.subspan(lo, len), cfg);
    ForwardCache<float> cache;
    const auto pooled = encoder_forward(p, cfg, x, keep_tokens ? &cache : nullptr);
    out.pooled.middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(len)) = pooled;
    if (keep_tokens)
      out.tokens->middleRows(static_cast<Eigen::Index>(lo) * Tk, static_cast<Eigen::Index>(len) * Tk) =
          cache.tokens_out;
  };

  threads = std::max<std::size_t>(1, std::min(threads, chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return out;
  }
  // Chunks are fixed-size, so the result is identical for every thread count.
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t c = t; c < chunks; c += threads) run_chunk(c);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

EmbeddingBatch encode(std::span<const MultichannelWindow> batch, const Parameters<float>& p,
                      const EncoderConfig& cfg, std::size_t threads) {
  if (batch.empty()) return EmbeddingBatch{Matrix<float>(0, static_cast<Eigen::Index>(cfg.model_dim)), {}};
  const std::size_t C = batch.front().channels();
  std::vector<Window> flat;
  flat.reserve(batch.size() * C);
  for (const auto& mw : batch) {
    check_multichannel(mw);
    if (mw.channels() != C) throw ShapeError("multichannel batch mixes channel counts");
    for (const auto& w : mw.per_channel) flat.push_back(w);
  }
  auto uni = encode(std::span<const Window>(flat), p, cfg, false, threads);
  // (batch * C) x d in row-major order is batch x (C * d) with channels concatenated.
  EmbeddingBatch out;
  out.pooled = Eigen::Map<const Matrix<float>>(uni.pooled.data(), static_cast<Eigen::Index>(batch.size()),
                                               static_cast<Eigen::Index>(C * cfg.model_dim));
  return out;
}

#define UNIFAULT_INSTANTIATE(T)                                                                                  \
  template struct Parameters<T>;                                                                                \
  template Parameters<T> init_parameters<T>(const EncoderConfig&, std::uint64_t);                                \
  template std::size_t count_parameters<T>(const Parameters<T>&);                                                \
  template void check_shapes<T>(const Parameters<T>&, const EncoderConfig&);                                     \
  template Matrix<T> encoder_forward<T>(const Parameters<T>&, const EncoderConfig&, const Matrix<T>&,            \
                                        ForwardCache<T>*);                                                       \
  template void encoder_backward<T>(const Parameters<T>&, const EncoderConfig&, const ForwardCache<T>&,          \
                                    const Matrix<T>&, Parameters<T>&);                                           \
  template Matrix<T> project<T>(const Parameters<T>&, const Matrix<T>&);                                         \
  template Matrix<T> project_backward<T>(const Parameters<T>&, const Matrix<T>&, const Matrix<T>&, Parameters<T>&);

UNIFAULT_INSTANTIATE(float)
UNIFAULT_INSTANTIATE(double)
#undef UNIFAULT_INSTANTIATE

template Parameters<double> Parameters<float>::cast<double>() const;
template Parameters<float> Parameters<double>::cast<float>() const;
template Parameters<float> Parameters<float>::cast<float>() const;

}  // namespace unifault
