// SPDX-License-Identifier: Apache-2.0
//
// Transformer backbone: non-overlapping patch embedding, learnable positional
// table, pre-LN blocks of multi-head self-attention and a GELU feed-forward
// network, a final LayerNorm and mean pooling over tokens. A linear
// projection head sits on top for contrastive pretraining.
//
// Forward and backward passes are written out by hand and templated on the
// scalar type. Training runs in float; gradient checks run in double.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "unifault/data_model.hpp"

namespace unifault {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;
template <typename T>
using ColVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct EncoderConfig {
  std::string variant = "lite";
  std::size_t input_length = 1024;
  std::size_t patch_size = 16;
  std::size_t model_dim = 128;
  std::size_t num_layers = 4;
  std::size_t num_heads = 4;
  std::size_t ffn_ratio = 4;

  static EncoderConfig lite();
  static EncoderConfig base();
  /// "lite" or "base"; throws ConfigError otherwise.
  static EncoderConfig preset(const std::string& name);

  std::size_t tokens() const { return input_length / patch_size; }
  std::size_t head_dim() const { return model_dim / num_heads; }
  std::size_t ffn_dim() const { return ffn_ratio * model_dim; }

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

/// Mutable view of one named parameter tensor.
template <typename T>
struct TensorRef {
  std::string name;
  T* data;
  std::vector<std::uint64_t> shape;
  std::size_t size() const {
    std::size_t n = 1;
    for (auto s : shape) n *= static_cast<std::size_t>(s);
    return n;
  }
  std::span<T> values() const { return {data, size()}; }
};

template <typename T>
struct LayerParameters {
  RowVector<T> ln1_gain, ln1_bias;
  Matrix<T> wq, wk, wv, wo;
  RowVector<T> bq, bk, bv, bo;
  RowVector<T> ln2_gain, ln2_bias;
  Matrix<T> w1, w2;
  RowVector<T> b1, b2;
};

template <typename T>
struct Parameters {
  Matrix<T> patch_weight;  // patch_size x d
  RowVector<T> patch_bias;
  Matrix<T> positional;  // tokens x d
  std::vector<LayerParameters<T>> layers;
  RowVector<T> final_gain, final_bias;
  Matrix<T> head_weight;  // d x d, pretraining only
  RowVector<T> head_bias;

  /// Correctly shaped, all zero; LayerNorm gains included.
  static Parameters zeros(const EncoderConfig& cfg);

  /// Every tensor in a fixed canonical order with a stable name.
  std::vector<TensorRef<T>> tensors();
  std::vector<TensorRef<const T>> tensors() const;

  template <typename U>
  Parameters<U> cast() const;

  bool all_finite() const;
};

/// Weights ~ Normal(0, 0.02), biases 0, LayerNorm gains 1. Deterministic in seed.
template <typename T>
Parameters<T> init_parameters(const EncoderConfig& cfg, std::uint64_t seed);

template <typename T>
std::size_t count_parameters(const Parameters<T>& p);

/// Closed-form count for a configuration, including the projection head.
std::size_t parameter_count(const EncoderConfig& cfg);

/// Checks every tensor shape against cfg; throws ConfigMismatchError.
template <typename T>
void check_shapes(const Parameters<T>& p, const EncoderConfig& cfg);

/// Activations kept by the forward pass for the backward pass.
template <typename T>
struct ForwardCache {
  struct Layer {
    Matrix<T> xhat1, h1, q, k, v, context;
    ColVector<T> rstd1;
    std::vector<Matrix<T>> attention;  // batch * heads matrices, tokens x tokens
    Matrix<T> xhat2, h2, u, g;
    ColVector<T> rstd2;
  };
  std::size_t batch = 0;
  Matrix<T> patches;  // (batch * tokens) x patch_size
  std::vector<Layer> layers;
  Matrix<T> xhat_final;
  ColVector<T> rstd_final;
  Matrix<T> tokens_out;  // final LayerNorm output, (batch * tokens) x d
};

/// inputs: batch x input_length. Returns pooled embeddings, batch x d.
template <typename T>
Matrix<T> encoder_forward(const Parameters<T>& p, const EncoderConfig& cfg, const Matrix<T>& inputs,
                          ForwardCache<T>* cache = nullptr);

/// Accumulates parameter gradients of a loss whose gradient w.r.t. the pooled
/// output is grad_pooled. Returns nothing; grads are added into `grads`.
template <typename T>
void encoder_backward(const Parameters<T>& p, const EncoderConfig& cfg, const ForwardCache<T>& cache,
                      const Matrix<T>& grad_pooled, Parameters<T>& grads);

/// Projection head: pooled * W + b.
template <typename T>
Matrix<T> project(const Parameters<T>& p, const Matrix<T>& pooled);

/// Accumulates head gradients and returns the gradient w.r.t. pooled.
template <typename T>
Matrix<T> project_backward(const Parameters<T>& p, const Matrix<T>& pooled, const Matrix<T>& grad_projected,
                           Parameters<T>& grads);

/// Pooled (and optionally token-level) representations.
struct EmbeddingBatch {
  Matrix<float> pooled;
  std::optional<Matrix<float>> tokens;  // (batch * tokens) x d

  std::size_t size() const { return static_cast<std::size_t>(pooled.rows()); }
  std::size_t width() const { return static_cast<std::size_t>(pooled.cols()); }
};

/// Encodes univariate windows in fixed-size chunks so results do not depend
/// on the thread count.
EmbeddingBatch encode(std::span<const Window> batch, const Parameters<float>& p, const EncoderConfig& cfg,
                      bool keep_tokens = false, std::size_t threads = 1);

/// Channel-independent encoding; per-channel pooled vectors are concatenated
/// in channel order, giving width C * d.
EmbeddingBatch encode(std::span<const MultichannelWindow> batch, const Parameters<float>& p,
                      const EncoderConfig& cfg, std::size_t threads = 1);

/// Copies windows into a batch x length input matrix, validating shape and finiteness.
Matrix<float> stack_inputs(std::span<const Window> batch, const EncoderConfig& cfg);

}  // namespace unifault
