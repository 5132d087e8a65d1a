// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "unifault/encoder.hpp"

namespace unifault {

struct ContrastiveConfig {
  double temperature = 0.2;
  /// Keep the k == i term of the same-view sum in the denominator.
  bool include_self_term = true;

  void validate() const;
};

/// u.v / (|u| |v|); 0 (with a warning) when either vector is zero.
template <typename T>
T cosine_similarity(std::span<const T> u, std::span<const T> v);

template <typename T>
struct ContrastiveResult {
  T loss{};
  Matrix<T> grad_z1;
  Matrix<T> grad_z2;
};

/// Rows of z1 and z2 are the two views of the same N samples.
///   loss = -(1/N) sum_i log( A_ii / sum_k (A_ik + B_ik) )
///   A_ik = exp(sim(z1_i, z2_k) / tau),  B_ik = exp(sim(z1_i, z1_k) / tau)
/// Evaluated with a per-row log-sum-exp; gradients are analytic.
template <typename T>
ContrastiveResult<T> contrastive_loss(const Matrix<T>& z1, const Matrix<T>& z2, const ContrastiveConfig& cfg);

}  // namespace unifault
