// SPDX-License-Identifier: Apache-2.0
#include "unifault/contrastive.hpp"

#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "unifault/errors.hpp"

namespace unifault {

void ContrastiveConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("contrastive.temperature must be > 0");
}

template <typename T>
T cosine_similarity(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw ShapeError("cosine_similarity: vectors differ in length");
  T dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == T(0) || nv == T(0)) {
    spdlog::warn("cosine similarity of a zero vector; treating as 0");
    return T(0);
  }
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

// Row-normalizes z; zero rows stay zero and get norm 0.
template <typename T>
void normalize_rows(const Matrix<T>& z, Matrix<T>& unit, ColVector<T>& norms) {
  norms = z.rowwise().norm();
  unit = z;
  bool warned = false;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (norms(i) > T(0)) {
      unit.row(i) /= norms(i);
    } else if (!warned) {
      spdlog::warn("zero embedding in contrastive batch; its similarities are treated as 0");
      warned = true;
    }
  }
}

// Gradient through u = z / |z| given dL/du.
template <typename T>
Matrix<T> unnormalize_grad(const Matrix<T>& unit, const ColVector<T>& norms, const Matrix<T>& grad_unit) {
  Matrix<T> g(unit.rows(), unit.cols());
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    if (norms(i) > T(0)) {
      const T radial = grad_unit.row(i).dot(unit.row(i));
      g.row(i) = (grad_unit.row(i) - radial * unit.row(i)) / norms(i);
    } else {
      g.row(i).setZero();
    }
  }
  return g;
}

}  // namespace

template <typename T>
ContrastiveResult<T> contrastive_loss(const Matrix<T>& z1, const Matrix<T>& z2, const ContrastiveConfig& cfg) {
  cfg.validate();
  if (z1.rows() != z2.rows() || z1.cols() != z2.cols())
    throw ShapeError("contrastive_loss: view batches differ in shape");
  if (z1.rows() < 1) throw ShapeError("contrastive_loss: empty batch");
  if (!z1.allFinite() || !z2.allFinite()) throw NumericInputError("contrastive_loss: non-finite embedding");
  const Eigen::Index n = z1.rows();

  Matrix<T> u1, u2;
  ColVector<T> n1, n2;
  normalize_rows(z1, u1, n1);
  normalize_rows(z2, u2, n2);

  const T inv_tau = T(1) / static_cast<T>(cfg.temperature);
  Matrix<T> la = (u1 * u2.transpose()) * inv_tau;
  Matrix<T> lb = (u1 * u1.transpose()) * inv_tau;

  Matrix<T> pa(n, n), pb(n, n);
  ColVector<T> rest_share(n);  // 1 - pa(i, i), kept apart to avoid cancellation
  T total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    T m = la.row(i).maxCoeff();
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != i || cfg.include_self_term) m = std::max(m, lb(i, k));
    T rest = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      pa(i, k) = std::exp(la(i, k) - m);
      pb(i, k) = (k != i || cfg.include_self_term) ? std::exp(lb(i, k) - m) : T(0);
      rest += (k != i ? pa(i, k) : T(0)) + pb(i, k);
    }
    const T denom = pa(i, i) + rest;
    // When the positive pair is the largest term the loss can be tiny; log1p keeps its relative precision.
    total += la(i, i) == m ? std::log1p(rest) : m + std::log(denom) - la(i, i);
    rest_share(i) = rest / denom;
    pa.row(i) /= denom;
    pb.row(i) /= denom;
  }

  ContrastiveResult<T> out;
  out.loss = total / static_cast<T>(n);

  // dL/dla = (pa - I) / n, dL/dlb = pb / n; the 1/tau factor folds in here.
  const T scale = inv_tau / static_cast<T>(n);
  Matrix<T> ga = pa;
  ga.diagonal() = -rest_share;
  ga *= scale;
  const Matrix<T> gb = pb * scale;

  const Matrix<T> du1 = ga * u2 + (gb + gb.transpose()) * u1;
  const Matrix<T> du2 = ga.transpose() * u1;
  out.grad_z1 = unnormalize_grad(u1, n1, du1);
  out.grad_z2 = unnormalize_grad(u2, n2, du2);
  return out;
}

template float cosine_similarity<float>(std::span<const float>, std::span<const float>);
template double cosine_similarity<double>(std::span<const double>, std::span<const double>);
template ContrastiveResult<float> contrastive_loss<float>(const Matrix<float>&, const Matrix<float>&,
                                                          const ContrastiveConfig&);
template ContrastiveResult<double> contrastive_loss<double>(const Matrix<double>&, const Matrix<double>&,
                                                            const ContrastiveConfig&);

}  // namespace unifault
