// Independent reference implementations used by the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "unifault/contrastive.hpp"
#include "unifault/encoder.hpp"
#include "unifault/rng.hpp"

namespace oracle {

using Md = unifault::Matrix<double>;

inline double cos_sim(const Md& a, Eigen::Index i, const Md& b, Eigen::Index k) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    dot += a(i, j) * b(k, j);
    na += a(i, j) * a(i, j);
    nb += b(k, j) * b(k, j);
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

/// Direct evaluation of -(1/N) sum_i log(A_ii / sum_k (A_ik + B_ik)), each
/// term written as log1p(sum of the other terms / A_ii) so tiny losses keep
/// their relative precision.
inline double contrastive_loss(const Md& z1, const Md& z2, double tau, bool include_self) {
  const Eigen::Index n = z1.rows();
  double total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double positive = std::exp(cos_sim(z1, i, z2, i) / tau);
    double others = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != i) others += std::exp(cos_sim(z1, i, z2, k) / tau);
      if (k != i || include_self) others += std::exp(cos_sim(z1, i, z1, k) / tau);
    }
    total += std::log1p(others / positive);
  }
  return total / static_cast<double>(n);
}

/// Central differences of f at x, element by element.
inline Md numeric_grad(const Md& x, const std::function<double(const Md&)>& f, double h = 1e-5) {
  Md g(x.rows(), x.cols());
  Md probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = f(probe);
    probe.data()[i] = orig - h;
    const double down = f(probe);
    probe.data()[i] = orig;
    g.data()[i] = (up - down) / (2 * h);
  }
  return g;
}

/// Largest |a - n| / max(|a|, |n|, floor) over elements.
inline double max_rel_error(const Md& analytic, const Md& numeric, double floor = 1e-6) {
  double worst = 0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i], n = numeric.data()[i];
    worst = std::max(worst, std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor}));
  }
  return worst;
}

struct GradCheck {
  double worst = 0.0;
  std::string tensor;
};

/// Every encoder and projection parameter of a contrastive loss on two random
/// input batches, analytic gradient against central differences (h = 1e-5).
/// Parameters are pushed off their init so LayerNorm gains and biases take
/// generic values.
inline GradCheck encoder_grad_check(const unifault::EncoderConfig& cfg, Eigen::Index batch, std::uint64_t seed) {
  using namespace unifault;
  Rng rng(seed);
  Md x1(batch, static_cast<Eigen::Index>(cfg.input_length)), x2(batch, x1.cols());
  for (Eigen::Index i = 0; i < x1.size(); ++i) {
    x1.data()[i] = rng.uniform();
    x2.data()[i] = rng.uniform();
  }
  auto p = init_parameters<double>(cfg, seed);
  for (auto& t : p.tensors())
    for (auto& v : t.values()) v += rng.normal(0.0, 0.3);
  const ContrastiveConfig ccfg{0.5, true};

  auto loss_of = [&](const Parameters<double>& q) {
    const Md z1 = project(q, encoder_forward(q, cfg, x1));
    const Md z2 = project(q, encoder_forward(q, cfg, x2));
    return contrastive_loss<double>(z1, z2, ccfg).loss;
  };

  ForwardCache<double> c1, c2;
  const Md pooled1 = encoder_forward(p, cfg, x1, &c1);
  const Md pooled2 = encoder_forward(p, cfg, x2, &c2);
  const auto res = contrastive_loss<double>(project(p, pooled1), project(p, pooled2), ccfg);
  auto grads = Parameters<double>::zeros(cfg);
  for (auto& t : grads.tensors())
    for (auto& v : t.values()) v = 0.0;
  encoder_backward(p, cfg, c1, project_backward(p, pooled1, res.grad_z1, grads), grads);
  encoder_backward(p, cfg, c2, project_backward(p, pooled2, res.grad_z2, grads), grads);

  const auto prefs = p.tensors();
  const auto grefs = grads.tensors();
  GradCheck out;
  for (std::size_t t = 0; t < prefs.size(); ++t) {
    auto values = prefs[t].values();
    const auto g = grefs[t].values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double orig = values[i];
      const double h = 1e-5;
      values[i] = orig + h;
      const double up = loss_of(p);
      values[i] = orig - h;
      const double down = loss_of(p);
      values[i] = orig;
      const double num = (up - down) / (2 * h);
      const double err = std::abs(num - g[i]) / std::max({std::abs(num), std::abs(g[i]), 1e-6});
      if (err > out.worst) {
        out.worst = err;
        out.tensor = prefs[t].name;
      }
    }
  }
  return out;
}

}  // namespace oracle
