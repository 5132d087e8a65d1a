#include <doctest.h>

#include <cmath>
#include <numeric>

#include "unifault/contrastive.hpp"
#include "unifault/errors.hpp"
#include "unifault/rng.hpp"
#include "oracles.hpp"

using namespace unifault;
using Md = Matrix<double>;

TEST_CASE("cosine similarity examples") {
  const std::vector<double> v{3.0, -4.0, 0.5};
  CHECK(cosine_similarity<double>(v, v) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> e1{1, 0}, e2{0, 1}, d{1, 1};
  CHECK(cosine_similarity<double>(e1, e2) == 0.0);
  CHECK(cosine_similarity<double>(e1, d) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  const std::vector<double> zero{0, 0};
  CHECK(cosine_similarity<double>(zero, e1) == 0.0);
}

TEST_CASE("identical single views give ln 2 at any temperature") {
  Md z(1, 3);
  z << 0.3, -1.2, 2.0;
  for (double tau : {0.05, 0.2, 1.0, 7.0}) {
    ContrastiveConfig cfg{tau, true};
    CHECK(contrastive_loss<double>(z, z, cfg).loss == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("two orthogonal samples match the double-loop oracle") {
  Md z(2, 2);
  z << 1, 0, 0, 1;
  for (bool self : {true, false}) {
    ContrastiveConfig cfg{0.5, self};
    const double got = contrastive_loss<double>(z, z, cfg).loss;
    const double want = oracle::contrastive_loss(z, z, 0.5, self);
    CHECK(std::abs(got - want) <= 1e-10 * std::abs(want));
  }
  // Hand value: A = diag(e^2) + off e^0, B identical; with the self term each
  // row has denominator 2e^2 + 2.
  ContrastiveConfig cfg{0.5, true};
  const double hand = -std::log(std::exp(2.0) / (2 * std::exp(2.0) + 2));
  CHECK(contrastive_loss<double>(z, z, cfg).loss == doctest::Approx(hand).epsilon(1e-14));
}

TEST_CASE("random batches match the oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(8));
    const auto d = static_cast<Eigen::Index>(1 + rng.index(16));
    Md z1(n, d), z2(n, d);
    for (Eigen::Index i = 0; i < z1.size(); ++i) {
      z1.data()[i] = rng.normal();
      z2.data()[i] = rng.normal();
    }
    const double tau = std::array{0.1, 0.2, 0.5, 1.0}[rng.index(4)];
    const bool self = rng.index(2) == 1;
    if (n == 1 && !self) continue;
    const double got = contrastive_loss<double>(z1, z2, ContrastiveConfig{tau, self}).loss;
    const double want = oracle::contrastive_loss(z1, z2, tau, self);
    CHECK(std::abs(got - want) <= 1e-10 * std::abs(want));
  }
}

TEST_CASE("gradients match central differences") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(4));
    const auto d = static_cast<Eigen::Index>(2 + rng.index(7));
    Md z1(n, d), z2(n, d);
    for (Eigen::Index i = 0; i < z1.size(); ++i) {
      z1.data()[i] = rng.normal();
      z2.data()[i] = rng.normal();
    }
    const ContrastiveConfig cfg{std::array{0.1, 0.2, 0.5, 1.0}[rng.index(4)], rng.index(2) == 1};
    const auto res = contrastive_loss<double>(z1, z2, cfg);
    const auto f = [&](const Md& a, const Md& b) { return contrastive_loss<double>(a, b, cfg).loss; };
    CHECK(oracle::max_rel_error(res.grad_z1, oracle::numeric_grad(z1, [&](const Md& a) { return f(a, z2); })) < 1e-6);
    CHECK(oracle::max_rel_error(res.grad_z2, oracle::numeric_grad(z2, [&](const Md& b) { return f(z1, b); })) < 1e-6);
  }
}

TEST_CASE("loss is invariant under a shared permutation and positive rescaling") {
  Rng rng(3);
  Md z1(6, 5), z2(6, 5);
  for (Eigen::Index i = 0; i < z1.size(); ++i) {
    z1.data()[i] = rng.normal();
    z2.data()[i] = rng.normal();
  }
  const ContrastiveConfig cfg{0.2, true};
  const double base = contrastive_loss<double>(z1, z2, cfg).loss;

  std::vector<std::size_t> perm(6);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(perm));
  Md p1(6, 5), p2(6, 5);
  for (Eigen::Index i = 0; i < 6; ++i) {
    p1.row(i) = z1.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
    p2.row(i) = z2.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
  }
  CHECK(contrastive_loss<double>(p1, p2, cfg).loss == doctest::Approx(base).epsilon(1e-13));

  for (Eigen::Index row = 0; row < 6; ++row) {
    Md s1 = z1, s2 = z2;
    s1.row(row) *= 3.7;
    s2.row((row + 1) % 6) *= 0.01;
    CHECK(contrastive_loss<double>(s1, s2, cfg).loss == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("sharper temperature never raises the loss when positives dominate") {
  // Second view parallel to the first: A_ii = e^{1/tau} is the row maximum.
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Md z1(5, 4);
    for (Eigen::Index i = 0; i < z1.size(); ++i) z1.data()[i] = rng.normal();
    Md z2 = z1 * 2.5;
    for (bool self : {true, false}) {
      double prev = contrastive_loss<double>(z1, z2, ContrastiveConfig{2.0, self}).loss;
      for (double tau = 1.8; tau > 0.05; tau *= 0.85) {
        const double cur = contrastive_loss<double>(z1, z2, ContrastiveConfig{tau, self}).loss;
        CHECK(cur <= prev + 1e-12);
        prev = cur;
      }
    }
  }
}

TEST_CASE("errors") {
  Md a(2, 3), b(3, 3);
  a.setOnes();
  b.setOnes();
  CHECK_THROWS_AS(contrastive_loss<double>(a, b, ContrastiveConfig{}), ShapeError);
  Md c = a;
  c(0, 1) = std::nan("");
  CHECK_THROWS_AS(contrastive_loss<double>(c, a, ContrastiveConfig{}), NumericInputError);
  CHECK_THROWS_AS(contrastive_loss<double>(a, a, ContrastiveConfig{0.0, true}), ConfigError);
}
