#include "rdtrack/oracles.hpp"

#include <cmath>

#include "doctest.h"
#include "rdtrack/ba.hpp"
#include "rdtrack/builtins.hpp"

using namespace rdtrack;

TEST_SUITE_BEGIN("oracles");

TEST_CASE("binary Hamming marginal") {
  BinaryHammingOracle oracle(0.3);
  CHECK(oracle.beta_c() == doctest::Approx(std::log(7.0 / 3.0)).epsilon(1e-15));
  CHECK(oracle.marginal(oracle.beta_c()).weights[0] == 0.0);
  CHECK(oracle.marginal(std::log(9.0)).weights[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(oracle.marginal(60.0).weights[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(oracle.marginal(0.2).weights == Eigen::Vector2d(0.0, 1.0));  // below beta_c
  for (double beta : {0.9, 2.0, 10.0}) {
    auto w = oracle.marginal(beta).weights;
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS(BinaryHammingOracle(0.6));
  CHECK_THROWS(oracle.marginal(0.0));
}

TEST_CASE("binary Hamming derivatives") {
  BinaryHammingOracle oracle(0.3);
  double beta = std::log(9.0);
  auto ds = oracle.derivatives(beta, 6);
  // k = 1 cross-checked against a central finite difference of the closed form
  double h = 1e-6;
  double fd = (oracle.marginal(beta + h).weights[0] - oracle.marginal(beta - h).weights[0]) / (2 * h);
  CHECK(std::abs(ds[0][0] - fd) <= 1e-6);
  for (int k = 1; k <= 6; ++k) CHECK(ds[k - 1].sum() == 0.0);  // normalization in beta
  CHECK_THROWS(oracle.derivatives(oracle.beta_c(), 2));
}

TEST_CASE("binary Hamming rate curve") {
  BinaryHammingOracle oracle(0.3);
  CHECK(oracle.rate(0.3) == 0.0);
  CHECK(oracle.rate(0.0) == doctest::Approx(binary_entropy_nats(0.3)).epsilon(1e-14));
  CHECK(oracle.rate(0.1) == doctest::Approx(0.2857813287).epsilon(1e-8));
  CHECK(oracle.rate(0.9) == 0.0);
}

TEST_CASE("the oracle marginal is a BA fixed point across the whole range") {
  RdProblem p = binary_hamming_problem(0.3);
  BinaryHammingOracle oracle(0.3);
  for (double beta = oracle.beta_c() + 0.01; beta <= 32.0; beta *= 1.35) {
    Marginal r = oracle.marginal(beta);
    double residual = (ba_step(p, r, beta).weights - r.weights).cwiseAbs().maxCoeff();
    CHECK(residual <= 1e-10);
  }
}

TEST_CASE("line-parabola exact solution") {
  LineParabolaSystem fig1{1.0, 1.0, 0.0, 3.0};  // y = x² + 3 against y = x + β
  CHECK(fig1.beta_critical() == doctest::Approx(2.75).epsilon(1e-15));
  auto up = fig1.exact(5.0, LineParabolaSystem::Branch::upper);
  auto lo = fig1.exact(5.0, LineParabolaSystem::Branch::lower);
  CHECK(up.x == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lo.x == doctest::Approx(-1.0).epsilon(1e-12));
  for (auto pt : {up, lo}) CHECK(fig1.residual(5.0, pt).cwiseAbs().maxCoeff() <= 1e-12);
  // at the tangency both branches coincide
  auto tu = fig1.exact(2.75, LineParabolaSystem::Branch::upper);
  auto tl = fig1.exact(2.75, LineParabolaSystem::Branch::lower);
  CHECK(tu.x == tl.x);
  CHECK_THROWS(fig1.exact(2.0, LineParabolaSystem::Branch::upper));
}

TEST_SUITE_END();
