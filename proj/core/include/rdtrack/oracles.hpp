#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rdtrack/problem.hpp"

namespace rdtrack {

/// Analytic solution of a Bernoulli(p) source under Hamming distortion,
/// p < 1/2.  Letter 0 is the symbol of probability p, so weights[0] follows
/// the closed form r0(β) = (1 - p(1+e^β))/(1 - e^β) above the critical
/// point β_c = ln((1-p)/p) and is 0 below it.
struct BinaryHammingOracle {
  double p;

  explicit BinaryHammingOracle(double p_symbol);

  double beta_c() const;
  Marginal marginal(double beta) const;
  /// d^k r/dβ^k for k = 1..L, from the closed form via the polynomial
  /// recurrence in g = 1/(e^β - 1) (no finite differences).  beta must be
  /// strictly above beta_c.
  std::vector<Eigen::VectorXd> derivatives(double beta, int L) const;
  /// R(D) = H(p) - H(D) in nats for 0 <= D <= min(p, 1-p), else 0.
  double rate(double distortion) const;
};

double binary_entropy_nats(double t);

/// y = a x + β intersected with y = b x² + c x + d, b != 0.
struct LineParabolaSystem {
  double a = 0.0, b = 1.0, c = 0.0, d = 0.0;

  enum class Branch { upper, lower };  // sign of the square root in x(β)

  struct Point {
    double x, y;
  };

  /// Discriminant ((a-c)/2b)² + (β-d)/b of the exact solution.
  double discriminant(double beta) const;
  /// β at which the two intersection points merge (discriminant zero).
  double beta_critical() const;
  /// Exact intersection point; throws std::domain_error when no real
  /// solution exists (past the bifurcation).
  Point exact(double beta, Branch branch) const;
  /// d^k x/dβ^k and d^k y/dβ^k, k = 1..L, by differentiating the closed
  /// form x = A ± sqrt(disc(β)).
  std::vector<Eigen::Vector2d> derivatives(double beta, Branch branch, int L) const;
  /// Residual of F at a point, for sanity checks.
  Eigen::Vector2d residual(double beta, Point pt) const;
};

}  // namespace rdtrack
