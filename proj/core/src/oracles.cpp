#include "rdtrack/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace rdtrack {

BinaryHammingOracle::BinaryHammingOracle(double p_symbol) : p(p_symbol) {
  if (!(p > 0.0 && p < 0.5))
    throw std::invalid_argument("BinaryHammingOracle: p must be in (0, 1/2)");
}

double BinaryHammingOracle::beta_c() const { return std::log((1.0 - p) / p); }

Marginal BinaryHammingOracle::marginal(double beta) const {
  if (!(beta > 0.0)) throw std::invalid_argument("BinaryHammingOracle: beta must be > 0");
  Eigen::VectorXd w(2);
  if (beta <= beta_c()) {
    w << 0.0, 1.0;
  } else {
    // (1 - p(1+e^β))/(1 - e^β), rewritten as p + (2p-1)/(e^β - 1)
    double r0 = p + (2.0 * p - 1.0) / std::expm1(beta);
    w << r0, 1.0 - r0;
  }
  return {w, true};
}

std::vector<Eigen::VectorXd> BinaryHammingOracle::derivatives(double beta, int L) const {
  if (!(beta > beta_c()))
    throw std::domain_error("BinaryHammingOracle::derivatives: beta must exceed beta_c");
  // r0 = p + (2p-1) g with g = 1/(e^β - 1); dg/dβ = -(g + g²), so each
  // derivative is an integer-coefficient polynomial in g.
  double g = 1.0 / std::expm1(beta);
  std::vector<double> poly{0.0, 1.0};  // coefficients in g, starting from r0' / (2p-1) pre-chain
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(L));
  for (int k = 1; k <= L; ++k) {
    // poly <- d(poly)/dg * (-(g + g²))
    std::vector<double> dp(poly.size() >= 1 ? poly.size() - 1 : 0, 0.0);
    for (std::size_t i = 1; i < poly.size(); ++i) dp[i - 1] = poly[i] * static_cast<double>(i);
    std::vector<double> next(dp.size() + 2, 0.0);
    for (std::size_t i = 0; i < dp.size(); ++i) {
      next[i + 1] -= dp[i];
      next[i + 2] -= dp[i];
    }
    poly = std::move(next);
    double val = 0.0;
    for (std::size_t i = poly.size(); i-- > 0;) val = val * g + poly[i];
    val *= 2.0 * p - 1.0;
    Eigen::VectorXd v(2);
    v << val, -val;
    out.push_back(std::move(v));
  }
  return out;
}

double binary_entropy_nats(double t) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("binary_entropy_nats: argument outside [0,1]");
  double h = 0.0;
  if (t > 0.0) h -= t * std::log(t);
  if (t < 1.0) h -= (1.0 - t) * std::log(1.0 - t);
  return h;
}

double BinaryHammingOracle::rate(double distortion) const {
  if (distortion < 0.0) throw std::invalid_argument("BinaryHammingOracle::rate: D must be >= 0");
  if (distortion >= std::min(p, 1.0 - p)) return 0.0;
  return binary_entropy_nats(p) - binary_entropy_nats(distortion);
}

double LineParabolaSystem::discriminant(double beta) const {
  double A = (a - c) / (2.0 * b);
  return A * A + (beta - d) / b;
}

double LineParabolaSystem::beta_critical() const {
  double A = (a - c) / (2.0 * b);
  return d - b * A * A;
}

LineParabolaSystem::Point LineParabolaSystem::exact(double beta, Branch branch) const {
  double disc = discriminant(beta);
  if (disc < 0.0)
    throw std::domain_error("LineParabolaSystem::exact: no real intersection past the bifurcation");
  double A = (a - c) / (2.0 * b);
  double x = A + (branch == Branch::upper ? 1.0 : -1.0) * std::sqrt(disc);
  return {x, beta + a * x};
}

std::vector<Eigen::Vector2d> LineParabolaSystem::derivatives(double beta, Branch branch,
                                                             int L) const {
  double disc = discriminant(beta);
  if (!(disc > 0.0))
    throw std::domain_error("LineParabolaSystem::derivatives: need a strictly positive discriminant");
  double sign = branch == Branch::upper ? 1.0 : -1.0;
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(L));
  // d^k/dβ^k sqrt(disc) = (1/2)(1/2 - 1)...(1/2 - k + 1) disc^{1/2-k} / b^k
  double coeff = 1.0;
  for (int k = 1; k <= L; ++k) {
    coeff *= (0.5 - (k - 1)) / b;
    double dx = sign * coeff * std::pow(disc, 0.5 - k);
    Eigen::Vector2d v(dx, a * dx);
    if (k == 1) v[1] += 1.0;  // y = β + a x
    out.push_back(v);
  }
  return out;
}

Eigen::Vector2d LineParabolaSystem::residual(double beta, Point pt) const {
  return {-pt.y + b * pt.x * pt.x + c * pt.x + d, -pt.y + a * pt.x + beta};
}

}  // namespace rdtrack
