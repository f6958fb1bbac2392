#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <vector>

#include "rdtrack/ba.hpp"
#include "rdtrack/problem.hpp"

namespace rdtrack::testsupport {

/// Nested central finite differences of F(r, β) = r - BA_β[r]: b nested
/// β-derivatives followed by one derivative per listed coordinate.  The
/// independent oracle for the closed-form tensors.
inline Eigen::VectorXd fd_tensor_entry(const RdProblem& problem, const Eigen::VectorXd& r,
                                       double beta, int b, std::vector<int> coords,
                                       double h = 1e-4) {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double, int, std::size_t)> rec =
      [&](const Eigen::VectorXd& rr, double bb, int brem, std::size_t ci) -> Eigen::VectorXd {
    if (brem > 0) {
      return (rec(rr, bb + h, brem - 1, ci) - rec(rr, bb - h, brem - 1, ci)) / (2.0 * h);
    }
    if (ci < coords.size()) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(rr.size());
      e[coords[ci]] = h;
      return (rec(rr + e, bb, 0, ci + 1) - rec(rr - e, bb, 0, ci + 1)) / (2.0 * h);
    }
    Marginal m{rr, false};
    return rr - ba_step(problem, m, bb).weights;
  };
  return rec(r, beta, b, 0);
}

/// Seeded random problem whose BA fixed point at `beta` stays interior:
/// a perturbed identity-like distortion keeps every letter useful.
inline RdProblem random_interior_problem(unsigned seed, int n, double noise = 0.3) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, noise);
  RdProblem p;
  p.source.resize(n);
  for (int i = 0; i < n; ++i) p.source[i] = 1.0 + 0.3 * static_cast<double>(i % 3);
  p.source /= p.source.sum();
  p.distortion.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.distortion(i, j) = (i == j ? 0.0 : 2.0) + u(rng);
  return p;
}

/// Brute-force partition enumeration (non-increasing part lists), kept
/// independent of the library's enumerator.
inline long long brute_force_partition_count(int n) {
  std::function<long long(int, int)> rec = [&](int remaining, int maxpart) -> long long {
    if (remaining == 0) return 1;
    long long total = 0;
    for (int v = std::min(remaining, maxpart); v >= 1; --v) total += rec(remaining - v, v);
    return total;
  };
  return rec(n, n);
}

}  // namespace rdtrack::testsupport
