#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "rdtrack/problem.hpp"

namespace rdtrack {

struct BaOptions {
  double tol = 1e-8;  // L-inf stopping condition between iterates
  std::int64_t max_iter = 1'000'000;
};

struct FixedPointResult {
  Marginal marginal;
  Encoder encoder;  // consistent with `marginal` at return
  std::int64_t iterations = 0;
  double residual = 0.0;  // L-inf distance of the last step
  bool converged = false;
};

struct RdPoint {
  double distortion = 0.0;
  double rate_nats = 0.0;  // divide by ln 2 for bits
};

struct CurvePoint {
  double distortion = 0.0;
  double rate_nats = 0.0;
  double beta = 0.0;
};

/// q(x̂|x) = r(x̂) e^{-β d(x,x̂)} / Z(x,β).  The smallest supported
/// distortion is factored out of each column before exponentiating, so large
/// β values do not underflow the partition function.  Letters with
/// r(x̂) = 0 get q(x̂|x) = 0.  r need not be normalized.
Encoder encoder_from_marginal(const RdProblem& problem, const Marginal& r, double beta);

/// s(x̂) = sum_x p_X(x) q(x̂|x).
Marginal marginal_from_encoder(const RdProblem& problem, const Encoder& q);

/// One Blahut-Arimoto iteration in marginal coordinates.
Marginal ba_step(const RdProblem& problem, const Marginal& r, double beta);

/// Iterates ba_step from r0 until the L-inf step is <= tol or max_iter is
/// hit.  Support of the result is contained in the support of r0.
FixedPointResult ba_fixed_point(const RdProblem& problem, const Marginal& r0, double beta,
                                const BaOptions& options = {});

/// Expected distortion and mutual information (nats, 0 log 0 = 0).
RdPoint rd_functionals(const RdProblem& problem, const Encoder& q);

/// RD Lagrangian I + beta * D; non-increasing along BA iterates.
double lagrangian(const RdProblem& problem, const Encoder& q, double beta);

/// Jacobian of Id - BA_β in marginal coordinates at r (all entries > 0):
///   J(i,j) = sum_x p(x) q(j|x) q(i|x) / r(j) + δ_ij (r_j - BA[r]_j)/r_j.
/// The diagonal correction vanishes at fixed points.
Eigen::MatrixXd jacobian_marginal(const RdProblem& problem, const Marginal& r, double beta);

/// Jacobian of Id - BA_β in encoder coordinates, an MN x MN matrix with
/// rows/columns flattened x̂-major (index = x̂*N + x).  Valid at any
/// conditional distribution, including boundary points with zero marginals.
Eigen::MatrixXd jacobian_encoder(const RdProblem& problem, const Encoder& q, double beta);

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m);
double min_abs_eigenvalue(const Eigen::MatrixXd& m);
double min_singular_value(const Eigen::MatrixXd& m);

}  // namespace rdtrack
