#include "rdtrack/ba.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rdtrack {

Encoder encoder_from_marginal(const RdProblem& problem, const Marginal& r, double beta) {
  const int n = problem.source_size();
  const int m = problem.repro_size();
  if (r.size() != m) throw std::invalid_argument("encoder_from_marginal: marginal size mismatch");
  if (!(beta >= 0.0)) throw std::invalid_argument("encoder_from_marginal: beta must be >= 0");
  if ((r.weights.array() > 0.0).count() == 0)
    throw std::domain_error("encoder_from_marginal: all-zero marginal");

  Encoder q;
  q.channel.resize(m, n);
  for (int x = 0; x < n; ++x) {
    double dmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j)
      if (r.weights[j] > 0.0) dmin = std::min(dmin, problem.distortion(x, j));
    double z = 0.0;
    for (int j = 0; j < m; ++j) {
      double w = r.weights[j] > 0.0
                     ? r.weights[j] * std::exp(-beta * (problem.distortion(x, j) - dmin))
                     : 0.0;
      q.channel(j, x) = w;
      z += w;
    }
    q.channel.col(x) /= z;
  }
  return q;
}

Marginal marginal_from_encoder(const RdProblem& problem, const Encoder& q) {
  return {q.channel * problem.source, true};
}

Marginal ba_step(const RdProblem& problem, const Marginal& r, double beta) {
  return marginal_from_encoder(problem, encoder_from_marginal(problem, r, beta));
}

FixedPointResult ba_fixed_point(const RdProblem& problem, const Marginal& r0, double beta,
                                const BaOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("ba_fixed_point: tol must be > 0");
  FixedPointResult res;
  Marginal r = r0;
  res.residual = std::numeric_limits<double>::infinity();
  while (res.iterations < options.max_iter) {
    Marginal next = ba_step(problem, r, beta);
    ++res.iterations;
    res.residual = (next.weights - r.weights).cwiseAbs().maxCoeff();
    r = std::move(next);
    if (res.residual <= options.tol) {
      res.converged = true;
      break;
    }
  }
  res.marginal = r;
  res.encoder = encoder_from_marginal(problem, r, beta);
  return res;
}

RdPoint rd_functionals(const RdProblem& problem, const Encoder& q) {
  const int n = problem.source_size();
  const int m = q.repro_size();
  RdPoint out;
  Eigen::VectorXd s = q.channel * problem.source;
  for (int x = 0; x < n; ++x) {
    double px = problem.source[x];
    for (int j = 0; j < m; ++j) {
      double qq = q.channel(j, x);
      out.distortion += px * qq * problem.distortion(x, j);
      if (qq > 0.0 && px > 0.0) out.rate_nats += px * qq * std::log(qq / s[j]);
    }
  }
  out.rate_nats = std::max(out.rate_nats, 0.0);
  return out;
}

double lagrangian(const RdProblem& problem, const Encoder& q, double beta) {
  RdPoint f = rd_functionals(problem, q);
  return f.rate_nats + beta * f.distortion;
}

Eigen::MatrixXd jacobian_marginal(const RdProblem& problem, const Marginal& r, double beta) {
  const int m = problem.repro_size();
  if ((r.weights.array() <= 0.0).any())
    throw std::domain_error("jacobian_marginal: marginal must have full positive support; reduce first");
  Encoder q = encoder_from_marginal(problem, r, beta);
  Eigen::VectorXd ba = q.channel * problem.source;
  Eigen::MatrixXd jac(m, m);
  for (int j = 0; j < m; ++j) {
    // column j: sum_x p(x) q(j|x) q(i|x) / r(j)
    Eigen::VectorXd wx = problem.source.cwiseProduct(q.channel.row(j).transpose()) / r.weights[j];
    jac.col(j) = q.channel * wx;
    jac(j, j) += (r.weights[j] - ba[j]) / r.weights[j];
  }
  return jac;
}

Eigen::MatrixXd jacobian_encoder(const RdProblem& problem, const Encoder& q, double beta) {
  const int n = problem.source_size();
  const int m = q.repro_size();
  Eigen::VectorXd s = q.channel * problem.source;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(m * n, m * n);
  for (int x = 0; x < n; ++x) {
    // e^{-β d(x,·)} / Z_s(x) and the refreshed channel BA[q](·|x), with the
    // smallest distortion over supp(s) factored out against underflow.
    double dmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j)
      if (s[j] > 0.0) dmin = std::min(dmin, problem.distortion(x, j));
    Eigen::VectorXd expd(m);
    for (int j = 0; j < m; ++j) expd[j] = std::exp(-beta * (problem.distortion(x, j) - dmin));
    double z = s.dot(expd);
    Eigen::VectorXd banew = s.cwiseProduct(expd) / z;
    for (int xh = 0; xh < m; ++xh)
      for (int xh2 = 0; xh2 < m; ++xh2) {
        double f = expd[xh2] / z * ((xh == xh2 ? 1.0 : 0.0) - banew[xh]);
        for (int x2 = 0; x2 < n; ++x2) jac(xh * n + x, xh2 * n + x2) -= f * problem.source[x2];
      }
  }
  return jac;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
  return out;
}

double min_abs_eigenvalue(const Eigen::MatrixXd& m) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ev : eigenvalues(m)) best = std::min(best, std::abs(ev));
  return best;
}

double min_singular_value(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().minCoeff();
}

}  // namespace rdtrack
