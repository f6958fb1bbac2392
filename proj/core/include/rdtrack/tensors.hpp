#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "rdtrack/problem.hpp"

namespace rdtrack {

/// Dense symmetric derivative tensor D^{b+m}_{β^b, x^m} F at a point: one
/// output axis followed by m interchangeable input axes, each of size dim.
/// Entries are fanned out from canonical multi-indices, so the symmetry in
/// the input axes is exact by construction.
class DerivativeTensor {
 public:
  DerivativeTensor(int b, int m, int dim, double beta_point);

  int beta_order() const { return b_; }
  int state_order() const { return m_; }
  int dim() const { return dim_; }
  double beta_point() const { return beta_point_; }

  double entry(std::span<const int> index) const;  // index.size() == m+1
  void set_entry(std::span<const int> index, double value);

  /// Contraction with the m input arguments, supplied as (vector, repeat)
  /// pairs; repeats must sum to m.  Returns the length-dim output vector.
  Eigen::VectorXd apply(std::span<const std::pair<const Eigen::VectorXd*, int>> args) const;

  /// Contraction with m-1 arguments, leaving one input axis free; returns
  /// the (output x free-input) matrix.  Well defined by symmetry.
  Eigen::MatrixXd apply_leaving_one(
      std::span<const std::pair<const Eigen::VectorXd*, int>> args) const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  int b_, m_, dim_;
  double beta_point_;
  std::vector<double> data_;  // dim^(m+1), row-major, last axis fastest
};

/// Derivative tensors of an operator F(x, β) on R^T, evaluated at one fixed
/// point of interest.  tensor(b, m) is memoized per provider; a provider is
/// meant to be queried from a single thread, distinct points may be
/// evaluated concurrently through distinct providers.
class TensorProvider {
 public:
  virtual ~TensorProvider() = default;
  virtual int dimension() const = 0;
  virtual double beta() const = 0;
  virtual const Eigen::VectorXd& state() const = 0;
  /// Largest supported total order b+m.
  virtual int max_order() const = 0;
  virtual const DerivativeTensor& tensor(int b, int m) = 0;
};

/// Per-point scratch of the RD tensor formulas: the encoder at the point,
/// the expectations ⟨d^k⟩_q(x), the evaluated P_k[q;d] matrices and the
/// G(k,a) grid.  Built once per grid point and discarded afterwards, so the
/// memory footprint does not scale with the grid size.
struct PointScratch {
  RdProblem problem;
  Eigen::VectorXd r;
  double beta = 0.0;
  int max_order = 0;
  Encoder q;
  std::vector<Eigen::VectorXd> dist_powers;      // ⟨d^k⟩(x), k = 0..max_order
  std::vector<Eigen::MatrixXd> P;                // P_k[q;d], k = 0..max_order
  std::vector<std::vector<Eigen::MatrixXd>> G;   // G[k][a], k <= max_order, a <= max_order+1
  std::vector<double> fact;                      // 0! .. (max_order+2)!

  static PointScratch build(const RdProblem& problem, const Marginal& r, double beta,
                            int max_order);
};

/// ⟨d^k⟩(x) = sum_x̂ q(x̂|x) d(x,x̂)^k for k = 0..k_max ([0] is all ones).
std::vector<Eigen::VectorXd> expected_distortion_powers(const RdProblem& problem,
                                                        const Encoder& q, int k_max);

/// P_k[q;d](x̂,x): the polynomial P_k evaluated at x0 = d(x,x̂) and
/// x_j = ⟨d^j⟩(x).
std::vector<Eigen::MatrixXd> eval_P_matrices(const RdProblem& problem, const Encoder& q,
                                             int k_max);

/// G(k,a) for 0 <= k <= L, 0 <= a <= L+1, in a single pass over the integer
/// partitions of each k: a partition t contributes its monomial to G(k,a)
/// for every a >= |t|.
std::vector<std::vector<Eigen::MatrixXd>> eval_G(const std::vector<Eigen::MatrixXd>& P, int L);

/// D^b_{β^b}(Id - BA_β)[r](x̂) = -sum_x p(x) q(x̂|x) P_b(x̂,x), b >= 1.
Eigen::VectorXd tensor_beta_only(const PointScratch& scratch, int b);

/// The α = (b, alpha_plus) mixed partial of (Id - BA_β)[r] over the output
/// coordinate, alpha_plus != 0.  Requires r > 0 everywhere.
Eigen::VectorXd partial_derivative(const PointScratch& scratch, int b,
                                   std::span<const int> alpha_plus);

/// Tensor provider for F = Id - BA_β of a (reduced) RD problem at a point
/// (r, beta) with r > 0 in every coordinate.
class RdTensorProvider : public TensorProvider {
 public:
  RdTensorProvider(const RdProblem& problem, const Marginal& r, double beta, int max_order);

  int dimension() const override { return static_cast<int>(scratch_.r.size()); }
  double beta() const override { return scratch_.beta; }
  const Eigen::VectorXd& state() const override { return scratch_.r; }
  int max_order() const override { return scratch_.max_order; }
  const DerivativeTensor& tensor(int b, int m) override;

  const PointScratch& scratch() const { return scratch_; }

 private:
  PointScratch scratch_;
  std::map<std::pair<int, int>, DerivativeTensor> cache_;
};

/// F(x,y;β) = (-y + b x² + c x + d, -y + a x + β): the intersection of the
/// line y = a x + β with a parabola.  Nonzero tensors are the Jacobian,
/// D_β F = (0,1) and D²_{xx}F_1 = 2b; everything else vanishes.
class LineParabolaProvider : public TensorProvider {
 public:
  LineParabolaProvider(double a, double b, double c, double d, double x0, double y0,
                       double beta0);

  int dimension() const override { return 2; }
  double beta() const override { return beta0_; }
  const Eigen::VectorXd& state() const override { return state_; }
  int max_order() const override { return 1 << 20; }
  const DerivativeTensor& tensor(int b, int m) override;

 private:
  double a_, b_, c_, d_, beta0_;
  Eigen::VectorXd state_;
  std::map<std::pair<int, int>, DerivativeTensor> cache_;
};

std::unique_ptr<TensorProvider> line_parabola_provider(double a, double b, double c, double d,
                                                       double x0, double y0, double beta0);

}  // namespace rdtrack
