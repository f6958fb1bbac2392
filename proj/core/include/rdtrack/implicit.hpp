#pragma once

#include <Eigen/Dense>
#include <set>
#include <stdexcept>
#include <vector>

#include "rdtrack/tensors.hpp"

namespace rdtrack {

/// Raised when D_x F at the point is numerically singular (reciprocal
/// condition estimate below 1e-12).  Solutions of the expansion equations
/// are then determined only up to ker D_x F; the kernel dimension is
/// reported so the caller can decide how to proceed.
class SingularJacobianError : public std::runtime_error {
 public:
  SingularJacobianError(double rcond, int kernel_dimension)
      : std::runtime_error("singular Jacobian in implicit-derivative solve"),
        rcond_(rcond),
        kernel_dimension_(kernel_dimension) {}
  double rcond() const { return rcond_; }
  int kernel_dimension() const { return kernel_dimension_; }

 private:
  double rcond_;
  int kernel_dimension_;
};

struct ImplicitDiagnostics {
  double rcond = 0.0;                        // of D_x F's LU factorization
  std::vector<double> solve_residuals;       // per order, L-inf
  std::vector<long long> summand_counts;     // per order, RHS terms assembled
  std::set<std::pair<int, int>> rhs_tensor_queries;  // (b, m) pairs used on the RHS
  double tensor_seconds = 0.0;
  double solve_seconds = 0.0;
};

/// Implicit derivatives d^k x/dβ^k, k = 1..L, at the provider's point.
struct ImplicitDerivSet {
  Eigen::VectorXd state;
  double beta = 0.0;
  std::vector<Eigen::VectorXd> derivs;  // derivs[k-1] holds order k
  ImplicitDiagnostics diagnostics;

  int max_order() const { return static_cast<int>(derivs.size()); }
  const Eigen::VectorXd& order(int k) const { return derivs.at(static_cast<std::size_t>(k) - 1); }
};

/// Bottom-up evaluation of the partition formula: for each order l the
/// right-hand side sums -coef * D^m_{β^b,x^{m-b}}F[...] over the non-trivial
/// expansion terms, then one reused LU factorization of D_x F solves for
/// d^l x/dβ^l.  Tensors are memoized by the provider, lower-order
/// derivatives by this routine.
ImplicitDerivSet implicit_derivatives(TensorProvider& provider, int L);

/// Taylor polynomial around the derivset's point: coefficient k is
/// derivs[k]/k!, evaluated by Horner so that eval(0) returns the base
/// exactly.
struct TaylorPolynomial {
  double beta0 = 0.0;
  std::vector<Eigen::VectorXd> coeffs;  // [0] = base value

  Eigen::VectorXd eval(double dbeta) const;
  int order() const { return static_cast<int>(coeffs.size()) - 1; }
};

TaylorPolynomial taylor_polynomial(const ImplicitDerivSet& derivs, const Eigen::VectorXd& base,
                                   int L);

/// Jacobian D_x(d^l x/dβ^l) of the order-l implicit derivative in the state,
/// for Lipschitz estimation; needs provider.max_order() >= l+1.
Eigen::MatrixXd derivative_jacobian(TensorProvider& provider, const ImplicitDerivSet& derivs,
                                    int l);

/// All of D_x(d^k x/dβ^k) for k = 1..L.
std::vector<Eigen::MatrixXd> derivative_jacobians(TensorProvider& provider,
                                                  const ImplicitDerivSet& derivs, int L);

/// || sum_k (Δβ^{k-1}/k!) D_x(d^k x/dβ^k) ||_inf — the local Lipschitz
/// estimate of the degree-L Taylor increment.
double lipschitz_estimate(TensorProvider& provider, const ImplicitDerivSet& derivs, int L,
                          double dbeta);

}  // namespace rdtrack
