#include "rdtrack/implicit.hpp"

#include <chrono>
#include <cmath>

#include "rdtrack/combinatorics.hpp"

namespace rdtrack {

namespace {

constexpr double kSingularRcond = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::MatrixXd jacobian_matrix(TensorProvider& provider) {
  const DerivativeTensor& jt = provider.tensor(0, 1);
  const int t = provider.dimension();
  Eigen::MatrixXd j(t, t);
  int idx[2];
  for (int i = 0; i < t; ++i)
    for (int k = 0; k < t; ++k) {
      idx[0] = i;
      idx[1] = k;
      j(i, k) = jt.entry({idx, 2});
    }
  return j;
}

int kernel_dimension_of(const Eigen::MatrixXd& j) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
  lu.setThreshold(1e-10);
  return static_cast<int>(j.cols() - lu.rank());
}

// Argument list for one expansion term: d^{p_i}x repeated per multiplicity,
// with b copies of the part-1 argument replaced by β-derivatives.  `parts`,
// when given, receives the part order of each argument entry.
std::vector<std::pair<const Eigen::VectorXd*, int>> term_arguments(
    const IntPartition& partition, int b, const std::vector<Eigen::VectorXd>& derivs,
    std::vector<int>* parts = nullptr) {
  std::vector<std::pair<const Eigen::VectorXd*, int>> args;
  if (parts) parts->clear();
  for (std::size_t i = 0; i < partition.parts.size(); ++i) {
    int count = partition.mults[i];
    if (i == 0 && partition.parts[0] == 1) count -= b;
    if (count > 0) {
      args.emplace_back(&derivs[static_cast<std::size_t>(partition.parts[i]) - 1], count);
      if (parts) parts->push_back(partition.parts[i]);
    }
  }
  return args;
}

}  // namespace

ImplicitDerivSet implicit_derivatives(TensorProvider& provider, int L) {
  if (L < 1) throw std::invalid_argument("implicit_derivatives: L must be >= 1");
  if (L > provider.max_order())
    throw std::invalid_argument("implicit_derivatives: L exceeds the provider's max order");
  const int t = provider.dimension();

  ImplicitDerivSet out;
  out.state = provider.state();
  out.beta = provider.beta();

  auto t0 = Clock::now();
  Eigen::MatrixXd jac = jacobian_matrix(provider);
  out.diagnostics.tensor_seconds += seconds_since(t0);

  t0 = Clock::now();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
  double rcond = lu.rcond();
  out.diagnostics.rcond = rcond;
  if (!(rcond > kSingularRcond)) throw SingularJacobianError(rcond, kernel_dimension_of(jac));
  out.diagnostics.solve_seconds += seconds_since(t0);

  for (int l = 1; l <= L; ++l) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(t);
    long long count = 0;
    for (const IntPartition& partition : partitions(l)) {
      const int m = partition.total_multiplicity();
      const int bmax = partition.multiplicity_of_one();
      for (int b = 0; b <= bmax; ++b) {
        if (m == 1 && b == 0) continue;  // D_x F[d^l x/dβ^l], the unknown
        double coef = taylor_coefficient(l, b, partition);
        auto args = term_arguments(partition, b, out.derivs);
        auto tt = Clock::now();
        const DerivativeTensor& tensor = provider.tensor(b, m - b);
        out.diagnostics.tensor_seconds += seconds_since(tt);
        out.diagnostics.rhs_tensor_queries.insert({b, m - b});
        rhs -= coef * tensor.apply(args);
        ++count;
      }
    }
    t0 = Clock::now();
    Eigen::VectorXd x = lu.solve(rhs);
    out.diagnostics.solve_seconds += seconds_since(t0);
    out.diagnostics.solve_residuals.push_back((jac * x - rhs).cwiseAbs().maxCoeff());
    out.diagnostics.summand_counts.push_back(count);
    out.derivs.push_back(std::move(x));
  }
  return out;
}

Eigen::VectorXd TaylorPolynomial::eval(double dbeta) const {
  Eigen::VectorXd v = coeffs.back();
  for (int k = static_cast<int>(coeffs.size()) - 2; k >= 0; --k)
    v = v * dbeta + coeffs[static_cast<std::size_t>(k)];
  return v;
}

TaylorPolynomial taylor_polynomial(const ImplicitDerivSet& derivs, const Eigen::VectorXd& base,
                                   int L) {
  if (L > derivs.max_order())
    throw std::invalid_argument("taylor_polynomial: order exceeds available derivatives");
  TaylorPolynomial p;
  p.beta0 = derivs.beta;
  p.coeffs.reserve(static_cast<std::size_t>(L) + 1);
  p.coeffs.push_back(base);
  for (int k = 1; k <= L; ++k) p.coeffs.push_back(derivs.order(k) / factorial(k));
  return p;
}

std::vector<Eigen::MatrixXd> derivative_jacobians(TensorProvider& provider,
                                                  const ImplicitDerivSet& derivs, int L) {
  if (L > derivs.max_order())
    throw std::invalid_argument("derivative_jacobians: order exceeds available derivatives");
  if (L + 1 > provider.max_order())
    throw std::invalid_argument("derivative_jacobians: provider max_order must be >= L+1");

  Eigen::MatrixXd jac = jacobian_matrix(provider);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
  if (!(lu.rcond() > kSingularRcond))
    throw SingularJacobianError(lu.rcond(), kernel_dimension_of(jac));

  std::vector<Eigen::MatrixXd> out;  // out[l-1] = D_x(d^l x/dβ^l)
  for (int l = 1; l <= L; ++l) {
    // D²_{x,x}F applied to the order-l derivative, one axis left free.
    std::pair<const Eigen::VectorXd*, int> top{&derivs.order(l), 1};
    Eigen::MatrixXd rhs = provider.tensor(0, 2).apply_leaving_one({&top, 1});
    for (const IntPartition& partition : partitions(l)) {
      const int m = partition.total_multiplicity();
      const int bmax = partition.multiplicity_of_one();
      for (int b = 0; b <= bmax; ++b) {
        if (m == 1 && b == 0) continue;  // same exclusion as the derivative RHS
        double coef = taylor_coefficient(l, b, partition);
        std::vector<int> parts;
        auto args = term_arguments(partition, b, derivs.derivs, &parts);
        // one extra state axis, same arguments
        rhs += coef * provider.tensor(b, m - b + 1).apply_leaving_one(args);
        // chain terms: one argument replaced by its Jacobian
        for (std::size_t i = 0; i < args.size(); ++i) {
          auto reduced = args;
          if (--reduced[i].second == 0) reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(i));
          double mult = static_cast<double>(args[i].second);
          Eigen::MatrixXd partial = provider.tensor(b, m - b).apply_leaving_one(reduced);
          rhs += coef * mult * partial * out[static_cast<std::size_t>(parts[i]) - 1];
        }
      }
    }
    out.push_back(-lu.solve(rhs));
  }
  return out;
}

Eigen::MatrixXd derivative_jacobian(TensorProvider& provider, const ImplicitDerivSet& derivs,
                                    int l) {
  return derivative_jacobians(provider, derivs, l).back();
}

double lipschitz_estimate(TensorProvider& provider, const ImplicitDerivSet& derivs, int L,
                          double dbeta) {
  auto jacs = derivative_jacobians(provider, derivs, L);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(provider.dimension(), provider.dimension());
  double scale = 1.0;  // Δβ^{k-1}/k!
  for (int k = 1; k <= L; ++k) {
    scale = (k == 1) ? 1.0 : scale * dbeta / k;
    sum += scale * jacs[static_cast<std::size_t>(k) - 1];
  }
  return sum.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace rdtrack
