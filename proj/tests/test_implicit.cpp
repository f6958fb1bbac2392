#include "rdtrack/implicit.hpp"

#include <cmath>

#include "doctest.h"
#include "rdtrack/ba.hpp"
#include "rdtrack/builtins.hpp"
#include "rdtrack/combinatorics.hpp"
#include "rdtrack/oracles.hpp"
#include "support/test_support.hpp"

using namespace rdtrack;

namespace {

/// F(x, β) = x - c: every implicit derivative vanishes.
class ConstantProvider : public TensorProvider {
 public:
  explicit ConstantProvider(int dim) : dim_(dim), state_(Eigen::VectorXd::Zero(dim)) {}
  int dimension() const override { return dim_; }
  double beta() const override { return 0.0; }
  const Eigen::VectorXd& state() const override { return state_; }
  int max_order() const override { return 1 << 20; }
  const DerivativeTensor& tensor(int b, int m) override {
    auto key = std::make_pair(b, m);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    DerivativeTensor t(b, m, dim_, 0.0);
    if (b == 0 && m == 1) {
      for (int i = 0; i < dim_; ++i) {
        int idx[2] = {i, i};
        t.set_entry(idx, 1.0);
      }
    }
    return cache_.emplace(key, std::move(t)).first->second;
  }

 private:
  int dim_;
  Eigen::VectorXd state_;
  std::map<std::pair<int, int>, DerivativeTensor> cache_;
};

struct LpCase {
  LineParabolaSystem sys;
  double beta;
  LineParabolaSystem::Point pt;
  double delta;  // 2 b x0 + c - a
};

LpCase lp_case(double a, double b, double c, double d, double beta,
               LineParabolaSystem::Branch branch = LineParabolaSystem::Branch::upper) {
  LpCase out{LineParabolaSystem{a, b, c, d}, beta, {}, 0.0};
  out.pt = out.sys.exact(beta, branch);
  out.delta = 2.0 * b * out.pt.x + c - a;
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("implicit");

TEST_CASE("line-parabola implicit derivatives match the closed forms") {
  for (auto [a, b, c, d, beta] : {std::tuple{1.0, 1.0, 0.0, 3.0, 5.0},
                                  std::tuple{1.0, 1.0, 0.0, 3.0, 8.0},
                                  std::tuple{-0.5, 2.0, 1.0, -1.0, 4.0},
                                  std::tuple{2.0, -1.5, 0.3, 2.0, -3.0},
                                  std::tuple{0.0, 0.7, -1.0, 0.0, 6.0}}) {
    LpCase cs = lp_case(a, b, c, d, beta);
    REQUIRE(std::abs(cs.delta) >= 0.5);
    LineParabolaProvider provider(a, b, c, d, cs.pt.x, cs.pt.y, beta);
    ImplicitDerivSet derivs = implicit_derivatives(provider, 4);
    const double D = cs.delta;
    Eigen::Vector2d expect1(1.0 / D, (a + D) / D);
    Eigen::Vector2d expect2 = -2.0 * b / std::pow(D, 3) * Eigen::Vector2d(1.0, a);
    Eigen::Vector2d expect3 = 12.0 * b * b / std::pow(D, 5) * Eigen::Vector2d(1.0, a);
    Eigen::Vector2d expect4 = -120.0 * std::pow(b, 3) / std::pow(D, 7) * Eigen::Vector2d(1.0, a);
    auto rel = [](const Eigen::VectorXd& got, const Eigen::Vector2d& want) {
      return (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
    };
    CHECK(rel(derivs.order(1), expect1) <= 1e-10);
    CHECK(rel(derivs.order(2), expect2) <= 1e-10);
    CHECK(rel(derivs.order(3), expect3) <= 1e-10);
    CHECK(rel(derivs.order(4), expect4) <= 1e-10);
  }
}

TEST_CASE("oracle beta-derivatives of the exact solution agree with the closed forms") {
  LpCase cs = lp_case(1.0, 1.0, 0.0, 3.0, 6.0);
  auto ds = cs.sys.derivatives(cs.beta, LineParabolaSystem::Branch::upper, 4);
  const double D = cs.delta;
  CHECK((ds[0] - Eigen::Vector2d(1.0 / D, (1.0 + D) / D)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((ds[1] + 2.0 / std::pow(D, 3) * Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((ds[2] - 12.0 / std::pow(D, 5) * Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((ds[3] + 120.0 / std::pow(D, 7) * Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("binary Hamming implicit derivatives match the symbolic oracle") {
  RdProblem p = binary_hamming_problem(0.3);
  BinaryHammingOracle oracle(0.3);
  for (double log2b : {1.5, 2.0, 3.0, 5.0}) {
    double beta = std::exp2(log2b);
    Marginal r = oracle.marginal(beta);
    RdTensorProvider provider(p, r, beta, 4);
    ImplicitDerivSet derivs = implicit_derivatives(provider, 4);
    auto expect = oracle.derivatives(beta, 4);
    for (int k = 1; k <= 4; ++k) {
      double rel = (derivs.order(k) - expect[k - 1]).cwiseAbs().maxCoeff() /
                   expect[k - 1].cwiseAbs().maxCoeff();
      CHECK(rel <= 1e-8);
    }
  }
}

TEST_CASE("summand counts follow the partition totals") {
  LpCase cs = lp_case(1.0, 1.0, 0.0, 3.0, 5.0);
  LineParabolaProvider provider(1.0, 1.0, 0.0, 3.0, cs.pt.x, cs.pt.y, cs.beta);
  ImplicitDerivSet derivs = implicit_derivatives(provider, 8);
  long long running = 0;
  for (int l = 1; l <= 8; ++l) {
    running += partition_count(l);
    CHECK(derivs.diagnostics.summand_counts[l - 1] == running);
  }
  // the trivial-partition pattern (b=0, m=1) is never queried on the RHS
  CHECK(derivs.diagnostics.rhs_tensor_queries.count({0, 1}) == 0);
}

TEST_CASE("singular Jacobian raises with the kernel dimension") {
  // at the tangency the two branches coincide and D_x F is singular
  LineParabolaSystem sys{1.0, 1.0, 0.0, 3.0};
  double beta_c = sys.beta_critical();
  CHECK(beta_c == doctest::Approx(2.75).epsilon(1e-12));
  auto pt = sys.exact(beta_c, LineParabolaSystem::Branch::upper);
  LineParabolaProvider provider(1.0, 1.0, 0.0, 3.0, pt.x, pt.y, beta_c);
  try {
    implicit_derivatives(provider, 2);
    FAIL("expected SingularJacobianError");
  } catch (const SingularJacobianError& e) {
    CHECK(e.rcond() <= 1e-12);
    CHECK(e.kernel_dimension() == 1);
  }
}

TEST_CASE("constant operator has vanishing derivatives and Lipschitz estimate") {
  ConstantProvider provider(3);
  ImplicitDerivSet derivs = implicit_derivatives(provider, 3);
  for (int k = 1; k <= 3; ++k) CHECK(derivs.order(k).cwiseAbs().maxCoeff() == 0.0);
  CHECK(derivative_jacobian(provider, derivs, 1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lipschitz_estimate(provider, derivs, 3, 0.2) == 0.0);
}

TEST_CASE("Taylor polynomial term-by-term and at zero") {
  LpCase cs = lp_case(1.0, 1.0, 0.0, 3.0, 5.0);
  LineParabolaProvider provider(1.0, 1.0, 0.0, 3.0, cs.pt.x, cs.pt.y, cs.beta);
  ImplicitDerivSet derivs = implicit_derivatives(provider, 4);
  Eigen::Vector2d base(cs.pt.x, cs.pt.y);
  TaylorPolynomial poly = taylor_polynomial(derivs, base, 4);
  const double D = cs.delta;
  // expansion coefficients of the fourth-order solution
  CHECK((poly.coeffs[1] - Eigen::Vector2d(1.0 / D, (1.0 + D) / D)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((poly.coeffs[2] + 1.0 / std::pow(D, 3) * Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() <=
        1e-12);
  CHECK((poly.coeffs[3] - 2.0 / std::pow(D, 5) * Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() <=
        1e-12);
  CHECK((poly.coeffs[4] + 5.0 / std::pow(D, 7) * Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() <=
        1e-12);
  CHECK(poly.eval(0.0) == base);  // exact, no tolerance
}

TEST_CASE("Taylor remainder order on binary Hamming") {
  RdProblem p = binary_hamming_problem(0.3);
  BinaryHammingOracle oracle(0.3);
  const double beta = 2.0;
  const int L = 2;
  Marginal r = oracle.marginal(beta);
  RdTensorProvider provider(p, r, beta, L);
  ImplicitDerivSet derivs = implicit_derivatives(provider, L);
  TaylorPolynomial poly = taylor_polynomial(derivs, r.weights, L);
  std::vector<double> log_h, log_e;
  for (double h : {1e-1, 3.16e-2, 1e-2, 3.16e-3, 1e-3}) {
    Eigen::VectorXd approx = poly.eval(h);
    Eigen::VectorXd exact = oracle.marginal(beta + h).weights;
    log_h.push_back(std::log(h));
    log_e.push_back(std::log((approx - exact).cwiseAbs().maxCoeff()));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    sx += log_h[i];
    sy += log_e[i];
    sxx += log_h[i] * log_h[i];
    sxy += log_h[i] * log_e[i];
  }
  double n = static_cast<double>(log_h.size());
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope >= L + 1 - 0.3);
  CHECK(slope <= L + 1 + 0.3);
}

TEST_CASE("derivative Jacobian matches finite differences on the line-parabola") {
  LpCase cs = lp_case(1.0, 1.0, 0.0, 3.0, 5.0);
  const double a = 1.0, b = 1.0, c = 0.0, d = 3.0;
  LineParabolaProvider provider(a, b, c, d, cs.pt.x, cs.pt.y, cs.beta);
  ImplicitDerivSet derivs = implicit_derivatives(provider, 1);
  Eigen::MatrixXd jac = derivative_jacobian(provider, derivs, 1);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d plus(cs.pt.x, cs.pt.y), minus(cs.pt.x, cs.pt.y);
    plus[j] += h;
    minus[j] -= h;
    LineParabolaProvider pp(a, b, c, d, plus[0], plus[1], cs.beta);
    LineParabolaProvider pm(a, b, c, d, minus[0], minus[1], cs.beta);
    Eigen::VectorXd fd =
        (implicit_derivatives(pp, 1).order(1) - implicit_derivatives(pm, 1).order(1)) / (2.0 * h);
    CHECK((jac.col(j) - fd).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("derivative Jacobian matches finite differences on an RD problem") {
  RdProblem p = testsupport::random_interior_problem(7, 3);
  double beta = 2.0;
  FixedPointResult res = ba_fixed_point(p, Marginal::uniform(3), beta, {1e-13, 2000000});
  REQUIRE(res.marginal.min_entry() > 0.05);
  RdTensorProvider provider(p, res.marginal, beta, 3);
  ImplicitDerivSet derivs = implicit_derivatives(provider, 2);
  auto jacs = derivative_jacobians(provider, derivs, 2);
  const double h = 1e-6;
  for (int l = 1; l <= 2; ++l) {
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd wp = res.marginal.weights, wm = res.marginal.weights;
      wp[j] += h;
      wm[j] -= h;
      RdTensorProvider pp(p, Marginal{wp, false}, beta, 2);
      RdTensorProvider pm(p, Marginal{wm, false}, beta, 2);
      Eigen::VectorXd fd =
          (implicit_derivatives(pp, l).order(l) - implicit_derivatives(pm, l).order(l)) / (2.0 * h);
      CHECK((jacs[l - 1].col(j) - fd).cwiseAbs().maxCoeff() <=
            1e-4 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("Lipschitz estimate grows toward the line-parabola bifurcation") {
  LineParabolaSystem sys{1.0, 1.0, 0.0, 3.0};
  double prev = -1.0;
  for (double beta : {5.0, 4.0, 3.2, 2.8}) {
    auto pt = sys.exact(beta, LineParabolaSystem::Branch::upper);
    LineParabolaProvider provider(1.0, 1.0, 0.0, 3.0, pt.x, pt.y, beta);
    ImplicitDerivSet derivs = implicit_derivatives(provider, 2);
    double lips = lipschitz_estimate(provider, derivs, 2, -0.05);
    CHECK(lips > prev);  // monotone growth as Δ -> 0
    prev = lips;
  }
  // at order 1 the estimate does not depend on the step
  auto pt = sys.exact(5.0, LineParabolaSystem::Branch::upper);
  LineParabolaProvider provider(1.0, 1.0, 0.0, 3.0, pt.x, pt.y, 5.0);
  ImplicitDerivSet derivs = implicit_derivatives(provider, 1);
  CHECK(lipschitz_estimate(provider, derivs, 1, -0.01) ==
        lipschitz_estimate(provider, derivs, 1, -0.5));
}

TEST_CASE("order-1 derivative satisfies the marginal-coordinate ODE") {
  // A · dr/dβ assembled independently equals -D_β F at full-support roots
  for (auto [problem, beta] :
       {std::pair{binary_hamming_problem(0.3), 3.0}, std::pair{fig3_problem(), 10.0}}) {
    FixedPointResult res =
        ba_fixed_point(problem, Marginal::uniform(problem.repro_size()), beta, {1e-13, 2000000});
    REQUIRE(res.marginal.min_entry() > 0.0);
    const int m = problem.repro_size();
    RdTensorProvider provider(problem, res.marginal, beta, 1);
    ImplicitDerivSet derivs = implicit_derivatives(provider, 1);
    // A(x̂,x̂') = sum_x p(x) q(x̂'|x) q(x̂|x) / r(x̂')
    Eigen::MatrixXd A(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int x = 0; x < problem.source_size(); ++x)
          s += problem.source[x] * res.encoder.channel(j, x) * res.encoder.channel(i, x) /
               res.marginal.weights[j];
        A(i, j) = s;
      }
    // RHS of the ODE: E_{q'p}[q d'] - E_p[q d]
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int x = 0; x < problem.source_size(); ++x) {
        double mean_d = 0.0;
        for (int j = 0; j < m; ++j) mean_d += res.encoder.channel(j, x) * problem.distortion(x, j);
        s += problem.source[x] * res.encoder.channel(i, x) *
             (mean_d - problem.distortion(x, i));
      }
      rhs[i] = s;
    }
    CHECK((A * derivs.order(1) - rhs).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_SUITE_END();
