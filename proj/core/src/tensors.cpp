#include "rdtrack/tensors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdtrack/ba.hpp"
#include "rdtrack/combinatorics.hpp"
#include "rdtrack/sympoly.hpp"

namespace rdtrack {

DerivativeTensor::DerivativeTensor(int b, int m, int dim, double beta_point)
    : b_(b), m_(m), dim_(dim), beta_point_(beta_point) {
  std::size_t size = 1;
  for (int i = 0; i <= m; ++i) size *= static_cast<std::size_t>(dim);
  data_.assign(size, 0.0);
}

namespace {
std::size_t flat_index(std::span<const int> index, int dim) {
  std::size_t f = 0;
  for (int i : index) f = f * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i);
  return f;
}
}  // namespace

double DerivativeTensor::entry(std::span<const int> index) const {
  return data_[flat_index(index, dim_)];
}

void DerivativeTensor::set_entry(std::span<const int> index, double value) {
  data_[flat_index(index, dim_)] = value;
}

Eigen::VectorXd DerivativeTensor::apply(
    std::span<const std::pair<const Eigen::VectorXd*, int>> args) const {
  int total = 0;
  for (const auto& [v, c] : args) total += c;
  if (total != m_) throw std::invalid_argument("DerivativeTensor::apply: argument count mismatch");
  std::vector<double> cur = data_;
  const std::size_t t = static_cast<std::size_t>(dim_);
  // contract the last axis repeatedly
  for (auto it = args.rbegin(); it != args.rend(); ++it) {
    for (int rep = 0; rep < it->second; ++rep) {
      const Eigen::VectorXd& v = *it->first;
      std::size_t rows = cur.size() / t;
      std::vector<double> next(rows);
      for (std::size_t rr = 0; rr < rows; ++rr) {
        double s = 0.0;
        const double* base = cur.data() + rr * t;
        for (std::size_t j = 0; j < t; ++j) s += base[j] * v[static_cast<Eigen::Index>(j)];
        next[rr] = s;
      }
      cur.swap(next);
    }
  }
  Eigen::VectorXd out(dim_);
  for (int i = 0; i < dim_; ++i) out[i] = cur[static_cast<std::size_t>(i)];
  return out;
}

Eigen::MatrixXd DerivativeTensor::apply_leaving_one(
    std::span<const std::pair<const Eigen::VectorXd*, int>> args) const {
  int total = 0;
  for (const auto& [v, c] : args) total += c;
  if (total != m_ - 1)
    throw std::invalid_argument("DerivativeTensor::apply_leaving_one: need m-1 arguments");
  std::vector<double> cur = data_;
  const std::size_t t = static_cast<std::size_t>(dim_);
  for (auto it = args.rbegin(); it != args.rend(); ++it) {
    for (int rep = 0; rep < it->second; ++rep) {
      const Eigen::VectorXd& v = *it->first;
      std::size_t rows = cur.size() / t;
      std::vector<double> next(rows);
      for (std::size_t rr = 0; rr < rows; ++rr) {
        double s = 0.0;
        const double* base = cur.data() + rr * t;
        for (std::size_t j = 0; j < t; ++j) s += base[j] * v[static_cast<Eigen::Index>(j)];
        next[rr] = s;
      }
      cur.swap(next);
    }
  }
  Eigen::MatrixXd out(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) out(i, j) = cur[static_cast<std::size_t>(i * dim_ + j)];
  return out;
}

std::vector<Eigen::VectorXd> expected_distortion_powers(const RdProblem& problem,
                                                        const Encoder& q, int k_max) {
  const int n = problem.source_size();
  const int m = problem.repro_size();
  std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(k_max) + 1);
  out[0] = Eigen::VectorXd::Ones(n);
  // running powers of d, column by column
  Eigen::MatrixXd dp = Eigen::MatrixXd::Ones(n, m);
  for (int k = 1; k <= k_max; ++k) {
    dp = dp.cwiseProduct(problem.distortion);
    Eigen::VectorXd e(n);
    for (int x = 0; x < n; ++x) e[x] = q.channel.col(x).dot(dp.row(x).transpose());
    out[static_cast<std::size_t>(k)] = e;
  }
  return out;
}

std::vector<Eigen::MatrixXd> eval_P_matrices(const RdProblem& problem, const Encoder& q,
                                             int k_max) {
  const int n = problem.source_size();
  const int m = problem.repro_size();
  auto powers = expected_distortion_powers(problem, q, k_max);
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(k_max) + 1);
  out[0] = Eigen::MatrixXd::Ones(m, n);
  std::vector<double> vals(static_cast<std::size_t>(k_max) + 1);
  for (int k = 1; k <= k_max; ++k) {
    const SymbolicPolynomial& pk = P_polynomial(k);
    Eigen::MatrixXd pm(m, n);
    for (int x = 0; x < n; ++x) {
      for (int j = 1; j <= k; ++j) vals[static_cast<std::size_t>(j)] = powers[static_cast<std::size_t>(j)][x];
      for (int xh = 0; xh < m; ++xh) {
        vals[0] = problem.distortion(x, xh);
        pm(xh, x) = pk.evaluate({vals.data(), static_cast<std::size_t>(k) + 1});
      }
    }
    out[static_cast<std::size_t>(k)] = std::move(pm);
  }
  return out;
}

std::vector<std::vector<Eigen::MatrixXd>> eval_G(const std::vector<Eigen::MatrixXd>& P, int L) {
  const int m = static_cast<int>(P[0].rows());
  const int n = static_cast<int>(P[0].cols());
  std::vector<std::vector<Eigen::MatrixXd>> G(
      static_cast<std::size_t>(L) + 1,
      std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(L) + 2,
                                   Eigen::MatrixXd::Zero(m, n)));
  // k = 0: only the empty partition, contributing 1/a! to every a.
  for (int a = 0; a <= L + 1; ++a)
    G[0][static_cast<std::size_t>(a)] = Eigen::MatrixXd::Constant(m, n, 1.0 / factorial(a));
  for (int k = 1; k <= L; ++k) {
    for (const IntPartition& t : partitions(k)) {
      Eigen::MatrixXd u = Eigen::MatrixXd::Ones(m, n);
      double tfact = 1.0;
      for (std::size_t i = 0; i < t.parts.size(); ++i) {
        int part = t.parts[i];
        int mult = t.mults[i];
        Eigen::MatrixXd base = P[static_cast<std::size_t>(part)] / factorial(part);
        for (int rep = 0; rep < mult; ++rep) u = u.cwiseProduct(base);
        tfact *= factorial(mult);
      }
      int tsize = t.total_multiplicity();
      for (int a = tsize; a <= L + 1; ++a)
        G[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)] +=
            u / (tfact * factorial(a - tsize));
    }
  }
  return G;
}

PointScratch PointScratch::build(const RdProblem& problem, const Marginal& r, double beta,
                                 int max_order) {
  if ((r.weights.array() <= 0.0).any())
    throw std::domain_error("PointScratch: point must have full positive support; reduce first");
  PointScratch s;
  s.problem = problem;
  s.r = r.weights;
  s.beta = beta;
  s.max_order = max_order;
  s.q = encoder_from_marginal(problem, r, beta);
  s.dist_powers = expected_distortion_powers(problem, s.q, max_order);
  s.P = eval_P_matrices(problem, s.q, max_order);
  s.G = eval_G(s.P, max_order);
  s.fact.resize(static_cast<std::size_t>(max_order) + 3);
  for (int i = 0; i <= max_order + 2; ++i) s.fact[static_cast<std::size_t>(i)] = factorial(i);
  return s;
}

Eigen::VectorXd tensor_beta_only(const PointScratch& scratch, int b) {
  if (b < 1) throw std::invalid_argument("tensor_beta_only: b must be >= 1");
  const int m = scratch.problem.repro_size();
  Eigen::VectorXd out(m);
  const Eigen::MatrixXd& pb = scratch.P[static_cast<std::size_t>(b)];
  for (int xh = 0; xh < m; ++xh)
    out[xh] = -(scratch.problem.source.array() * scratch.q.channel.row(xh).transpose().array() *
                pb.row(xh).transpose().array())
                   .sum();
  return out;
}

namespace {

// compositions of total over `len` non-negative slots
void compositions(int total, int len, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == len - 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    cur.push_back(v);
    compositions(total - v, len, cur, out);
    cur.pop_back();
  }
}

}  // namespace

Eigen::VectorXd partial_derivative(const PointScratch& scratch, int b,
                                   std::span<const int> alpha_plus) {
  const int m = scratch.problem.repro_size();
  const int n = scratch.problem.source_size();
  if (static_cast<int>(alpha_plus.size()) != m)
    throw std::invalid_argument("partial_derivative: multi-index length mismatch");
  int apl = 0;
  for (int a : alpha_plus) apl += a;
  if (apl == 0) return tensor_beta_only(scratch, b);
  if (b + apl > scratch.max_order)
    throw std::invalid_argument("partial_derivative: order exceeds the scratch's max_order");

  double alpha_fact = scratch.fact[static_cast<std::size_t>(b)];
  for (int a : alpha_plus) alpha_fact *= scratch.fact[static_cast<std::size_t>(a)];
  const double prefactor = ((apl - 1) % 2 == 0 ? 1.0 : -1.0) *
                           scratch.fact[static_cast<std::size_t>(apl - 1)] * alpha_fact;

  // (q(x̂_j|x)/r(x̂_j))^{α_j}, per source letter
  Eigen::VectorXd ratio = Eigen::VectorXd::Ones(n);
  for (int j = 0; j < m; ++j) {
    if (alpha_plus[j] == 0) continue;
    Eigen::ArrayXd base = scratch.q.channel.row(j).transpose().array() / scratch.r[j];
    for (int rep = 0; rep < alpha_plus[j]; ++rep) ratio.array() *= base;
  }

  std::vector<std::vector<int>> comps;
  if (b == 0) {
    comps.push_back(std::vector<int>(static_cast<std::size_t>(m), 0));
  } else {
    std::vector<int> cur;
    compositions(b, m, cur, comps);
  }

  Eigen::VectorXd out(m);
  Eigen::VectorXd acc(n);
  for (int xh = 0; xh < m; ++xh) {
    acc.setZero();
    for (const auto& kv : comps) {
      bool vanishes = false;
      for (int i = 0; i < m; ++i)
        if (i != xh && kv[static_cast<std::size_t>(i)] > 0 && alpha_plus[i] == 0) {
          vanishes = true;  // G(k,0) = 0 for k > 0
          break;
        }
      if (vanishes) continue;
      Eigen::ArrayXd w = Eigen::ArrayXd::Ones(n);
      for (int i = 0; i < m; ++i) {
        if (i == xh) continue;
        w *= scratch.G[static_cast<std::size_t>(kv[static_cast<std::size_t>(i)])]
                      [static_cast<std::size_t>(alpha_plus[i])]
                          .row(i)
                          .transpose()
                          .array();
      }
      const int kxh = kv[static_cast<std::size_t>(xh)];
      const int axh = alpha_plus[xh];
      Eigen::ArrayXd bracket =
          -static_cast<double>(apl) * (1.0 + axh) *
          scratch.q.channel.row(xh).transpose().array() *
          scratch.G[static_cast<std::size_t>(kxh)][static_cast<std::size_t>(axh + 1)]
              .row(xh)
              .transpose()
              .array();
      if (axh > 0)
        bracket += static_cast<double>(axh) *
                   scratch.G[static_cast<std::size_t>(kxh)][static_cast<std::size_t>(axh)]
                       .row(xh)
                       .transpose()
                       .array();
      acc.array() += w * bracket;
    }
    out[xh] = -prefactor *
              (scratch.problem.source.array() * ratio.array() * acc.array()).sum();
  }
  if (b == 0 && apl == 1) {
    for (int j = 0; j < m; ++j)
      if (alpha_plus[j] == 1) out[j] += 1.0;  // the Id part
  }
  return out;
}

RdTensorProvider::RdTensorProvider(const RdProblem& problem, const Marginal& r, double beta,
                                   int max_order)
    : scratch_(PointScratch::build(problem, r, beta, max_order)) {}

const DerivativeTensor& RdTensorProvider::tensor(int b, int m) {
  auto key = std::make_pair(b, m);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  if (b < 0 || m < 0 || b + m < 1) throw std::invalid_argument("tensor: bad orders");
  if (b + m > scratch_.max_order)
    throw std::invalid_argument("tensor: order exceeds provider max_order");
  const int t = dimension();
  DerivativeTensor tensor(b, m, t, scratch_.beta);
  if (m == 0) {
    Eigen::VectorXd v = tensor_beta_only(scratch_, b);
    for (int i = 0; i < t; ++i) {
      int idx = i;
      tensor.set_entry({&idx, 1}, v[i]);
    }
  } else {
    std::vector<int> index(static_cast<std::size_t>(m) + 1);
    for (const auto& alpha : multi_indices(t, m)) {
      Eigen::VectorXd v = partial_derivative(scratch_, b, alpha);
      // canonical sorted tuple for this multi-index
      std::vector<int> tuple;
      tuple.reserve(static_cast<std::size_t>(m));
      for (int j = 0; j < t; ++j)
        for (int rep = 0; rep < alpha[static_cast<std::size_t>(j)]; ++rep) tuple.push_back(j);
      // fan out to every distinct permutation of the input axes
      do {
        for (int i = 0; i < t; ++i) {
          index[0] = i;
          std::copy(tuple.begin(), tuple.end(), index.begin() + 1);
          tensor.set_entry(index, v[i]);
        }
      } while (std::next_permutation(tuple.begin(), tuple.end()));
    }
  }
  return cache_.emplace(key, std::move(tensor)).first->second;
}

LineParabolaProvider::LineParabolaProvider(double a, double b, double c, double d, double x0,
                                           double y0, double beta0)
    : a_(a), b_(b), c_(c), d_(d), beta0_(beta0), state_(2) {
  if (b == 0.0) throw std::invalid_argument("LineParabolaProvider: b must be nonzero");
  state_ << x0, y0;
}

const DerivativeTensor& LineParabolaProvider::tensor(int b, int m) {
  auto key = std::make_pair(b, m);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  if (b < 0 || m < 0 || b + m < 1) throw std::invalid_argument("tensor: bad orders");
  DerivativeTensor tensor(b, m, 2, beta0_);
  if (b == 0 && m == 1) {
    // rows F_i, columns (x, y)
    int idx[2];
    auto set = [&](int i, int j, double v) {
      idx[0] = i;
      idx[1] = j;
      tensor.set_entry({idx, 2}, v);
    };
    set(0, 0, 2.0 * b_ * state_[0] + c_);
    set(0, 1, -1.0);
    set(1, 0, a_);
    set(1, 1, -1.0);
  } else if (b == 1 && m == 0) {
    int idx = 1;
    tensor.set_entry({&idx, 1}, 1.0);
  } else if (b == 0 && m == 2) {
    int idx[3] = {0, 0, 0};
    tensor.set_entry({idx, 3}, 2.0 * b_);
  }
  return cache_.emplace(key, std::move(tensor)).first->second;
}

std::unique_ptr<TensorProvider> line_parabola_provider(double a, double b, double c, double d,
                                                       double x0, double y0, double beta0) {
  return std::make_unique<LineParabolaProvider>(a, b, c, d, x0, y0, beta0);
}

}  // namespace rdtrack
