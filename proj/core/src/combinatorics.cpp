#include "rdtrack/combinatorics.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace rdtrack {

int IntPartition::total_multiplicity() const {
  int m = 0;
  for (int mi : mults) m += mi;
  return m;
}

int IntPartition::multiplicity_of_one() const {
  return (!parts.empty() && parts.front() == 1) ? mults.front() : 0;
}

bool IntPartition::is_trivial() const {
  return parts.size() == 1 && mults.front() == 1;
}

namespace {

void enumerate_parts(int remaining, int min_part, std::vector<int>& stack,
                     std::vector<IntPartition>& out) {
  if (remaining == 0) {
    IntPartition p;
    p.n = 0;
    for (int v : stack) {
      p.n += v;
      if (!p.parts.empty() && p.parts.back() == v) {
        ++p.mults.back();
      } else {
        p.parts.push_back(v);
        p.mults.push_back(1);
      }
    }
    out.push_back(std::move(p));
    return;
  }
  for (int v = min_part; v <= remaining; ++v) {
    stack.push_back(v);
    enumerate_parts(remaining - v, v, stack, out);
    stack.pop_back();
  }
}

}  // namespace

std::vector<IntPartition> partitions(int n) {
  if (n < 1) throw std::invalid_argument("partitions: n must be >= 1");
  std::vector<IntPartition> out;
  std::vector<int> stack;
  enumerate_parts(n, 1, stack, out);
  return out;
}

std::int64_t partitions_exact(int n, int k) {
  if (n < 0 || k < 0) return 0;
  if (k == 0) return n == 0 ? 1 : 0;
  if (n < k) return 0;
  // Memoized table, grown on demand.
  static std::vector<std::vector<std::int64_t>> table;  // table[k][n]
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (static_cast<int>(table.size()) <= k || static_cast<int>(table[0].size()) <= n) {
    int kmax = std::max<int>(k + 1, static_cast<int>(table.size()));
    int nmax = std::max<int>(n + 1, table.empty() ? 0 : static_cast<int>(table[0].size()));
    std::vector<std::vector<std::int64_t>> t(kmax, std::vector<std::int64_t>(nmax, 0));
    t[0][0] = 1;
    for (int kk = 1; kk < kmax; ++kk)
      for (int nn = kk; nn < nmax; ++nn) {
        std::int64_t a = (nn - 1 >= 0) ? t[kk - 1][nn - 1] : 0;
        std::int64_t b = (nn - kk >= 0) ? t[kk][nn - kk] : 0;
        t[kk][nn] = a + b;
      }
    table.swap(t);
  }
  return table[k][n];
}

std::int64_t partitions_bounded(int n, int max_parts) {
  if (n < 0 || max_parts < 0) return 0;
  std::int64_t total = 0;
  for (int k = 0; k <= max_parts; ++k) total += partitions_exact(n, k);
  return total;
}

std::int64_t partition_count(int n) {
  if (n < 0) return 0;
  return partitions_bounded(n, n);
}

double factorial(int n) {
  static const auto table = [] {
    std::vector<double> t(171);
    t[0] = 1.0;
    for (int i = 1; i <= 170; ++i) t[i] = t[i - 1] * static_cast<double>(i);
    return t;
  }();
  if (n < 0) throw std::invalid_argument("factorial: negative argument");
  if (n <= 170) return table[n];
  return std::exp(std::lgamma(static_cast<double>(n) + 1.0));
}

double taylor_coefficient(int l, int b, const IntPartition& partition) {
  if (partition.n != l) throw std::invalid_argument("taylor_coefficient: partition of wrong integer");
  const int m1 = partition.multiplicity_of_one();
  const int bmax = m1;  // zero when no part of size 1
  if (b < 0 || b > bmax) throw std::invalid_argument("taylor_coefficient: b out of range");

  if (l <= 20) {
    // 20! fits in 64 bits; intermediate products are done in 128 bits.
    unsigned __int128 num = 1;
    for (int i = 2; i <= l; ++i) num *= static_cast<unsigned>(i);
    unsigned __int128 den = 1;
    auto fact128 = [](int n) {
      unsigned __int128 f = 1;
      for (int i = 2; i <= n; ++i) f *= static_cast<unsigned>(i);
      return f;
    };
    den *= fact128(b);
    for (std::size_t i = 0; i < partition.parts.size(); ++i) {
      int mi = partition.mults[i];
      if (i == 0 && partition.parts[0] == 1) mi -= b;
      den *= fact128(mi);
      unsigned __int128 pf = fact128(partition.parts[i]);
      for (int j = 0; j < partition.mults[i]; ++j) den *= pf;
    }
    return static_cast<double>(num / den) +
           static_cast<double>(num % den) / static_cast<double>(den);
  }

  double logc = std::lgamma(l + 1.0) - std::lgamma(b + 1.0);
  for (std::size_t i = 0; i < partition.parts.size(); ++i) {
    int mi = partition.mults[i];
    if (i == 0 && partition.parts[0] == 1) mi -= b;
    logc -= std::lgamma(mi + 1.0);
    logc -= partition.mults[i] * std::lgamma(partition.parts[i] + 1.0);
  }
  return std::exp(logc);
}

int MultiIndex::order() const {
  int s = 0;
  for (int a : alpha) s += a;
  return s;
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int a : alpha) f *= rdtrack::factorial(a);
  return f;
}

std::vector<std::vector<int>> multi_indices(int m_letters, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> combo(order, 0);
  // combinations with repetition over {0..m_letters-1}, lexicographic
  if (m_letters <= 0) return out;
  if (order == 0) {
    out.emplace_back(m_letters, 0);
    return out;
  }
  while (true) {
    std::vector<int> alpha(m_letters, 0);
    for (int i : combo) ++alpha[i];
    out.push_back(std::move(alpha));
    int i = order - 1;
    while (i >= 0 && combo[i] == m_letters - 1) --i;
    if (i < 0) break;
    ++combo[i];
    for (int j = i + 1; j < order; ++j) combo[j] = combo[i];
  }
  return out;
}

}  // namespace rdtrack
