#pragma once

#include <cstdint>
#include <vector>

namespace rdtrack {

/// Integer partition in multiplicity form: distinct parts p1 < p2 < ... < ps
/// with positive multiplicities m1..ms, so that sum_i mults[i]*parts[i] == n.
struct IntPartition {
  std::vector<int> parts;
  std::vector<int> mults;
  int n = 0;

  int total_multiplicity() const;
  /// Multiplicity of the part 1, or 0 if absent.
  int multiplicity_of_one() const;
  /// Single part of size n.
  bool is_trivial() const;
};

/// All partitions of n >= 1, in increasing lexicographic order of the
/// non-decreasing part vectors: (1,1,1) < (1,2) < (3).
std::vector<IntPartition> partitions(int n);

/// Number of partitions p(n); p(0) == 1 by the empty-sum convention.
std::int64_t partition_count(int n);

/// Partitions of n into exactly k parts, via p_k(n) = p_{k-1}(n-1) + p_k(n-k).
std::int64_t partitions_exact(int n, int k);

/// Partitions of n into at most max_parts parts, p_{<=k}(n).
std::int64_t partitions_bounded(int n, int max_parts);

/// Coefficient l! / (b! (m1-b)! m2!...ms! (p1!)^m1 ... (ps!)^ms) of the
/// order-l expansion term selected by (partition, b).  Exact integer
/// arithmetic (128-bit) for l <= 20, log-gamma evaluation above that.
/// Requires 0 <= b <= m1 when p1 == 1, b == 0 otherwise.
double taylor_coefficient(int l, int b, const IntPartition& partition);

/// Multi-index alpha in N0^{M+1}; alpha[0] counts beta-differentiations,
/// alpha[1..M] the differentiations in the state coordinates.
struct MultiIndex {
  std::vector<int> alpha;

  int order() const;  // |alpha|
  double factorial() const;
};

/// All alpha_plus in N0^M with |alpha_plus| == m, as combinations with
/// repetition in lexicographic order of the sorted index tuples.
std::vector<std::vector<int>> multi_indices(int m_letters, int order);

double factorial(int n);

}  // namespace rdtrack
