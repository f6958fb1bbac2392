#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rdtrack {

/// Coefficients of the P_k family exceed 64 bits from k = 19 on
/// (max |coeff| of P_20 is ~2.8e20), so terms are stored in 128 bits.
using Coeff = __int128;

std::string coeff_to_string(Coeff c);
Coeff coeff_from_string(const std::string& s);

/// Sparse integer-coefficient polynomial over the variables x0, x1, ...
/// A monomial is a sorted list of (variable, exponent>0) pairs; like
/// monomials are merged and zero coefficients dropped.
class SymbolicPolynomial {
 public:
  using Monomial = std::vector<std::pair<int, int>>;
  using TermMap = std::map<Monomial, Coeff>;

  SymbolicPolynomial() = default;
  static SymbolicPolynomial constant(Coeff c);
  static SymbolicPolynomial variable(int index);

  const TermMap& terms() const { return terms_; }
  std::size_t monomial_count() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  int max_variable() const;  // -1 for a constant

  void add_term(const Monomial& m, Coeff c);

  SymbolicPolynomial operator+(const SymbolicPolynomial& o) const;
  SymbolicPolynomial operator-(const SymbolicPolynomial& o) const;
  SymbolicPolynomial operator*(const SymbolicPolynomial& o) const;

  bool operator==(const SymbolicPolynomial& o) const { return terms_ == o.terms_; }

  /// Monomial-by-monomial sum in the map's (deterministic) key order.
  /// values[i] supplies x_i; throws if a needed variable is missing.
  double evaluate(std::span<const double> values) const;

  std::string to_string() const;  // human-readable, for diagnostics

 private:
  TermMap terms_;
};

/// The derivation d̄: linear, Leibniz, with d̄x0 = 0 and
/// d̄x_k = x1*x_k - x_{k+1} for k > 0.
SymbolicPolynomial derive(const SymbolicPolynomial& p);

/// P_0 = 1, P_{k+1} = (x1 - x0)*P_k + d̄P_k.  Generated lazily and cached
/// process-wide; the returned reference stays valid for the process
/// lifetime.
const SymbolicPolynomial& P_polynomial(int k);

/// P_0..P_kmax as a vector of pointers into the cache.
std::vector<const SymbolicPolynomial*> generate_P(int k_max);

/// Text cache: one header line "P <k> <monomials>" per polynomial, then one
/// monomial per line, "coefficient var exp [var exp ...]".
void save_P_cache(std::ostream& os, int k_max);
bool load_P_cache(std::istream& is);

/// Largest k generated so far, or -1 when nothing is cached yet.
int max_cached_P_order();

}  // namespace rdtrack
