#include "rdtrack/sympoly.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rdtrack {

std::string coeff_to_string(Coeff c) {
  if (c == 0) return "0";
  bool neg = c < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-c) : static_cast<unsigned __int128>(c);
  std::string s;
  while (u > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

Coeff coeff_from_string(const std::string& s) {
  Coeff c = 0;
  bool neg = false;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) neg = s[i++] == '-';
  if (i == s.size()) throw std::invalid_argument("coeff_from_string: empty");
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("coeff_from_string: bad digit");
    c = c * 10 + (s[i] - '0');
  }
  return neg ? -c : c;
}

SymbolicPolynomial SymbolicPolynomial::constant(Coeff c) {
  SymbolicPolynomial p;
  if (c != 0) p.terms_[{}] = c;
  return p;
}

SymbolicPolynomial SymbolicPolynomial::variable(int index) {
  SymbolicPolynomial p;
  p.terms_[{{index, 1}}] = 1;
  return p;
}

int SymbolicPolynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) {
    int s = 0;
    for (auto [v, e] : m) s += e;
    d = std::max(d, s);
  }
  return d;
}

int SymbolicPolynomial::max_variable() const {
  int mv = -1;
  for (const auto& [m, c] : terms_)
    for (auto [v, e] : m) mv = std::max(mv, v);
  return mv;
}

void SymbolicPolynomial::add_term(const Monomial& m, Coeff c) {
  if (c == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

SymbolicPolynomial SymbolicPolynomial::operator+(const SymbolicPolynomial& o) const {
  SymbolicPolynomial out = *this;
  for (const auto& [m, c] : o.terms_) out.add_term(m, c);
  return out;
}

SymbolicPolynomial SymbolicPolynomial::operator-(const SymbolicPolynomial& o) const {
  SymbolicPolynomial out = *this;
  for (const auto& [m, c] : o.terms_) out.add_term(m, -c);
  return out;
}

namespace {

SymbolicPolynomial::Monomial mul_monomials(const SymbolicPolynomial::Monomial& a,
                                           const SymbolicPolynomial::Monomial& b) {
  SymbolicPolynomial::Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

SymbolicPolynomial SymbolicPolynomial::operator*(const SymbolicPolynomial& o) const {
  SymbolicPolynomial out;
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) out.add_term(mul_monomials(ma, mb), ca * cb);
  return out;
}

double SymbolicPolynomial::evaluate(std::span<const double> values) const {
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = static_cast<double>(c);
    for (auto [v, e] : m) {
      if (v >= static_cast<int>(values.size()))
        throw std::invalid_argument("SymbolicPolynomial::evaluate: missing variable value");
      double x = values[v];
      for (int i = 0; i < e; ++i) t *= x;
    }
    sum += t;
  }
  return sum;
}

std::string SymbolicPolynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << coeff_to_string(c);
    for (auto [v, e] : m) {
      os << "*x" << v;
      if (e > 1) os << "^" << e;
    }
  }
  return os.str();
}

SymbolicPolynomial derive(const SymbolicPolynomial& p) {
  SymbolicPolynomial out;
  for (const auto& [m, c] : p.terms()) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      auto [v, e] = m[i];
      if (v == 0) continue;  // d̄x0 = 0
      SymbolicPolynomial::Monomial rest = m;
      if (e == 1) {
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        rest[i].second = e - 1;
      }
      Coeff ce = c * e;
      // + c*e * rest * x1 * xv
      SymbolicPolynomial::Monomial x1xv{{1, 1}};
      if (v == 1) {
        x1xv = {{1, 2}};
      } else {
        x1xv.emplace_back(v, 1);
        std::sort(x1xv.begin(), x1xv.end());
      }
      out.add_term(mul_monomials(rest, x1xv), ce);
      // - c*e * rest * x_{v+1}
      out.add_term(mul_monomials(rest, {{v + 1, 1}}), -ce);
    }
  }
  return out;
}

namespace {

std::mutex g_pcache_mutex;
std::deque<SymbolicPolynomial>& p_cache() {
  static std::deque<SymbolicPolynomial> cache;  // stable addresses
  return cache;
}

void extend_p_cache_locked(int k_max) {
  auto& cache = p_cache();
  if (cache.empty()) cache.push_back(SymbolicPolynomial::constant(1));
  static const SymbolicPolynomial x1_minus_x0 =
      SymbolicPolynomial::variable(1) - SymbolicPolynomial::variable(0);
  while (static_cast<int>(cache.size()) <= k_max) {
    const SymbolicPolynomial& last = cache.back();
    cache.push_back(x1_minus_x0 * last + derive(last));
  }
}

}  // namespace

const SymbolicPolynomial& P_polynomial(int k) {
  if (k < 0) throw std::invalid_argument("P_polynomial: k must be >= 0");
  std::lock_guard<std::mutex> lock(g_pcache_mutex);
  extend_p_cache_locked(k);
  return p_cache()[static_cast<std::size_t>(k)];
}

std::vector<const SymbolicPolynomial*> generate_P(int k_max) {
  if (k_max < 0) throw std::invalid_argument("generate_P: k_max must be >= 0");
  std::lock_guard<std::mutex> lock(g_pcache_mutex);
  extend_p_cache_locked(k_max);
  std::vector<const SymbolicPolynomial*> out;
  out.reserve(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) out.push_back(&p_cache()[static_cast<std::size_t>(k)]);
  return out;
}

int max_cached_P_order() {
  std::lock_guard<std::mutex> lock(g_pcache_mutex);
  return static_cast<int>(p_cache().size()) - 1;
}

void save_P_cache(std::ostream& os, int k_max) {
  auto ps = generate_P(k_max);
  for (int k = 0; k <= k_max; ++k) {
    os << "P " << k << " " << ps[static_cast<std::size_t>(k)]->monomial_count() << "\n";
    for (const auto& [m, c] : ps[static_cast<std::size_t>(k)]->terms()) {
      os << coeff_to_string(c);
      for (auto [v, e] : m) os << " " << v << " " << e;
      os << "\n";
    }
  }
}

bool load_P_cache(std::istream& is) {
  std::deque<SymbolicPolynomial> loaded;
  std::string tag;
  while (is >> tag) {
    if (tag != "P") return false;
    int k = 0;
    std::size_t nterms = 0;
    if (!(is >> k >> nterms)) return false;
    if (k != static_cast<int>(loaded.size())) return false;
    SymbolicPolynomial p;
    for (std::size_t t = 0; t < nterms; ++t) {
      std::string cs;
      if (!(is >> cs)) return false;
      Coeff c = coeff_from_string(cs);
      SymbolicPolynomial::Monomial m;
      // remaining pairs on this line
      std::string line;
      std::getline(is, line);
      std::istringstream ls(line);
      int v, e;
      while (ls >> v >> e) m.emplace_back(v, e);
      p.add_term(m, c);
    }
    loaded.push_back(std::move(p));
  }
  if (loaded.empty()) return false;
  // Structural sanity only; a full re-derivation would defeat the cache.
  if (!(loaded[0] == SymbolicPolynomial::constant(1))) return false;
  for (std::size_t k = 1; k < loaded.size(); ++k) {
    if (loaded[k].degree() > static_cast<int>(k)) return false;
    if (loaded[k].max_variable() > static_cast<int>(k)) return false;
  }
  std::lock_guard<std::mutex> lock(g_pcache_mutex);
  if (loaded.size() > p_cache().size()) p_cache() = std::move(loaded);
  return true;
}

}  // namespace rdtrack
