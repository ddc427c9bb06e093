#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ck/trigpoly.hpp"

namespace ck {

/// Gaussian rational a + b·i.
struct GRat {
  Rat re = 0, im = 0;

  GRat() = default;
  GRat(Rat r) : re(std::move(r)) {}
  GRat(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}
  GRat(long long r) : re(r) {}

  bool is_zero() const { return re == 0 && im == 0; }
  GRat conj() const { return {re, -im}; }

  friend GRat operator+(const GRat& a, const GRat& b) { return {a.re + b.re, a.im + b.im}; }
  friend GRat operator-(const GRat& a, const GRat& b) { return {a.re - b.re, a.im - b.im}; }
  friend GRat operator-(const GRat& a) { return {-a.re, -a.im}; }
  friend GRat operator*(const GRat& a, const GRat& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GRat operator/(const GRat& a, const GRat& b) {
    Rat n = b.re * b.re + b.im * b.im;
    require(n != 0, "division by zero Gaussian rational");
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
  }
  friend bool operator==(const GRat& a, const GRat& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const GRat& a, const GRat& b) { return !(a == b); }
};

inline std::string grat_str(const GRat& c) {
  if (c.im == 0) return rat_str(c.re);
  return rat_str(c.re) + (c.im > 0 ? "+" : "") + rat_str(c.im) + "i";
}

/// Complex-valued exact function on T^m in the exponential basis:
/// finite sum  Σ c_k · e^{i k·θ},  c_k ∈ ℚ(i), k ∈ ℤ^m.
///
/// This is the complexification of the TrigPoly ring, but as a Laurent
/// polynomial ring it admits exact division (when divisible), which backs
/// fraction-free Gaussian elimination for eigenbundle / annihilator work.
class ExpPoly {
 public:
  ExpPoly() = default;
  explicit ExpPoly(int torus_dim) : m_dim(torus_dim) {
    require(torus_dim >= 0, "negative torus dimension");
  }

  static ExpPoly constant(int m, const GRat& c) {
    ExpPoly f(m);
    f.add_term(std::vector<int>(m, 0), c);
    return f;
  }
  static ExpPoly constant(const GRat& c) { return constant(0, c); }
  static ExpPoly i_unit(int m = 0) { return constant(m, GRat(Rat(0), Rat(1))); }
  static ExpPoly harmonic(std::vector<int> k, const GRat& c = GRat(1)) {
    ExpPoly f(static_cast<int>(k.size()));
    f.add_term(std::move(k), c);
    return f;
  }

  /// Embed a real trigonometric polynomial:
  /// cos(k·θ) = ½(E_k + E_{−k}),  sin(k·θ) = −(i/2)E_k + (i/2)E_{−k}.
  static ExpPoly from_trig(const TrigPoly& f) {
    ExpPoly out(f.torus_dim());
    for (const auto& [key, c] : f.terms()) {
      std::vector<int> neg = key.k;
      for (int& x : neg) x = -x;
      if (key.is_sin) {
        out.add_term(key.k, GRat(Rat(0), -c / 2));
        out.add_term(std::move(neg), GRat(Rat(0), c / 2));
      } else {
        out.add_term(key.k, GRat(c / 2));
        out.add_term(std::move(neg), GRat(c / 2));
      }
    }
    return out;
  }
  static ExpPoly from_trig(const TrigPoly& re, const TrigPoly& im) {
    return from_trig(re) + i_unit(std::max(re.torus_dim(), im.torus_dim())) * from_trig(im);
  }

  /// Real part as a TrigPoly (E_k = cos(k·θ) + i·sin(k·θ)).
  TrigPoly real_part() const {
    TrigPoly out(m_dim);
    for (const auto& [k, c] : m_terms) {
      out.add_term(false, k, c.re);
      out.add_term(true, k, -c.im);
    }
    return out;
  }
  TrigPoly imag_part() const {
    TrigPoly out(m_dim);
    for (const auto& [k, c] : m_terms) {
      out.add_term(false, k, c.im);
      out.add_term(true, k, c.re);
    }
    return out;
  }
  bool is_real() const { return imag_part().is_zero(); }

  int torus_dim() const { return m_dim; }
  const std::map<std::vector<int>, GRat>& terms() const { return m_terms; }
  bool is_zero() const { return m_terms.empty(); }
  bool is_constant() const {
    if (m_terms.empty()) return true;
    if (m_terms.size() > 1) return false;
    for (int x : m_terms.begin()->first)
      if (x != 0) return false;
    return true;
  }
  GRat constant_value() const {
    require(is_constant(), "ExpPoly is not constant");
    return m_terms.empty() ? GRat(0) : m_terms.begin()->second;
  }
  int degree() const {
    int d = 0;
    for (const auto& [k, c] : m_terms)
      for (int ki : k) d = std::max(d, ki >= 0 ? ki : -ki);
    return d;
  }
  std::size_t term_count() const { return m_terms.size(); }

  void add_term(std::vector<int> k, const GRat& c) {
    require(static_cast<int>(k.size()) == m_dim, "frequency vector length mismatch");
    if (c.is_zero()) return;
    auto it = m_terms.find(k);
    if (it == m_terms.end()) {
      m_terms.emplace(std::move(k), c);
    } else {
      it->second = it->second + c;
      if (it->second.is_zero()) m_terms.erase(it);
    }
  }

  ExpPoly promoted(int m) const {
    if (m_dim == m) return *this;
    require(m_dim == 0, "torus dimension mismatch");
    ExpPoly out(m);
    if (!m_terms.empty()) out.add_term(std::vector<int>(m, 0), m_terms.begin()->second);
    return out;
  }

  friend ExpPoly operator+(const ExpPoly& a, const ExpPoly& b) {
    auto [x, y] = align(a, b);
    ExpPoly out = x;
    for (const auto& [k, c] : y.m_terms) out.add_term(k, c);
    return out;
  }
  friend ExpPoly operator-(const ExpPoly& a) {
    ExpPoly out(a.m_dim);
    for (const auto& [k, c] : a.m_terms) out.m_terms.emplace(k, -c);
    return out;
  }
  friend ExpPoly operator-(const ExpPoly& a, const ExpPoly& b) { return a + (-b); }
  friend ExpPoly operator*(const ExpPoly& a, const ExpPoly& b) {
    auto [x, y] = align(a, b);
    ExpPoly out(x.m_dim);
    for (const auto& [ka, ca] : x.m_terms)
      for (const auto& [kb, cb] : y.m_terms) {
        std::vector<int> k = ka;
        for (size_t i = 0; i < k.size(); ++i) k[i] += kb[i];
        out.add_term(std::move(k), ca * cb);
      }
    return out;
  }
  friend ExpPoly operator*(const GRat& c, const ExpPoly& a) {
    ExpPoly out(a.m_dim);
    if (c.is_zero()) return out;
    for (const auto& [k, coef] : a.m_terms) out.m_terms.emplace(k, c * coef);
    return out;
  }
  ExpPoly& operator+=(const ExpPoly& b) { return *this = *this + b; }
  ExpPoly& operator-=(const ExpPoly& b) { return *this = *this - b; }
  ExpPoly& operator*=(const ExpPoly& b) { return *this = *this * b; }

  friend bool operator==(const ExpPoly& a, const ExpPoly& b) {
    auto [x, y] = align(a, b);
    return x.m_terms == y.m_terms;
  }
  friend bool operator!=(const ExpPoly& a, const ExpPoly& b) { return !(a == b); }

  ExpPoly conj() const {
    ExpPoly out(m_dim);
    for (const auto& [k, c] : m_terms) {
      std::vector<int> neg = k;
      for (int& x : neg) x = -x;
      out.add_term(std::move(neg), c.conj());
    }
    return out;
  }

  /// ∂/∂θ_i: ∂_i E_k = i·k_i·E_k.
  ExpPoly derive(int i) const {
    require(i >= 0 && i < m_dim, "derivative index out of range");
    ExpPoly out(m_dim);
    for (const auto& [k, c] : m_terms)
      if (k[i] != 0) out.add_term(k, GRat(Rat(0), Rat(k[i])) * c);
    return out;
  }

  /// Exact value at θ_i = q_i·π/2 (e^{i s π/2} ∈ {1, i, −1, −i}).
  GRat eval_quarter(const std::vector<int>& q) const {
    require(static_cast<int>(q.size()) == m_dim, "evaluation point dimension mismatch");
    GRat total;
    for (const auto& [k, c] : m_terms) {
      long long s = 0;
      for (int i = 0; i < m_dim; ++i) s += static_cast<long long>(k[i]) * q[i];
      int r = static_cast<int>(((s % 4) + 4) % 4);
      static const GRat powers[4] = {GRat(1), GRat(Rat(0), Rat(1)), GRat(-1),
                                     GRat(Rat(0), Rat(-1))};
      total = total + c * powers[r];
    }
    return total;
  }

  /// Exact division in the Laurent polynomial ring: returns a/b when b
  /// divides a, std::nullopt otherwise.
  static std::optional<ExpPoly> exact_div(const ExpPoly& a, const ExpPoly& b) {
    require(!b.is_zero(), "exact_div by zero");
    auto [r0, g] = align(a, b);
    ExpPoly r = r0, q(r0.m_dim);
    const auto& glead = *g.m_terms.rbegin();
    std::size_t guard = 0;
    while (!r.is_zero()) {
      if (++guard > 200000) throw internal_check_failure("exact_div did not terminate");
      const auto& rlead = *r.m_terms.rbegin();
      std::vector<int> k = rlead.first;
      for (size_t i = 0; i < k.size(); ++i) k[i] -= glead.first[i];
      // If the candidate quotient term falls lex-below min(a)−min(g), b∤a.
      {
        std::vector<int> lo = r0.m_terms.begin()->first;
        const auto& glo = g.m_terms.begin()->first;
        for (size_t i = 0; i < lo.size(); ++i) lo[i] -= glo[i];
        if (k < lo) return std::nullopt;
      }
      ExpPoly t = harmonic(k, rlead.second / glead.second);
      q += t;
      r -= t * g;
    }
    return q;
  }

  std::string str() const {
    if (m_terms.empty()) return "0";
    std::string s;
    for (const auto& [k, c] : m_terms) {
      if (!s.empty()) s += " + ";
      s += "(" + grat_str(c) + ")";
      bool any = false;
      for (int ki : k) any = any || (ki != 0);
      if (any) {
        s += "*E[";
        for (size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
        s += "]";
      }
    }
    return s;
  }

 private:
  static std::pair<ExpPoly, ExpPoly> align(const ExpPoly& a, const ExpPoly& b) {
    if (a.m_dim == b.m_dim) return {a, b};
    int m = std::max(a.m_dim, b.m_dim);
    return {a.promoted(m), b.promoted(m)};
  }

  int m_dim = 0;
  std::map<std::vector<int>, GRat> m_terms;  // lex-ordered frequencies
};

}  // namespace ck
