#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ck/rat.hpp"

namespace ck {

/// Basis term of a trigonometric polynomial: cos(k·θ) or sin(k·θ) for an
/// integer frequency vector k. Canonical-form constraints (enforced by
/// TrigPoly, not here): sin terms have k ≠ 0, and the first nonzero entry
/// of k is positive.
struct TrigKey {
  bool is_sin = false;  // false: cos, true: sin
  std::vector<int> k;

  friend bool operator<(const TrigKey& a, const TrigKey& b) {
    if (a.is_sin != b.is_sin) return !a.is_sin && b.is_sin;
    return a.k < b.k;
  }
  friend bool operator==(const TrigKey& a, const TrigKey& b) {
    return a.is_sin == b.is_sin && a.k == b.k;
  }
};

/// Exact function on the flat torus T^m: a finite rational linear
/// combination of cos(k·θ) and sin(k·θ), k ∈ ℤ^m, kept in canonical form so
/// that equality of functions is equality of term maps. The zero polynomial
/// has an empty term map; constants are stored as cos(0·θ).
///
/// A TrigPoly of torus_dim 0 is a plain rational constant and promotes
/// implicitly when combined with polynomials on a positive-dimensional torus.
class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(int torus_dim) : m_dim(torus_dim) {
    require(torus_dim >= 0, "negative torus dimension");
  }

  static TrigPoly constant(int m, const Rat& c) {
    TrigPoly f(m);
    f.add_term(false, std::vector<int>(m, 0), c);
    return f;
  }
  static TrigPoly constant(const Rat& c) { return constant(0, c); }

  /// cos(k·θ) resp. sin(k·θ) with coefficient c.
  static TrigPoly harmonic(bool is_sin, std::vector<int> k, const Rat& c = 1) {
    TrigPoly f(static_cast<int>(k.size()));
    f.add_term(is_sin, std::move(k), c);
    return f;
  }
  /// cos θ_i on T^m (i is 0-based).
  static TrigPoly cos1(int m, int i, const Rat& c = 1) {
    std::vector<int> k(m, 0);
    k.at(i) = 1;
    return harmonic(false, std::move(k), c);
  }
  /// sin θ_i on T^m (i is 0-based).
  static TrigPoly sin1(int m, int i, const Rat& c = 1) {
    std::vector<int> k(m, 0);
    k.at(i) = 1;
    return harmonic(true, std::move(k), c);
  }

  int torus_dim() const { return m_dim; }
  const std::map<TrigKey, Rat>& terms() const { return m_terms; }
  bool is_zero() const { return m_terms.empty(); }
  bool is_constant() const {
    if (m_terms.empty()) return true;
    if (m_terms.size() > 1) return false;
    const auto& [key, c] = *m_terms.begin();
    return !key.is_sin && is_zero_vec(key.k);
  }
  /// Value of a constant polynomial.
  Rat constant_value() const {
    require(is_constant(), "TrigPoly is not constant");
    return m_terms.empty() ? Rat(0) : m_terms.begin()->second;
  }

  /// max ‖k‖∞ over terms (0 for constants).
  int degree() const {
    int d = 0;
    for (const auto& [key, c] : m_terms)
      for (int ki : key.k) d = std::max(d, ki >= 0 ? ki : -ki);
    return d;
  }

  /// Accumulate c·{cos,sin}(k·θ), canonicalizing the term.
  void add_term(bool is_sin, std::vector<int> k, Rat c) {
    require(static_cast<int>(k.size()) == m_dim, "frequency vector length mismatch");
    if (c == 0) return;
    if (is_zero_vec(k)) {
      if (is_sin) return;  // sin 0 = 0
    } else {
      for (int ki : k) {
        if (ki > 0) break;
        if (ki < 0) {  // first nonzero entry negative: flip sign of k
          for (int& kj : k) kj = -kj;
          if (is_sin) c = -c;
          break;
        }
      }
    }
    TrigKey key{is_sin, std::move(k)};
    auto it = m_terms.find(key);
    if (it == m_terms.end()) {
      m_terms.emplace(std::move(key), std::move(c));
    } else {
      it->second += c;
      if (it->second == 0) m_terms.erase(it);
    }
  }

  TrigPoly promoted(int m) const {
    if (m_dim == m) return *this;
    require(m_dim == 0, "torus dimension mismatch");
    TrigPoly out(m);
    if (!m_terms.empty()) out.add_term(false, std::vector<int>(m, 0), m_terms.begin()->second);
    return out;
  }

  friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
    auto [x, y] = align(a, b);
    TrigPoly out = x;
    for (const auto& [key, c] : y.m_terms) out.add_term(key.is_sin, key.k, c);
    return out;
  }
  friend TrigPoly operator-(const TrigPoly& a) {
    TrigPoly out(a.m_dim);
    for (const auto& [key, c] : a.m_terms) out.m_terms.emplace(key, -c);
    return out;
  }
  friend TrigPoly operator-(const TrigPoly& a, const TrigPoly& b) { return a + (-b); }

  /// Product via the product-to-sum identities; stays in the ring exactly.
  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
    auto [x, y] = align(a, b);
    TrigPoly out(x.m_dim);
    for (const auto& [ka, ca] : x.m_terms) {
      for (const auto& [kb, cb] : y.m_terms) {
        Rat half = ca * cb / 2;
        std::vector<int> sum(ka.k), dif(ka.k);
        for (size_t i = 0; i < sum.size(); ++i) {
          sum[i] += kb.k[i];
          dif[i] -= kb.k[i];
        }
        if (!ka.is_sin && !kb.is_sin) {         // cos·cos = ½cos(A−B) + ½cos(A+B)
          out.add_term(false, dif, half);
          out.add_term(false, sum, half);
        } else if (ka.is_sin && kb.is_sin) {    // sin·sin = ½cos(A−B) − ½cos(A+B)
          out.add_term(false, dif, half);
          out.add_term(false, sum, -half);
        } else if (ka.is_sin) {                 // sinA·cosB = ½sin(A+B) + ½sin(A−B)
          out.add_term(true, sum, half);
          out.add_term(true, dif, half);
        } else {                                // cosA·sinB = ½sin(A+B) − ½sin(A−B)
          out.add_term(true, sum, half);
          out.add_term(true, dif, -half);
        }
      }
    }
    return out;
  }

  friend TrigPoly operator*(const Rat& c, const TrigPoly& a) {
    TrigPoly out(a.m_dim);
    if (c == 0) return out;
    for (const auto& [key, coef] : a.m_terms) out.m_terms.emplace(key, c * coef);
    return out;
  }
  friend TrigPoly operator*(const TrigPoly& a, const Rat& c) { return c * a; }

  TrigPoly& operator+=(const TrigPoly& b) { return *this = *this + b; }
  TrigPoly& operator-=(const TrigPoly& b) { return *this = *this - b; }
  TrigPoly& operator*=(const TrigPoly& b) { return *this = *this * b; }

  friend bool operator==(const TrigPoly& a, const TrigPoly& b) {
    if (a.m_dim != b.m_dim) {
      auto [x, y] = align(a, b);
      return x.m_terms == y.m_terms;
    }
    return a.m_terms == b.m_terms;
  }
  friend bool operator!=(const TrigPoly& a, const TrigPoly& b) { return !(a == b); }

  /// ∂/∂θ_i (0-based): ∂_i cos(k·θ) = −k_i sin(k·θ), ∂_i sin(k·θ) = k_i cos(k·θ).
  TrigPoly derive(int i) const {
    require(i >= 0 && i < m_dim, "derivative index out of range");
    TrigPoly out(m_dim);
    for (const auto& [key, c] : m_terms) {
      Rat ki(key.k[i]);
      if (ki == 0) continue;
      if (key.is_sin)
        out.add_term(false, key.k, ki * c);
      else
        out.add_term(true, key.k, -ki * c);
    }
    return out;
  }

  /// Exact value at θ_i = q_i·π/2 for integers q_i.
  Rat eval_quarter(const std::vector<int>& q) const {
    require(static_cast<int>(q.size()) == m_dim, "evaluation point dimension mismatch");
    Rat total(0);
    for (const auto& [key, c] : m_terms) {
      long long s = 0;
      for (int i = 0; i < m_dim; ++i) s += static_cast<long long>(key.k[i]) * q[i];
      int r = static_cast<int>(((s % 4) + 4) % 4);
      int val;
      if (key.is_sin)
        val = (r == 1) ? 1 : (r == 3 ? -1 : 0);
      else
        val = (r == 0) ? 1 : (r == 2 ? -1 : 0);
      if (val != 0) total += c * val;
    }
    return total;
  }

  nlohmann::json to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [key, c] : m_terms)
      terms.push_back({{"kind", key.is_sin ? "sin" : "cos"}, {"k", key.k}, {"c", rat_str(c)}});
    return {{"m", m_dim}, {"terms", terms}};
  }

  static TrigPoly from_json(const nlohmann::json& j) {
    require(j.is_object() && j.contains("m") && j.contains("terms"), "malformed TrigPoly JSON");
    TrigPoly f(j.at("m").get<int>());
    for (const auto& t : j.at("terms")) {
      std::string kind = t.at("kind").get<std::string>();
      require(kind == "cos" || kind == "sin", "TrigPoly kind must be cos or sin");
      f.add_term(kind == "sin", t.at("k").get<std::vector<int>>(),
                 rat_parse(t.at("c").get<std::string>()));
    }
    return f;
  }

  std::string str() const {
    if (m_terms.empty()) return "0";
    std::string s;
    for (const auto& [key, c] : m_terms) {
      if (!s.empty()) s += " + ";
      s += rat_str(c);
      if (!is_zero_vec(key.k)) {
        s += key.is_sin ? "*sin(" : "*cos(";
        bool first = true;
        for (int i = 0; i < m_dim; ++i) {
          if (key.k[i] == 0) continue;
          if (!first) s += "+";
          first = false;
          if (key.k[i] != 1) s += std::to_string(key.k[i]) + "*";
          s += "t" + std::to_string(i + 1);
        }
        s += ")";
      }
    }
    return s;
  }

 private:
  static bool is_zero_vec(const std::vector<int>& k) {
    for (int ki : k)
      if (ki != 0) return false;
    return true;
  }
  static std::pair<TrigPoly, TrigPoly> align(const TrigPoly& a, const TrigPoly& b) {
    if (a.m_dim == b.m_dim) return {a, b};
    int m = std::max(a.m_dim, b.m_dim);
    return {a.promoted(m), b.promoted(m)};
  }

  int m_dim = 0;
  std::map<TrigKey, Rat> m_terms;
};

}  // namespace ck
