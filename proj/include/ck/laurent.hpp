#pragma once

/// Content extraction in the Laurent-polynomial ring ℚ(i)[e^{±iθ_1},…,e^{±iθ_m}].
///
/// Fraction-free kernel computations return vectors scaled by pivot products,
/// which are generally non-unit ring elements.  For line-bundle generators
/// (pure spinors, eigenbundle frames) such a spurious factor changes the
/// vanishing locus, so it has to be divided out.  The units of the Laurent
/// ring are the monomials c·e^{ik·θ}; a generator is therefore recovered, up
/// to a unit, by dividing the vector by the polynomial GCD of its components.

#include <map>
#include <optional>
#include <vector>

#include "ck/exppoly.hpp"

namespace ck {
namespace detail {

/// Sparse polynomial in m variables over ℚ(i), exponents ≥ 0.
using Mono = std::vector<int>;
using MP = std::map<Mono, GRat>;

inline bool mp_is_zero(const MP& f) { return f.empty(); }

inline void mp_add_term(MP& f, const Mono& k, const GRat& c) {
  if (c.is_zero()) return;
  auto it = f.find(k);
  if (it == f.end()) {
    f.emplace(k, c);
  } else {
    it->second = it->second + c;
    if (it->second.is_zero()) f.erase(it);
  }
}

inline MP mp_mul(const MP& a, const MP& b) {
  MP out;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) {
      Mono k(ka.size());
      for (std::size_t t = 0; t < ka.size(); ++t) k[t] = ka[t] + kb[t];
      mp_add_term(out, k, ca * cb);
    }
  return out;
}

inline MP mp_sub(const MP& a, const MP& b) {
  MP out = a;
  for (const auto& [k, c] : b) mp_add_term(out, k, -c);
  return out;
}

inline int mp_deg(const MP& f, int v) {
  int d = 0;
  for (const auto& [k, c] : f) d = std::max(d, k[v]);
  return d;
}

inline bool mp_involves(const MP& f, int v) {
  for (const auto& [k, c] : f)
    if (k[v] != 0) return true;
  return false;
}

/// Coefficient of z_v^e, as a polynomial with the v-th exponent zeroed.
inline MP mp_coeff(const MP& f, int v, int e) {
  MP out;
  for (const auto& [k, c] : f)
    if (k[v] == e) {
      Mono kk = k;
      kk[v] = 0;
      out.emplace(kk, c);
    }
  return out;
}

/// f · z_v^e
inline MP mp_shift(const MP& f, int v, int e) {
  MP out;
  for (const auto& [k, c] : f) {
    Mono kk = k;
    kk[v] += e;
    out.emplace(kk, c);
  }
  return out;
}

/// Exact multivariate division (lex leading-term cancellation); nullopt when
/// g does not divide f.
inline std::optional<MP> mp_exact_div(MP f, const MP& g) {
  require(!mp_is_zero(g), "polynomial division by zero");
  MP q;
  const auto& [lg, cg] = *g.rbegin();  // lex-leading term of the divisor
  while (!mp_is_zero(f)) {
    const auto& [lf, cf] = *f.rbegin();
    Mono k(lf.size());
    for (std::size_t t = 0; t < lf.size(); ++t) {
      k[t] = lf[t] - lg[t];
      if (k[t] < 0) return std::nullopt;
    }
    GRat c = cf / cg;
    mp_add_term(q, k, c);
    MP step;
    step.emplace(k, c);
    f = mp_sub(f, mp_mul(step, g));
  }
  return q;
}

inline MP mp_gcd(MP f, MP g);

/// GCD of the z_v-coefficients of f.
inline MP mp_content(const MP& f, int v) {
  MP c;
  for (int e = 0; e <= mp_deg(f, v); ++e) {
    MP co = mp_coeff(f, v, e);
    if (mp_is_zero(co)) continue;
    c = mp_is_zero(c) ? co : mp_gcd(c, co);
    if (c.size() == 1 && c.begin()->first == Mono(c.begin()->first.size(), 0)) break;
  }
  return c;
}

inline MP mp_primitive(const MP& f, int v) {
  MP c = mp_content(f, v);
  auto q = mp_exact_div(f, c);
  require(q.has_value(), "content must divide");
  return *q;
}

/// One full pseudo-division pass: reduce deg_v(f) below deg_v(g).
inline MP mp_pseudo_rem(MP f, const MP& g, int v) {
  int dg = mp_deg(g, v);
  MP lg = mp_coeff(g, v, dg);
  while (!mp_is_zero(f) && mp_deg(f, v) >= dg) {
    int df = mp_deg(f, v);
    MP lf = mp_coeff(f, v, df);
    f = mp_sub(mp_mul(lg, f), mp_mul(mp_shift(lf, v, df - dg), g));
  }
  return f;
}

/// GCD up to a constant, by primitive pseudo-remainder sequences.
inline MP mp_gcd(MP f, MP g) {
  if (mp_is_zero(f)) return g;
  if (mp_is_zero(g)) return f;
  int nv = static_cast<int>(f.begin()->first.size());
  int v = -1;
  for (int t = 0; t < nv; ++t)
    if (mp_involves(f, t) || mp_involves(g, t)) {
      v = t;
      break;
    }
  if (v < 0) {
    MP one;
    one.emplace(Mono(nv, 0), GRat(1));
    return one;  // both constants: a unit
  }
  if (!mp_involves(f, v)) return mp_gcd(f, mp_content(g, v));
  if (!mp_involves(g, v)) return mp_gcd(mp_content(f, v), g);
  MP cf = mp_content(f, v), cg = mp_content(g, v);
  MP c = mp_gcd(cf, cg);
  MP fp = *mp_exact_div(f, cf), gp = *mp_exact_div(g, cg);
  if (mp_deg(fp, v) < mp_deg(gp, v)) std::swap(fp, gp);
  while (!mp_is_zero(gp)) {
    MP r = mp_pseudo_rem(fp, gp, v);
    fp = gp;
    if (mp_is_zero(r)) {
      gp = r;
    } else {
      gp = mp_primitive(r, v);
    }
  }
  return mp_mul(c, mp_primitive(fp, v));
}

/// ExpPoly → polynomial form: shift every variable's minimal exponent to 0
/// (a unit multiple; the applied monomial shift is reported through `shift`).
inline MP mp_of_ep(const ExpPoly& f, std::vector<int>* shift_out = nullptr) {
  int nv = f.torus_dim();
  std::vector<int> shift(nv, 0);
  bool first = true;
  for (const auto& [k, c] : f.terms()) {
    for (int t = 0; t < nv; ++t) shift[t] = first ? k[t] : std::min(shift[t], k[t]);
    first = false;
  }
  MP out;
  for (const auto& [k, c] : f.terms()) {
    Mono kk(nv);
    for (int t = 0; t < nv; ++t) kk[t] = k[t] - shift[t];
    out.emplace(kk, c);
  }
  if (shift_out) *shift_out = shift;
  return out;
}

inline ExpPoly ep_of_mp(const MP& f, int torus_dim, const std::vector<int>* offset = nullptr) {
  ExpPoly out(torus_dim);
  for (const auto& [k, c] : f) {
    Mono kk = k;
    if (offset)
      for (int t = 0; t < torus_dim; ++t) kk[t] += (*offset)[t];
    out += ExpPoly::harmonic(kk, c);
  }
  return out;
}

}  // namespace detail

/// Divide a vector of ring elements by the GCD of its components, so that the
/// result has unit content (generates the same line with the true vanishing
/// locus).  Zero vectors are returned unchanged.
inline std::vector<ExpPoly> laurent_primitive(const std::vector<ExpPoly>& v) {
  int dim = 0;
  for (const auto& e : v) dim = std::max(dim, e.torus_dim());
  detail::MP g;
  for (const auto& e : v) {
    if (e.is_zero()) continue;
    detail::MP m = detail::mp_of_ep(e.promoted(dim));
    g = detail::mp_is_zero(g) ? m : detail::mp_gcd(g, m);
    if (g.size() == 1) break;  // monomial content: already a unit
  }
  if (detail::mp_is_zero(g)) return v;
  // the monomial shift common to all components is a unit too: divide it out,
  // keeping only the relative shifts between components
  std::vector<std::vector<int>> shifts(v.size());
  std::vector<int> common;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].is_zero()) continue;
    detail::mp_of_ep(v[i].promoted(dim), &shifts[i]);
    if (common.empty()) {
      common = shifts[i];
    } else {
      for (int t = 0; t < dim; ++t) common[t] = std::min(common[t], shifts[i][t]);
    }
  }
  std::vector<ExpPoly> out(v.size(), ExpPoly(dim));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].is_zero()) continue;
    std::vector<int> shift;
    auto q = detail::mp_exact_div(detail::mp_of_ep(v[i].promoted(dim), &shift), g);
    require(q.has_value(), "component content must divide every component");
    for (int t = 0; t < dim; ++t) shift[t] -= common[t];
    out[i] = detail::ep_of_mp(*q, dim, &shift);
  }
  return out;
}

}  // namespace ck
