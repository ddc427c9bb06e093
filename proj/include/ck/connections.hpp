#pragma once

#include "ck/structures.hpp"

namespace ck {

// ---------------------------------------------------------------------------
// Generalized connections.
// ---------------------------------------------------------------------------

/// Metric generalized connection: a model-determined reference connection
/// (flat frame connection for the exact and quadratic Lie variants, the
/// built-in fiber connection for dissections) plus a lowered correction
/// eta(u, v, w) = <eta_u v, w>, skew in the last two slots so that the
/// connection stays metric by construction.
class GenConnection {
 public:
  explicit GenConnection(const CourantModel& model)
      : m_model(&model),
        m_gamma(model.frame_connection()),
        m_eta(model.rank(), {false, false, false}) {}

  const CourantModel& model() const { return *m_model; }
  const Tensor& eta() const { return m_eta; }

  /// Full coefficient matrix of D_{e_l}: column j holds D_{e_l} e_j.
  const TMat& coeff(int l) const { return m_coeff_cache.empty() ? m_gamma[l] : m_coeff_cache[l]; }

  /// Add a lowered correction (must be skew in the last two slots).
  GenConnection plus_eta(const Tensor& add) const {
    require(add.order() == 3 && add.frame_rank() == m_model->rank() &&
                add.variance() == std::vector<bool>({false, false, false}),
            "connection correction must be a (0,3) tensor on the frame");
    int r = m_model->rank();
    for (int l = 0; l < r; ++l)
      for (int v = 0; v < r; ++v)
        for (int w = v; w < r; ++w)
          require(add.at({l, v, w}) == -add.at({l, w, v}),
                  "connection correction must be skew in the last two slots");
    GenConnection out = *this;
    std::vector<int> idx(3, 0);
    do out.m_eta.at(idx) += add.at(idx);
    while (out.m_eta.next_index(idx));
    out.rebuild_cache();
    return out;
  }

  /// Add per-direction endomorphism corrections D'_{e_l} = D_{e_l} + corr_l
  /// (each corr_l must be skew-adjoint); stored by lowering into eta.
  GenConnection plus_correction(const std::vector<TMat>& corr) const {
    int r = m_model->rank();
    require(static_cast<int>(corr.size()) == r, "one correction matrix per frame direction");
    Tensor add(r, {false, false, false});
    for (int l = 0; l < r; ++l) {
      require(m_model->space().is_skew_endo(corr[l]),
              "connection correction must be skew-adjoint");
      for (int j = 0; j < r; ++j) {
        Section cj(r);
        for (int i = 0; i < r; ++i) cj[i] = corr[l](i, j);
        for (int w = 0; w < r; ++w) {
          Section ew = sec_zero(r);
          ew[w] = TrigPoly::constant(m_model->torus_dim(), 1);
          add.at({l, j, w}) = m_model->pair(cj, ew);
        }
      }
    }
    return plus_eta(add);
  }

  /// D_u v on arbitrary sections (Leibniz in v, tensorial in u).
  Section apply(const Section& u, const Section& v) const {
    int r = m_model->rank();
    require(static_cast<int>(u.size()) == r && static_cast<int>(v.size()) == r,
            "section rank mismatch");
    Section out(r);
    for (int j = 0; j < r; ++j) out[j] = m_model->anchor_apply(u, v[j]);
    for (int l = 0; l < r; ++l) {
      if (u[l].is_zero()) continue;
      const TMat& c = coeff(l);
      for (int j = 0; j < r; ++j) {
        if (v[j].is_zero()) continue;
        for (int i = 0; i < r; ++i)
          if (!c(i, j).is_zero()) out[i] += u[l] * v[j] * c(i, j);
      }
    }
    return out;
  }

  /// (D_{e_l} A) for an endomorphism field A: anchor derivative plus the
  /// commutator with the connection coefficients.
  TMat derive_endo(int l, const TMat& a) const {
    int r = m_model->rank(), m = m_model->torus_dim();
    TMat out(r, r);
    const QMat& anchor = m_model->anchor_matrix();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        TrigPoly d;
        for (int t = 0; t < m; ++t)
          if (anchor(t, l) != 0) d += anchor(t, l) * a(i, j).promoted(m).derive(t);
        out(i, j) = d;
      }
    return out + coeff(l) * a - a * coeff(l);
  }

  /// Whether D A = 0 for an endomorphism field A (adaptedness to A).
  bool preserves(const TMat& a) const {
    for (int l = 0; l < m_model->rank(); ++l)
      if (!derive_endo(l, a).is_zero()) return false;
    return true;
  }

 private:
  void rebuild_cache() {
    int r = m_model->rank();
    m_coeff_cache = m_gamma;
    const QMat& gi = m_model->space().gram_inv();
    for (int l = 0; l < r; ++l)
      for (int j = 0; j < r; ++j)
        for (int w = 0; w < r; ++w) {
          const TrigPoly& e = m_eta.at({l, j, w});
          if (e.is_zero()) continue;
          // eta_{e_l} e_j = sum_w eta(l,j,w) e~_w
          for (int i = 0; i < r; ++i)
            if (gi(w, i) != 0) m_coeff_cache[l](i, j) += gi(w, i) * e;
        }
  }

  const CourantModel* m_model;
  std::vector<TMat> m_gamma;
  Tensor m_eta;
  std::vector<TMat> m_coeff_cache;  // empty until a correction is applied
};

// ---------------------------------------------------------------------------
// Torsion.
// ---------------------------------------------------------------------------

/// T^D(u,v,w) = <D_u v - D_v u - [u,v], w> + <D_w u, v>, assembled on the
/// frame and asserted totally skew.
inline Alt torsion(const CourantModel& model, const GenConnection& d) {
  int r = model.rank();
  std::vector<Section> frame(r);
  for (int i = 0; i < r; ++i) {
    frame[i] = sec_zero(r);
    frame[i][i] = TrigPoly::constant(model.torus_dim(), 1);
  }
  // lowered coefficient tables: low[l](w, j) = <D_{e_l} e_j, e_w>
  std::vector<TMat> low(r);
  for (int l = 0; l < r; ++l) {
    low[l] = TMat(r, r);
    const TMat& c = d.coeff(l);
    const QMat& g = model.space().gram();
    for (int w = 0; w < r; ++w)
      for (int j = 0; j < r; ++j) {
        TrigPoly s;
        for (int i = 0; i < r; ++i)
          if (g(i, w) != 0 && !c(i, j).is_zero()) s += g(i, w) * c(i, j);
        low[l](w, j) = s;
      }
  }
  Tensor t(r, {false, false, false});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      if (i == j) continue;
      Section br = model.dorfman(frame[i], frame[j]);
      for (int w = 0; w < r; ++w) {
        Section ew = sec_zero(r);
        ew[w] = TrigPoly::constant(model.torus_dim(), 1);
        t.at({i, j, w}) =
            low[i](w, j) - low[j](w, i) - model.pair(br, frame[w]) + low[w](j, i);
      }
    }
  if (!is_totally_skew(t)) throw internal_check_failure("torsion is not totally skew-symmetric");
  return skew3(t);
}

/// Lowered (0,3) tensor of a 3-form for use as a connection correction.
inline Tensor tensor_of_alt3(const Alt& a) {
  int r = a.frame_rank();
  require(a.degree() == 3, "expected a 3-form");
  Tensor t(r, {false, false, false});
  std::vector<int> idx(3, 0);
  do t.at(idx) = a.value(idx);
  while (t.next_index(idx));
  return t;
}

/// Cyclic-sum algebraic torsion map on a (0,3) correction tensor.
inline Alt partial_cyclic(const Tensor& eta) {
  require(eta.order() == 3, "algebraic torsion map expects a 3-tensor");
  int r = eta.frame_rank();
  Tensor t(r, {false, false, false});
  for (int u = 0; u < r; ++u)
    for (int v = 0; v < r; ++v)
      for (int w = 0; w < r; ++w)
        t.at({u, v, w}) = eta.at({u, v, w}) + eta.at({w, u, v}) + eta.at({v, w, u});
  if (!is_totally_skew(t))
    throw internal_check_failure("cyclic sum of a connection correction is not a 3-form");
  return skew3(t);
}

/// D + eta with eta(u,v,w) = -1/3 T^D(u,v,w); output has zero torsion.
inline GenConnection make_torsion_free(const CourantModel& model, const GenConnection& d) {
  Alt t = torsion(model, d);
  if (t.is_zero()) return d;
  Tensor eta = tensor_of_alt3(Rat(-1, 3) * t);
  return d.plus_eta(eta);
}

// ---------------------------------------------------------------------------
// Slot contractions and the intrinsic-torsion projectors.
// ---------------------------------------------------------------------------

/// Contract one covariant slot with an endomorphism: out(..., u, ...) =
/// t(..., A u, ...) at position `slot`.
inline Tensor slot_map(const Tensor& t, int slot, const TMat& a) {
  int r = t.frame_rank();
  require(a.rows() == r && a.cols() == r, "slot map shape mismatch");
  Tensor out(r, t.variance());
  std::vector<int> idx(t.order(), 0);
  do {
    TrigPoly s;
    std::vector<int> src = idx;
    for (int j = 0; j < r; ++j) {
      if (a(j, idx[slot]).is_zero()) continue;
      src[slot] = j;
      s += a(j, idx[slot]) * t.at(src);
    }
    out.at(idx) = s;
  } while (t.next_index(idx));
  return out;
}

inline Tensor tensor_add(const Tensor& a, const Tensor& b, const Rat& cb = 1) {
  require(a.frame_rank() == b.frame_rank() && a.variance() == b.variance(),
          "tensor shape mismatch");
  Tensor out = a;
  std::vector<int> idx(a.order(), 0);
  do out.at(idx) += cb * b.at(idx);
  while (out.next_index(idx));
  return out;
}

inline Tensor tensor_scale(const Rat& c, const Tensor& a) {
  Tensor out = a;
  std::vector<int> idx(a.order(), 0);
  do out.at(idx) = c * out.at(idx);
  while (out.next_index(idx));
  return out;
}

/// (Pi_J a)(u,v,w) = 1/4 (a(u,v,w) - a(u,Jv,Jw) - a(Ju,v,Jw) - a(Ju,Jv,w)).
inline Alt pi_j(const TMat& j, const Alt& a) {
  Tensor t = tensor_of_alt3(a);
  Tensor out = t;
  out = tensor_add(out, slot_map(slot_map(t, 1, j), 2, j), -1);
  out = tensor_add(out, slot_map(slot_map(t, 0, j), 2, j), -1);
  out = tensor_add(out, slot_map(slot_map(t, 0, j), 1, j), -1);
  out = tensor_scale(Rat(1, 4), out);
  if (!is_totally_skew(out)) throw internal_check_failure("Pi_J output is not a 3-form");
  return skew3(out);
}

/// (pi~_J a)(u,v,w) = a(u,v,w) + a(u,Jv,Jw): a correction tensor valued in
/// J-invariant 2-forms.
inline Tensor pi_tilde_j(const TMat& j, const Alt& a) {
  Tensor t = tensor_of_alt3(a);
  return tensor_add(t, slot_map(slot_map(t, 1, j), 2, j));
}

/// Hypercomplex projector P = 2/3 sum Pi_{J_i}.
inline Alt p_projector(const TMat& j1, const TMat& j2, const TMat& j3, const Alt& a) {
  Alt out = pi_j(j1, a) + pi_j(j2, a) + pi_j(j3, a);
  return Rat(2, 3) * out;
}

/// (pi~ a)(u,v,w) = a(u,v,w) + sum_i a(u, J_i v, J_i w).
inline Tensor pi_tilde_h(const TMat& j1, const TMat& j2, const TMat& j3, const Alt& a) {
  Tensor t = tensor_of_alt3(a);
  Tensor out = t;
  for (const TMat* j : {&j1, &j2, &j3}) out = tensor_add(out, slot_map(slot_map(t, 1, *j), 2, *j));
  return out;
}

/// Intrinsic torsion of a generalized almost complex structure: Pi_J(T^D)
/// for an adapted connection; equals 1/4 N_J.
inline Alt intrinsic_torsion_j(const CourantModel& model, const TMat& j, const GenConnection& d) {
  require(d.preserves(j), "connection is not adapted to the structure");
  return pi_j(j, torsion(model, d));
}

// ---------------------------------------------------------------------------
// Adapted algebras and generalized first prolongations.
// ---------------------------------------------------------------------------

/// Basis of the constant 2-forms (as skew endomorphisms) commuting with every
/// matrix in `tensors`: the Lie algebra of the structure group.
inline std::vector<QMat> adapted_algebra(const QuadSpace& q, const std::vector<QMat>& tensors) {
  int r = q.rank();
  // unknowns: entries of the endomorphism alpha (r^2); constraints:
  // skew-adjointness and commutation with each tensor
  int rows = r * r * (1 + static_cast<int>(tensors.size()));
  QMat sys(rows, r * r);
  int eq = 0;
  // alpha + g^{-1} alpha^T g = 0
  const QMat &g = q.gram(), &gi = q.gram_inv();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
          // adjoint(alpha)(i,j) = sum_{a,b} gi(i,a) alpha(b,a) g(b,j)
          if (gi(i, a) != 0 && g(b, j) != 0) sys(eq, b * r + a) += gi(i, a) * g(b, j);
        }
      sys(eq, i * r + j) += 1;
      ++eq;
    }
  for (const QMat& t : tensors)
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        for (int k = 0; k < r; ++k) {
          sys(eq, i * r + k) += t(k, j);
          sys(eq, k * r + j) -= t(i, k);
        }
        ++eq;
      }
  QMat ker = kernel(sys);
  std::vector<QMat> out;
  for (int c = 0; c < ker.cols(); ++c) {
    QMat a(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) a(i, j) = ker(i * r + j, c);
    out.push_back(a);
  }
  return out;
}

struct ProlongationResult {
  int dimension = 0;
  /// basis elements: per frame direction, an element of the algebra
  std::vector<std::vector<QMat>> basis;
};

/// Generalized first prolongation of h = span(h_basis) inside so(gram):
/// kernel of the cyclic-sum map on V* (x) h.
inline ProlongationResult prolongation(const std::vector<QMat>& h_basis, const QuadSpace& q) {
  int r = q.rank(), d = static_cast<int>(h_basis.size());
  for (const QMat& a : h_basis)
    require(q.is_skew_endo(a), "prolongation input is not skew-adjoint");
  // lowered generators: lo[a](v, w) = <A_a e_v, e_w>
  std::vector<QMat> lo(d, QMat(r, r));
  for (int a = 0; a < d; ++a)
    for (int v = 0; v < r; ++v)
      for (int w = 0; w < r; ++w)
        for (int i = 0; i < r; ++i)
          if (h_basis[a](i, v) != 0 && q.gram()(i, w) != 0)
            lo[a](v, w) += q.gram()(i, w) * h_basis[a](i, v);
  // unknowns c_{l,a}; equations over triples u < v < w of the cyclic sum
  int neq = r * (r - 1) * (r - 2) / 6;
  QMat sys(std::max(neq, 1), std::max(r * d, 1));
  int eq = 0;
  for (int u = 0; u < r; ++u)
    for (int v = u + 1; v < r; ++v)
      for (int w = v + 1; w < r; ++w) {
        for (int a = 0; a < d; ++a) {
          sys(eq, u * d + a) += lo[a](v, w);
          sys(eq, w * d + a) += lo[a](u, v);
          sys(eq, v * d + a) += lo[a](w, u);
        }
        ++eq;
      }
  ProlongationResult out;
  if (r * d == 0) return out;
  QMat ker = kernel(sys);
  out.dimension = ker.cols();
  for (int c = 0; c < ker.cols(); ++c) {
    std::vector<QMat> elem(r, QMat(r, r));
    for (int l = 0; l < r; ++l)
      for (int a = 0; a < d; ++a)
        if (ker(l * d + a, c) != 0) elem[l] = elem[l] + ker(l * d + a, c) * h_basis[a];
    out.basis.push_back(std::move(elem));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Explicit adapted-connection constructions.
// ---------------------------------------------------------------------------

/// D^(1)_u = D_u - 1/2 J (D_u J): adapted to J.
inline GenConnection d1(const CourantModel& model, const TMat& j, const GenConnection& d) {
  int r = model.rank();
  std::vector<TMat> corr(r, TMat(r, r));
  for (int l = 0; l < r; ++l) corr[l] = Rat(-1, 2) * (j * d.derive_endo(l, j));
  return d.plus_correction(corr);
}

/// eta^{D,J}(u,v,w) = <(D_u J) v, w>.
inline Tensor eta_of(const CourantModel& model, const TMat& j, const GenConnection& d) {
  int r = model.rank();
  Tensor out(r, {false, false, false});
  const QMat& g = model.space().gram();
  for (int l = 0; l < r; ++l) {
    TMat dj = d.derive_endo(l, j);
    for (int v = 0; v < r; ++v)
      for (int w = 0; w < r; ++w) {
        TrigPoly s;
        for (int i = 0; i < r; ++i)
          if (g(i, w) != 0 && !dj(i, v).is_zero()) s += g(i, w) * dj(i, v);
        out.at({l, v, w}) = s;
      }
  }
  return out;
}

/// The Kobayashi-Nomizu-type adapted connection
/// D~_u = D_u - 1/4 {A_u^sym, J} - 1/2 J (D_u J), A_u(v) := (D_v J) u,
/// for torsion-free D; satisfies D~ J = 0 and T^{D~} = 1/4 N_J.
inline GenConnection kn_connection(const CourantModel& model, const TMat& j,
                                   const GenConnection& d) {
  require(torsion(model, d).is_zero(), "construction requires a torsion-free connection");
  int r = model.rank();
  std::vector<TMat> dj(r);
  for (int l = 0; l < r; ++l) dj[l] = d.derive_endo(l, j);
  std::vector<TMat> corr(r, TMat(r, r));
  for (int u = 0; u < r; ++u) {
    // A_u(e_v) = (D_{e_v} J) e_u
    TMat au(r, r);
    for (int v = 0; v < r; ++v)
      for (int i = 0; i < r; ++i) au(i, v) = dj[v](i, u);
    TMat asym = Rat(1, 2) * (au + model.space().adjoint(au));
    corr[u] = Rat(-1, 4) * (asym * j + j * asym) + Rat(-1, 2) * (j * dj[u]);
  }
  return d.plus_correction(corr);
}

/// Hypercomplex adapted connection: from D with D J1 = 0, pass to
/// D^(1) = D - 1/2 J2 D J2 and correct by -1/6 pi~(T^{D^(1)}).
inline GenConnection hypercomplex_connection(const CourantModel& model, const TMat& j1,
                                             const TMat& j2, const TMat& j3,
                                             const GenConnection& d) {
  require(d.preserves(j1), "construction requires a connection adapted to the first structure");
  GenConnection d1c = d1(model, j2, d);
  Tensor eta = tensor_scale(Rat(-1, 6), pi_tilde_h(j1, j2, j3, torsion(model, d1c)));
  return d1c.plus_eta(eta);
}

/// Torsion-free connection preserving a generalized metric: average the
/// reference with its G-conjugate (adapted, metric), then solve the constant
/// linear system for an adapted correction cancelling the torsion.
inline GenConnection levi_civita(const CourantModel& model, const TMat& g) {
  {
    auto issues = validate_gen_metric(model, g);
    if (!issues.empty()) throw error("invalid generalized metric: " + issues[0]);
  }
  int r = model.rank(), m = model.torus_dim();
  GenConnection ref(model);
  // G-conjugate coefficients: G (D_l G) + G C_l G; averaging with C_l gives
  // an adapted metric connection
  std::vector<TMat> corr(r, TMat(r, r));
  for (int l = 0; l < r; ++l) {
    TMat cl = ref.coeff(l);
    TMat conj = g * ref.derive_endo(l, g) + g * cl * g;
    corr[l] = Rat(1, 2) * (conj - cl);
  }
  GenConnection d0 = ref.plus_correction(corr);
  Alt t0 = torsion(model, d0);
  if (t0.is_zero()) return d0;

  // adapted algebra of G (constant G only; a non-constant metric would need a
  // function-ring solve)
  QMat gq(r, r);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k) {
      require(g(i, k).is_constant(), "torsion-free solver requires a constant metric");
      gq(i, k) = g(i, k).constant_value();
    }
  std::vector<QMat> alg = adapted_algebra(model.space(), {gq});
  int d = static_cast<int>(alg.size());
  // lowered generators
  std::vector<QMat> lo(d, QMat(r, r));
  for (int a = 0; a < d; ++a)
    for (int v = 0; v < r; ++v)
      for (int w = 0; w < r; ++w)
        for (int i = 0; i < r; ++i)
          if (alg[a](i, v) != 0 && model.space().gram()(i, w) != 0)
            lo[a](v, w) += model.space().gram()(i, w) * alg[a](i, v);
  // solve cyclic-sum(eta) = -T0 for eta = sum c_{l,a} e_l* (x) alpha_a
  int neq = r * (r - 1) * (r - 2) / 6;
  QMat sys(neq, r * d);
  std::vector<TrigPoly> rhs(neq);
  int eq = 0;
  for (int u = 0; u < r; ++u)
    for (int v = u + 1; v < r; ++v)
      for (int w = v + 1; w < r; ++w) {
        for (int a = 0; a < d; ++a) {
          sys(eq, u * d + a) += lo[a](v, w);
          sys(eq, w * d + a) += lo[a](u, v);
          sys(eq, v * d + a) += lo[a](w, u);
        }
        rhs[eq] = Rat(-1) * t0.value({u, v, w});
        ++eq;
      }
  auto sol = solve_const_system(sys, rhs, m);
  require(sol.has_value(), "no adapted correction cancels the torsion");
  Tensor eta(r, {false, false, false});
  for (int l = 0; l < r; ++l)
    for (int a = 0; a < d; ++a) {
      const TrigPoly& c = (*sol)[l * d + a];
      if (c.is_zero()) continue;
      for (int v = 0; v < r; ++v)
        for (int w = 0; w < r; ++w)
          if (lo[a](v, w) != 0) eta.at({l, v, w}) += lo[a](v, w) * c;
    }
  return d0.plus_eta(eta);
}

/// Torsion-free connection adapted to a generalized Kaehler pair: the
/// Kobayashi-Nomizu construction applied to a Levi-Civita connection of G.
inline GenConnection gk_connection(const CourantModel& model, const TMat& g, const TMat& j,
                                   const GenConnection& d_lc) {
  GkCheckResult gk = gk_bracket_check(model, g, j);
  require(gk.value() && gk.consistent(), "pair is not generalized Kaehler");
  require(torsion(model, d_lc).is_zero() && d_lc.preserves(g),
          "construction requires a Levi-Civita connection of G");
  return kn_connection(model, j, d_lc);
}

/// Torsion-free connection adapted to a generalized hyper-Kaehler set:
/// the hypercomplex construction applied to a Levi-Civita connection of G
/// with D J1 = 0.
inline GenConnection hk_connection(const CourantModel& model, const TMat& g, const TMat& j1,
                                   const TMat& j2, const TMat& j3, const GenConnection& d) {
  require(torsion(model, d).is_zero() && d.preserves(g) && d.preserves(j1),
          "construction requires a Levi-Civita connection of G adapted to the first structure");
  return hypercomplex_connection(model, j1, j2, j3, d);
}

// ---------------------------------------------------------------------------
// Born geometry (classical connections on the tangent bundle of a torus).
// ---------------------------------------------------------------------------

/// Classical vector field on T^n: components in the coordinate frame.
using VecField = std::vector<TrigPoly>;

/// Born data on T^n: neutral metric eta with a user-supplied exact inverse,
/// positive-definite metric g, and the involution K.
struct BornData {
  int n = 0;  ///< tangent dimension = torus dimension
  TMat eta, eta_inv, g, k;

  TMat j() const { return eta_inv * g; }

  /// Pointwise eta-adjoint of an endomorphism field.
  TMat eta_adjoint(const TMat& a) const { return eta_inv * a.transposed() * eta; }
};

/// Symmetric positive definiteness over the rationals (symmetric Gaussian
/// elimination: all pivots positive).
inline bool is_positive_definite(QMat a) {
  int n = a.rows();
  if (a.cols() != n || a != a.transposed()) return false;
  for (int kpiv = 0; kpiv < n; ++kpiv) {
    if (a(kpiv, kpiv) <= 0) return false;
    for (int i = kpiv + 1; i < n; ++i) {
      Rat f = a(i, kpiv) / a(kpiv, kpiv);
      for (int jcol = kpiv; jcol < n; ++jcol) a(i, jcol) -= f * a(kpiv, jcol);
      for (int irow = kpiv; irow < n; ++irow) a(irow, i) = a(i, irow);
    }
  }
  return true;
}

/// Compatibility conditions for Born data; empty result means valid.
inline std::vector<std::string> validate_born(const BornData& d) {
  std::vector<std::string> issues;
  int n = d.n;
  auto shape_ok = [&](const TMat& a) { return a.rows() == n && a.cols() == n; };
  if (!shape_ok(d.eta) || !shape_ok(d.eta_inv) || !shape_ok(d.g) || !shape_ok(d.k)) {
    issues.push_back("matrix shape mismatch");
    return issues;
  }
  if (d.eta * d.eta_inv != TMat::identity(n) || d.eta_inv * d.eta != TMat::identity(n))
    issues.push_back("supplied inverse fails eta*eta_inv = Id");
  if (d.eta != d.eta.transposed()) issues.push_back("eta is not symmetric");
  if (d.g != d.g.transposed()) issues.push_back("g is not symmetric");
  if (!(d.eta * d.k + d.k.transposed() * d.eta).is_zero())
    issues.push_back("K is not eta-skew");
  if (!(d.k * d.k - TMat::identity(n)).is_zero()) issues.push_back("K is not an involution");
  TMat jm = d.j();
  if (!(jm * jm - TMat::identity(n)).is_zero())
    issues.push_back("J = eta^{-1} g is not an involution");
  if (!(jm * d.k + d.k * jm).is_zero()) issues.push_back("J does not anti-commute with K");
  // eta must be constant of neutral signature
  bool econst = true;
  QMat eq(n, n);
  for (int i = 0; i < n && econst; ++i)
    for (int jcol = 0; jcol < n; ++jcol) {
      if (!d.eta(i, jcol).is_constant()) {
        econst = false;
        break;
      }
      eq(i, jcol) = d.eta(i, jcol).constant_value();
    }
  if (!econst) {
    issues.push_back("eta must be constant");
  } else {
    auto [pos, neg] = QuadSpace(eq).signature();
    if (pos != neg) issues.push_back("eta is not of neutral signature");
  }
  // positive definiteness of g, sampled exactly over the quarter grid
  std::vector<int> q(n, 0);
  while (true) {
    QMat gq(n, n);
    bool real_ok = true;
    for (int i = 0; i < n && real_ok; ++i)
      for (int jcol = 0; jcol < n; ++jcol) {
        GRat v = ExpPoly::from_trig(d.g(i, jcol)).promoted(n).eval_quarter(q);
        if (v.im != 0) {
          real_ok = false;
          break;
        }
        gq(i, jcol) = v.re;
      }
    if (!real_ok || !is_positive_definite(gq)) {
      issues.push_back("g is not positive definite");
      break;
    }
    int s = n - 1;
    for (; s >= 0; --s) {
      if (++q[s] < 4) break;
      q[s] = 0;
    }
    if (s < 0) break;
  }
  return issues;
}

/// Levi-Civita connection of eta in the coordinate frame (Koszul formula with
/// the supplied inverse; coordinate brackets vanish).
inline std::vector<TMat> koszul_connection(const BornData& d) {
  int n = d.n;
  std::vector<TMat> out(n, TMat(n, n));
  auto de = [&](int t, int i, int jc) { return d.eta(i, jc).promoted(n).derive(t); };
  for (int i = 0; i < n; ++i)
    for (int jc = 0; jc < n; ++jc)
      for (int l = 0; l < n; ++l) {
        TrigPoly s;
        for (int kk = 0; kk < n; ++kk) {
          TrigPoly low = de(i, jc, kk) + de(jc, i, kk) - de(kk, i, jc);
          if (!low.is_zero()) s += d.eta_inv(l, kk) * low;
        }
        out[i](l, jc) = Rat(1, 2) * s;
      }
  return out;
}

/// Coefficient matrices of nabla^c = nabla^eta + 1/2 K (nabla^eta K).
inline std::vector<TMat> canonical_para_connection(const BornData& d) {
  std::vector<TMat> gam = koszul_connection(d);
  int n = d.n;
  std::vector<TMat> out(n);
  for (int i = 0; i < n; ++i) {
    TMat dk(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dk(a, b) = d.k(a, b).promoted(n).derive(i);
    dk = dk + gam[i] * d.k - d.k * gam[i];
    out[i] = gam[i] + Rat(1, 2) * (d.k * dk);
  }
  return out;
}

/// Covariant derivative of a field in the direction of a field.
inline VecField conn_apply(const std::vector<TMat>& coeff, const VecField& x, const VecField& y) {
  int n = static_cast<int>(coeff.size());
  VecField out(n);
  for (int l = 0; l < n; ++l) {
    TrigPoly s;
    for (int i = 0; i < n; ++i) {
      if (x[i].is_zero()) continue;
      TrigPoly dir = y[l].promoted(n).derive(i);
      for (int jc = 0; jc < n; ++jc)
        if (!coeff[i](l, jc).is_zero() && !y[jc].is_zero()) dir += coeff[i](l, jc) * y[jc];
      s += x[i] * dir;
    }
    out[l] = s;
  }
  return out;
}

/// Endomorphism field v -> nabla_v X of a fixed field X.
inline TMat conn_endo_of(const std::vector<TMat>& coeff, const VecField& x) {
  int n = static_cast<int>(coeff.size());
  TMat out(n, n);
  for (int i = 0; i < n; ++i) {
    VecField ei(n, TrigPoly(0));
    ei[i] = TrigPoly::constant(n, 1);
    VecField col = conn_apply(coeff, ei, x);
    for (int l = 0; l < n; ++l) out(l, i) = col[l];
  }
  return out;
}

/// Canonical D-bracket [X,Y]^c = nabla^c_X Y - nabla^c_Y X + (nabla^c X)* Y.
inline VecField canonical_d_bracket(const BornData& d, const std::vector<TMat>& cc,
                                    const VecField& x, const VecField& y) {
  VecField a = conn_apply(cc, x, y), b = conn_apply(cc, y, x);
  VecField adj = d.eta_adjoint(conn_endo_of(cc, x)).apply(y);
  int n = d.n;
  VecField out(n);
  for (int l = 0; l < n; ++l) out[l] = a[l] - b[l] + adj[l];
  return out;
}

/// The Born connection in the coordinate frame:
/// nabla^B_X Y = [X_-,Y_+]^c_+ + [X_+,Y_-]^c_- + (K[X_+,KY_+]^c)_+ + (K[X_-,KY_-]^c)_-.
inline std::vector<TMat> born_connection(const BornData& d) {
  {
    auto issues = validate_born(d);
    if (!issues.empty()) throw error("invalid Born data: " + issues[0]);
  }
  int n = d.n;
  TMat jm = d.j();
  TMat pp = Rat(1, 2) * (TMat::identity(n) + jm), pm = Rat(1, 2) * (TMat::identity(n) - jm);
  std::vector<TMat> cc = canonical_para_connection(d);
  std::vector<TMat> out(n, TMat(n, n));
  for (int i = 0; i < n; ++i) {
    VecField ei(n, TrigPoly(0));
    ei[i] = TrigPoly::constant(n, 1);
    for (int jc = 0; jc < n; ++jc) {
      VecField ej(n, TrigPoly(0));
      ej[jc] = TrigPoly::constant(n, 1);
      VecField t1 = pp.apply(canonical_d_bracket(d, cc, pm.apply(ei), pp.apply(ej)));
      VecField t2 = pm.apply(canonical_d_bracket(d, cc, pp.apply(ei), pm.apply(ej)));
      VecField t3 =
          pp.apply(d.k.apply(canonical_d_bracket(d, cc, pp.apply(ei), d.k.apply(pp.apply(ej)))));
      VecField t4 =
          pm.apply(d.k.apply(canonical_d_bracket(d, cc, pm.apply(ei), d.k.apply(pm.apply(ej)))));
      for (int l = 0; l < n; ++l) out[i](l, jc) = t1[l] + t2[l] + t3[l] + t4[l];
    }
  }
  return out;
}

/// Generalized torsion of a classical connection with respect to the
/// canonical D-bracket:
/// T(X,Y,Z) = eta(nabla_X Y - nabla_Y X - [X,Y]^c + (nabla X)* Y, Z).
inline Alt born_generalized_torsion(const BornData& d, const std::vector<TMat>& coeff) {
  int n = d.n;
  std::vector<TMat> cc = canonical_para_connection(d);
  Tensor t(n, {false, false, false});
  std::vector<VecField> frame(n, VecField(n, TrigPoly(0)));
  for (int i = 0; i < n; ++i) frame[i][i] = TrigPoly::constant(n, 1);
  for (int i = 0; i < n; ++i)
    for (int jc = 0; jc < n; ++jc) {
      if (i == jc) continue;
      VecField a = conn_apply(coeff, frame[i], frame[jc]);
      VecField b = conn_apply(coeff, frame[jc], frame[i]);
      VecField br = canonical_d_bracket(d, cc, frame[i], frame[jc]);
      VecField adj = d.eta_adjoint(conn_endo_of(coeff, frame[i])).apply(frame[jc]);
      VecField v(n);
      for (int l = 0; l < n; ++l) v[l] = a[l] - b[l] - br[l] + adj[l];
      for (int w = 0; w < n; ++w) {
        TrigPoly s;
        for (int l = 0; l < n; ++l)
          if (!d.eta(w, l).is_zero() && !v[l].is_zero()) s += d.eta(w, l) * v[l];
        t.at({i, jc, w}) = s;
      }
    }
  if (!is_totally_skew(t))
    throw internal_check_failure("generalized torsion is not totally skew-symmetric");
  return skew3(t);
}

/// Whether a classical connection preserves eta, I = KJ, J and K.
inline bool born_compatible(const BornData& d, const std::vector<TMat>& coeff) {
  int n = d.n;
  TMat jm = d.j();
  TMat im = d.k * jm;
  for (int i = 0; i < n; ++i) {
    TMat deta(n, n), dk(n, n), dj(n, n), di(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        deta(a, b) = d.eta(a, b).promoted(n).derive(i);
        dk(a, b) = d.k(a, b).promoted(n).derive(i);
        dj(a, b) = jm(a, b).promoted(n).derive(i);
        di(a, b) = im(a, b).promoted(n).derive(i);
      }
    if (!(deta - coeff[i].transposed() * d.eta - d.eta * coeff[i]).is_zero()) return false;
    if (!(dk + coeff[i] * d.k - d.k * coeff[i]).is_zero()) return false;
    if (!(dj + coeff[i] * jm - jm * coeff[i]).is_zero()) return false;
    if (!(di + coeff[i] * im - im * coeff[i]).is_zero()) return false;
  }
  return true;
}

}  // namespace ck
