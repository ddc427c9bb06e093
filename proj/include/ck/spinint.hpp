#pragma once

#include <cstdlib>

#include "ck/dirac.hpp"
#include "ck/structures.hpp"

namespace ck {

// ---------------------------------------------------------------------------
// Degree bookkeeping and bounded-degree linear feasibility over the function
// ring.  All "≡"-conditions below are decided as exact linear systems in the
// Fourier coefficients of the unknown functions, with a total-degree bound.
// ---------------------------------------------------------------------------

/// Total degree max_k Σ_t |k_t| over the harmonics of f.
inline int ep_degree(const ExpPoly& f) {
  int d = 0;
  for (const auto& [k, c] : f.terms()) {
    int s = 0;
    for (int x : k) s += std::abs(x);
    d = std::max(d, s);
  }
  return d;
}

inline int tp_degree(const TrigPoly& f) { return ep_degree(ExpPoly::from_trig(f)); }

inline int spinor_degree(const Spinor& s) {
  int d = 0;
  for (const auto& c : s) d = std::max(d, ep_degree(c));
  return d;
}

/// Degree of the structure functions of a model: the three-form and the
/// reference frame connection.
inline int model_degree(const CourantModel& model) {
  int d = 0;
  for (const auto& [mask, c] : model.three_form().components()) d = std::max(d, tp_degree(c));
  for (const TMat& cm : model.frame_connection())
    for (int i = 0; i < cm.rows(); ++i)
      for (int j = 0; j < cm.cols(); ++j) d = std::max(d, tp_degree(cm(i, j)));
  return d;
}

/// Extra slack added to every degree bound (environment override
/// COURANT_KIT_DEGREE_SLACK, default 2).
inline int degree_slack() {
  if (const char* s = std::getenv("COURANT_KIT_DEGREE_SLACK")) {
    int v = std::atoi(s);
    if (v >= 0) return v;
  }
  return 2;
}

/// Dense Gaussian elimination over ℚ(i): any solution of A x = b, or nullopt.
inline std::optional<std::vector<GRat>> grat_solve(std::vector<std::vector<GRat>> a,
                                                   std::vector<GRat> b) {
  int rows = static_cast<int>(a.size());
  int cols = rows ? static_cast<int>(a[0].size()) : 0;
  std::vector<int> pivot_col;
  int row = 0;
  for (int col = 0; col < cols && row < rows; ++col) {
    int p = -1;
    for (int i = row; i < rows; ++i)
      if (!a[i][col].is_zero()) {
        p = i;
        break;
      }
    if (p < 0) continue;
    std::swap(a[p], a[row]);
    std::swap(b[p], b[row]);
    GRat inv = GRat(1) / a[row][col];
    for (int j = col; j < cols; ++j) a[row][j] = inv * a[row][j];
    b[row] = inv * b[row];
    for (int i = 0; i < rows; ++i) {
      if (i == row || a[i][col].is_zero()) continue;
      GRat f = a[i][col];
      for (int j = col; j < cols; ++j) a[i][j] = a[i][j] - f * a[row][j];
      b[i] = b[i] - f * b[row];
    }
    pivot_col.push_back(col);
    ++row;
  }
  for (int i = row; i < rows; ++i)
    if (!b[i].is_zero()) return std::nullopt;
  std::vector<GRat> x(cols);
  for (int r2 = 0; r2 < row; ++r2) x[pivot_col[r2]] = b[r2];
  return x;
}

/// All harmonic keys k ∈ ℤ^m with Σ|k_t| ≤ bound.
inline std::vector<std::vector<int>> harmonic_keys(int m, int bound) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(m, 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == m) {
      out.push_back(cur);
      return;
    }
    for (int v = -left; v <= left; ++v) {
      cur[pos] = v;
      self(self, pos + 1, left - std::abs(v));
    }
    cur[pos] = 0;
  };
  rec(rec, 0, bound);
  return out;
}

/// Solve Σ_a f_a · gens[a] = rhs for functions f_a of total degree ≤ bound.
inline std::optional<std::vector<ExpPoly>> bounded_combination(const std::vector<Spinor>& gens,
                                                               const Spinor& rhs, int tdim,
                                                               int bound) {
  int dim = static_cast<int>(rhs.size());
  std::vector<std::vector<int>> keys = harmonic_keys(tdim, bound);
  int na = static_cast<int>(gens.size()), nk = static_cast<int>(keys.size());
  // equations indexed by (spinor component, result harmonic)
  std::map<std::pair<int, std::vector<int>>, int> eq_index;
  auto eq_of = [&](int b, const std::vector<int>& h) {
    auto it = eq_index.find({b, h});
    if (it == eq_index.end()) it = eq_index.emplace(std::make_pair(b, h), eq_index.size()).first;
    return it->second;
  };
  struct Entry {
    int eq, var;
    GRat c;
  };
  std::vector<Entry> entries;
  for (int a = 0; a < na; ++a) {
    require(static_cast<int>(gens[a].size()) == dim, "generator spinor dimension mismatch");
    for (int b = 0; b < dim; ++b) {
      const ExpPoly g = gens[a][b].promoted(tdim);
      for (const auto& [kg, cg] : g.terms())
        for (int k = 0; k < nk; ++k) {
          std::vector<int> h = keys[k];
          for (int t = 0; t < tdim; ++t) h[t] += kg[t];
          entries.push_back({eq_of(b, h), a * nk + k, cg});
        }
    }
  }
  std::vector<GRat> bvec;
  for (int b = 0; b < dim; ++b) {
    const ExpPoly r = rhs[b].promoted(tdim);
    for (const auto& [k, c] : r.terms()) {
      int e = eq_of(b, k);
      if (static_cast<int>(bvec.size()) <= e) bvec.resize(eq_index.size());
      bvec[e] = c;
    }
  }
  bvec.resize(eq_index.size());
  std::vector<std::vector<GRat>> mat(eq_index.size(), std::vector<GRat>(na * nk));
  for (const auto& e : entries) mat[e.eq][e.var] = mat[e.eq][e.var] + e.c;
  auto sol = grat_solve(std::move(mat), std::move(bvec));
  if (!sol) return std::nullopt;
  std::vector<ExpPoly> out(na, ExpPoly(tdim));
  for (int a = 0; a < na; ++a)
    for (int k = 0; k < nk; ++k)
      if (!(*sol)[a * nk + k].is_zero()) out[a] += ExpPoly::harmonic(keys[k], (*sol)[a * nk + k]);
  return out;
}

// ---------------------------------------------------------------------------
// Projective closedness and the Dirac-structure equivalence.
// ---------------------------------------------------------------------------

struct ProjClosedResult {
  bool closed = false;
  std::vector<ExpPoly> witness;  // frame components of v with op(η) = γ_v η
  int bound = 0;
  std::string note;
};

/// Decide whether op(η) = γ_v η for some v ∈ Γ(E_ℂ) with coefficients of
/// total degree ≤ deg(η) + deg(model) + slack.
inline ProjClosedResult projectively_closed(const CourantModel& model, const SpinorModule& s,
                                            const DiffOp& op, const Spinor& eta,
                                            int slack = degree_slack()) {
  require(is_pure(s, eta), "spinor is not pure");
  int r = model.rank(), m = model.torus_dim();
  ProjClosedResult out;
  out.bound = spinor_degree(eta) + model_degree(model) + slack;
  Spinor rhs = op.apply(eta);
  std::vector<Spinor> gens(r);
  for (int i = 0; i < r; ++i) {
    std::vector<ExpPoly> ei(r);
    ei[i] = ring_one<ExpPoly>();
    gens[i] = s.gamma_section(ei).apply(eta);
  }
  auto sol = bounded_combination(gens, rhs, m, out.bound);
  if (sol) {
    out.closed = true;
    out.witness = *sol;
  } else {
    out.note = "no solution within degree " + std::to_string(out.bound);
  }
  return out;
}

struct DiracEquivReport {
  bool bracket_closed = true;
  bool spinor_closed = false;
  std::string witness;
  ProjClosedResult proj;
  bool value() const { return bracket_closed; }
};

/// Bracket-closure of an almost Dirac structure versus projective closedness
/// of its pure spinor line; the two verdicts are asserted to agree.  Closure
/// on a basis extends to function multiples by the Leibniz identity, so the
/// basis test is exhaustive.
inline DiracEquivReport dirac_structure_equiv(const CourantModel& model, const SpinorModule& s,
                                              const DiffOp& op,
                                              const std::vector<std::vector<ExpPoly>>& basis) {
  int r = model.rank();
  int n = s.n();
  require(static_cast<int>(basis.size()) == n, "almost Dirac structure must have rank n");
  require(is_isotropic(model.space(), basis), "bundle is not isotropic");
  EMat bm(r, n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < r; ++i) bm(i, a) = basis[a][i];
  require(generic_rank(bm) == n, "bundle basis is degenerate");
  detail::check_constant_rank(bm, n, "dirac_structure_equiv");

  DiracEquivReport rep;
  for (int a = 0; a < n && rep.bracket_closed; ++a)
    for (int b = 0; b < n && rep.bracket_closed; ++b) {
      if (a == b) continue;
      std::vector<ExpPoly> br = dorfman_c(model, basis[a], basis[b]);
      EMat aug(r, n + 1);
      for (int i = 0; i < r; ++i) {
        for (int c = 0; c < n; ++c) aug(i, c) = basis[c][i];
        aug(i, n) = br[i];
      }
      bool member = generic_rank(aug) == n;
      if (member) {
        try {
          detail::check_constant_rank(aug, n, "bracket membership");
        } catch (const error&) {
          member = false;
        }
      }
      if (!member) {
        rep.bracket_closed = false;
        rep.witness = "bracket of basis sections " + std::to_string(a + 1) + "," +
                      std::to_string(b + 1) + " leaves the bundle";
      }
    }

  Spinor eta = spinor_of_isotropic(s, basis);
  rep.proj = projectively_closed(model, s, op, eta);
  rep.spinor_closed = rep.proj.closed;
  if (rep.spinor_closed != rep.bracket_closed)
    throw error(std::string("Dirac-structure criteria disagree (") +
                (rep.bracket_closed ? "bracket closed, " : "bracket not closed, ") +
                (rep.spinor_closed ? "spinor closed" : rep.proj.note) +
                "): degree bound too small or internal inconsistency");
  return rep;
}

// ---------------------------------------------------------------------------
// Metric splitting E = E₊ ⊕ E₋ and the split spinor modules.
// ---------------------------------------------------------------------------

namespace detail {

/// A nonzero rational c with Σ c_i² d_i = 0, if a small one exists: first
/// opposite-sign pairs with square ratio, then a bounded integer box search
/// with partial-sum pruning.
inline std::optional<std::vector<Rat>> isotropic_combo(const std::vector<Rat>& d) {
  int k = static_cast<int>(d.size());
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      if ((d[i] > 0) == (d[j] > 0)) continue;
      auto t = rat_sqrt(-d[i] / d[j]);
      if (!t) continue;
      std::vector<Rat> c(k, 0);
      c[i] = 1;
      c[j] = *t;
      return c;
    }
  const int box = k <= 6 ? 4 : 3;
  // per-coordinate attainable contribution bounds, for pruning
  std::vector<Rat> lo(k, 0), hi(k, 0);
  for (int i = 0; i < k; ++i) {
    Rat ext = Rat(box) * Rat(box) * d[i];
    lo[i] = d[i] < 0 ? ext : 0;
    hi[i] = d[i] > 0 ? ext : 0;
  }
  std::vector<Rat> tail_lo(k + 1, 0), tail_hi(k + 1, 0);
  for (int i = k - 1; i >= 0; --i) {
    tail_lo[i] = tail_lo[i + 1] + lo[i];
    tail_hi[i] = tail_hi[i + 1] + hi[i];
  }
  std::vector<int> c(k, 0);
  std::optional<std::vector<Rat>> best;
  // the first nonzero coefficient can be taken positive (overall sign symmetry)
  std::function<void(int, Rat, bool)> rec2 = [&](int i, Rat sum, bool nonzero) {
    if (best) return;
    if (i == k) {
      if (nonzero && sum == 0) {
        std::vector<Rat> out(k);
        for (int t = 0; t < k; ++t) out[t] = c[t];
        best = out;
      }
      return;
    }
    if (sum + tail_hi[i] < 0 || sum + tail_lo[i] > 0) return;
    int from = nonzero ? -box : 0;  // first nonzero coefficient positive
    for (int v = from; v <= box && !best; ++v) {
      c[i] = v;
      rec2(i + 1, sum + Rat(v) * Rat(v) * d[i], nonzero || v != 0);
    }
    c[i] = 0;
  };
  rec2(0, 0, false);
  return best;
}

}  // namespace detail

/// A Lagrangian dual pair (w_a, u_a) with ⟨w_a, u_b⟩ = δ_ab for a neutral
/// scalar product, by peeling off rational hyperbolic planes.
inline std::pair<std::vector<std::vector<Rat>>, std::vector<std::vector<Rat>>> isotropic_splitting(
    const QuadSpace& q) {
  auto [pos, neg] = q.signature();
  require(pos == neg, "scalar product is not neutral");
  int r = q.rank();
  std::vector<std::vector<Rat>> cur;
  for (int i = 0; i < r; ++i) {
    std::vector<Rat> e(r, 0);
    e[i] = 1;
    cur.push_back(std::move(e));
  }
  std::vector<std::vector<Rat>> w, u;
  while (!cur.empty()) {
    // diagonalize the current complement; a null vector showing up in the
    // Gram-Schmidt sweep is itself the sought isotropic vector
    std::vector<std::vector<Rat>> ortho;
    std::optional<std::vector<Rat>> v;
    for (auto cand : cur) {
      for (const auto& o : ortho) {
        Rat pr = q.pair(cand, o), nr = q.pair(o, o);
        for (int i = 0; i < r; ++i) cand[i] -= pr / nr * o[i];
      }
      bool zero = true;
      for (const Rat& x : cand) zero = zero && x == 0;
      if (zero) continue;
      if (q.pair(cand, cand) == 0) {
        v = cand;
        break;
      }
      ortho.push_back(std::move(cand));
    }
    if (!v) {
      std::vector<Rat> d(ortho.size());
      for (std::size_t i = 0; i < ortho.size(); ++i) d[i] = q.pair(ortho[i], ortho[i]);
      auto combo = detail::isotropic_combo(d);
      require(combo.has_value(),
              "no rational isotropic splitting found for the neutral scalar product");
      std::vector<Rat> vv(r, 0);
      for (std::size_t i = 0; i < ortho.size(); ++i)
        for (int t = 0; t < r; ++t) vv[t] += (*combo)[i] * ortho[i][t];
      v = vv;
    }
    // hyperbolic partner: u with q(u) = 0 and ⟨v,u⟩ = 1
    std::vector<Rat> partner;
    for (const auto& b : cur) {
      if (q.pair(*v, b) != 0) {
        partner = b;
        break;
      }
    }
    require(!partner.empty(), "restricted scalar product is degenerate");
    Rat p = q.pair(*v, partner), n0 = q.pair(partner, partner);
    std::vector<Rat> uu(r);
    for (int i = 0; i < r; ++i) uu[i] = partner[i] / p - n0 / (2 * p * p) * (*v)[i];
    // reduce the complement to the orthogonal of the hyperbolic plane
    std::vector<std::vector<Rat>> next;
    QMat acc(r, 0);
    for (const auto& b : cur) {
      std::vector<Rat> bb(r);
      Rat cu = q.pair(b, uu), cv = q.pair(b, *v);
      for (int i = 0; i < r; ++i) bb[i] = b[i] - cu * (*v)[i] - cv * uu[i];
      QMat trial(r, acc.cols() + 1);
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < acc.cols(); ++j) trial(i, j) = acc(i, j);
        trial(i, acc.cols()) = bb[i];
      }
      if (rank(trial) > acc.cols()) {
        acc = std::move(trial);
        next.push_back(std::move(bb));
      }
    }
    require(static_cast<int>(next.size()) == static_cast<int>(cur.size()) - 2,
            "hyperbolic reduction did not drop the rank by two");
    w.push_back(*v);
    u.push_back(std::move(uu));
    cur = std::move(next);
  }
  return {w, u};
}

/// The metric splitting of a model by a constant generalized metric, with
/// spinor modules for Cl(E₊) and Cl(E₋).
struct MetricSplit {
  const CourantModel* model = nullptr;
  std::vector<std::vector<Rat>> basis_plus, basis_minus;  // full-frame coords
  QuadSpace space_plus, space_minus;                      // restricted grams
  QMat coords_plus, coords_minus;  // coordinate extraction: full → E± coords
  std::optional<SpinorModule> module_plus, module_minus;

  int n_plus() const { return static_cast<int>(basis_plus.size()); }
  int n_minus() const { return static_cast<int>(basis_minus.size()); }
  const SpinorModule& plus() const { return *module_plus; }
  const SpinorModule& minus() const { return *module_minus; }

  /// E±-coordinates of a constant full-frame vector.
  std::vector<Rat> project(const std::vector<Rat>& v, bool plus_part) const {
    const QMat& x = plus_part ? coords_plus : coords_minus;
    std::vector<Rat> out(x.rows());
    for (int a = 0; a < x.rows(); ++a)
      for (int i = 0; i < x.cols(); ++i) out[a] += x(a, i) * v[i];
    return out;
  }
  std::vector<ExpPoly> project_c(const std::vector<ExpPoly>& v, bool plus_part) const {
    const QMat& x = plus_part ? coords_plus : coords_minus;
    std::vector<ExpPoly> out(x.rows());
    for (int a = 0; a < x.rows(); ++a)
      for (int i = 0; i < x.cols(); ++i)
        if (x(a, i) != 0) out[a] += ExpPoly::constant(v[i].torus_dim(), GRat(x(a, i))) * v[i];
    return out;
  }
};

/// Build the splitting for a constant generalized metric G (as an involution
/// with G-symmetric pairing); requires ⟨·,·⟩|_{E±} both neutral — the
/// rank-multiple-of-eight definite branch is recognized and rejected.
inline MetricSplit make_metric_split(const CourantModel& model, const TMat& g) {
  int r = model.rank();
  require(g.rows() == r && g.cols() == r, "generalized metric shape mismatch");
  QMat gm(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      require(g(i, j).is_constant(), "metric splitting requires a constant generalized metric");
      gm(i, j) = g(i, j).constant_value();
    }
  {
    auto issues = validate_gen_metric(model, g);
    if (!issues.empty()) throw error("invalid generalized metric: " + issues[0]);
  }
  MetricSplit out;
  out.model = &model;
  auto eigenbasis = [&](int sign) {
    QMat a = gm;
    for (int i = 0; i < r; ++i) a(i, i) -= Rat(sign);
    QMat k = kernel(a);
    std::vector<std::vector<Rat>> basis;
    for (int c = 0; c < k.cols(); ++c) {
      std::vector<Rat> v(r);
      for (int i = 0; i < r; ++i) v[i] = k(i, c);
      basis.push_back(std::move(v));
    }
    return basis;
  };
  out.basis_plus = eigenbasis(+1);
  out.basis_minus = eigenbasis(-1);
  require(static_cast<int>(out.basis_plus.size() + out.basis_minus.size()) == r,
          "generalized metric is not an involution");

  auto restricted = [&](const std::vector<std::vector<Rat>>& basis) {
    int k = static_cast<int>(basis.size());
    QMat gr(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) gr(a, b) = model.space().pair(basis[a], basis[b]);
    return QuadSpace(gr);
  };
  out.space_plus = restricted(out.basis_plus);
  out.space_minus = restricted(out.basis_minus);
  for (const QuadSpace* q : {&out.space_plus, &out.space_minus}) {
    auto [p, nneg] = q->signature();
    if (p != nneg) {
      if ((p == 0 || nneg == 0) && q->rank() % 8 == 0)
        throw error(
            "definite restriction of rank a multiple of eight: this branch of the split-spinor "
            "theory is not implemented");
      throw error("restriction of the scalar product to an eigenbundle is not neutral");
    }
  }

  auto extraction = [&](const std::vector<std::vector<Rat>>& basis, const QuadSpace& q) {
    int k = static_cast<int>(basis.size());
    QMat bt_g(k, r);  // ⟨basis_a, e_i⟩
    for (int a = 0; a < k; ++a)
      for (int i = 0; i < r; ++i) {
        Rat acc = 0;
        for (int j = 0; j < r; ++j) acc += basis[a][j] * model.space().gram()(j, i);
        bt_g(a, i) = acc;
      }
    return q.gram_inv() * bt_g;
  };
  out.coords_plus = extraction(out.basis_plus, out.space_plus);
  out.coords_minus = extraction(out.basis_minus, out.space_minus);

  auto [wp, up] = isotropic_splitting(out.space_plus);
  auto [wm, um] = isotropic_splitting(out.space_minus);
  out.module_plus.emplace(out.space_plus, wp, up);
  out.module_minus.emplace(out.space_minus, wm, um);
  return out;
}

// ---------------------------------------------------------------------------
// Split spin connections and the three Dirac operators.
// ---------------------------------------------------------------------------

/// Spin connections D^{𝒮±} on the split modules induced by a generalized
/// connection D preserving E₊ and E₋ (e.g. a Levi-Civita connection of G).
class SplitSpinConnection {
 public:
  SplitSpinConnection(const MetricSplit& split, GenConnection d)
      : m_split(&split), m_d(std::move(d)) {
    const CourantModel& model = *split.model;
    int r = model.rank();
    for (int l = 0; l < r; ++l) {
      m_omega_plus.push_back(spin_lift(split.plus(), restrict_coeff(l, true)));
      m_omega_minus.push_back(spin_lift(split.minus(), restrict_coeff(l, false)));
    }
  }

  const MetricSplit& split() const { return *m_split; }
  const GenConnection& connection() const { return m_d; }

  /// D-coefficient in direction e_l restricted to E± in the E±-basis; checks
  /// that D preserves the eigenbundle.
  TMat restrict_coeff(int l, bool plus_part) const {
    const CourantModel& model = *m_split->model;
    int r = model.rank();
    const auto& basis = plus_part ? m_split->basis_plus : m_split->basis_minus;
    int k = static_cast<int>(basis.size());
    const QMat& x = plus_part ? m_split->coords_plus : m_split->coords_minus;
    const QMat& xo = plus_part ? m_split->coords_minus : m_split->coords_plus;
    TMat out(k, k);
    for (int b = 0; b < k; ++b) {
      Section col(r);
      const TMat& c = m_d.coeff(l);
      for (int i = 0; i < r; ++i) {
        TrigPoly acc;
        for (int j = 0; j < r; ++j)
          if (basis[b][j] != 0 && !c(i, j).is_zero()) acc += basis[b][j] * c(i, j);
        col[i] = acc;
      }
      for (int a = 0; a < xo.rows(); ++a) {
        TrigPoly off;
        for (int i = 0; i < r; ++i)
          if (xo(a, i) != 0 && !col[i].is_zero()) off += xo(a, i) * col[i];
        if (!off.is_zero())
          throw error("connection does not preserve the metric eigenbundles");
      }
      for (int a = 0; a < k; ++a) {
        TrigPoly acc;
        for (int i = 0; i < r; ++i)
          if (x(a, i) != 0 && !col[i].is_zero()) acc += x(a, i) * col[i];
        out(a, b) = acc;
      }
    }
    return out;
  }

  /// D^{𝒮±}_v for a constant full-frame section v, as an even operator on
  /// the ± carrier.
  DiffOp cov(const std::vector<Rat>& v, bool plus_part) const {
    const CourantModel& model = *m_split->model;
    int m = model.torus_dim();
    const SpinorModule& s = plus_part ? m_split->plus() : m_split->minus();
    const auto& omega = plus_part ? m_omega_plus : m_omega_minus;
    DiffOp out(s.dim(), m, 0);
    EMat zeroth(s.dim(), s.dim());
    for (int l = 0; l < model.rank(); ++l) {
      if (v[l] == 0) continue;
      for (int i = 0; i < s.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j)
          if (!omega[l](i, j).is_zero()) zeroth(i, j) += GRat(v[l]) * omega[l](i, j);
    }
    out.add_term({}, zeroth);
    const QMat& anchor = model.anchor_matrix();
    for (int t = 0; t < m; ++t) {
      Rat c = 0;
      for (int l = 0; l < model.rank(); ++l) c += anchor(t, l) * v[l];
      if (c == 0) continue;
      EMat cm(s.dim(), s.dim());
      for (int i = 0; i < s.dim(); ++i) cm(i, i) = ExpPoly::constant(m, GRat(c));
      out.add_term({t}, cm);
    }
    return out;
  }

  /// Ð^{𝒮±} = ½ Σ_i γ(ẽ_i^±) D^{𝒮±}_{e_i^±}, over the E± basis.
  DiffOp dirac(bool plus_part) const {
    const CourantModel& model = *m_split->model;
    int m = model.torus_dim();
    const SpinorModule& s = plus_part ? m_split->plus() : m_split->minus();
    const QuadSpace& q = plus_part ? m_split->space_plus : m_split->space_minus;
    const auto& basis = plus_part ? m_split->basis_plus : m_split->basis_minus;
    DiffOp out(s.dim(), m, 1);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      std::vector<Rat> dual = q.dual_frame_vector(static_cast<int>(i));
      std::vector<ExpPoly> dc(dual.size());
      for (std::size_t a = 0; a < dual.size(); ++a) dc[a] = ExpPoly::constant(m, GRat(dual[a]));
      out = out + DiffOp::multiplication(s.gamma_section(dc), m, 1) * cov(basis[i], plus_part);
    }
    return Rat(1, 2) * out;
  }

 private:
  const MetricSplit* m_split;
  GenConnection m_d;
  std::vector<EMat> m_omega_plus, m_omega_minus;
};

/// Lift an operator on one factor to the graded product carrier, termwise.
inline DiffOp lift_op(const GradedTensorModule& gt, const DiffOp& op, bool plus_part, bool odd) {
  DiffOp out(gt.dim(), op.torus_dim(), op.parity());
  for (const auto& [key, mat] : op.terms())
    out.add_term(key, plus_part ? gt.lift_plus(mat)
                                : (odd ? gt.lift_minus_odd(mat) : gt.lift_minus_even(mat)));
  return out;
}

/// The comparison identity between the full Dirac operator on 𝒮₊⊗̂𝒮₋ and the
/// two partial operators:
///   Ð^𝒮 = Ð^{𝒮₊}⊗1 + (−1)^{|·|}1⊗Ð^{𝒮₋}
///         + ½ Σ_i ( γ(ẽ_i^+)⊗D^{𝒮₋}_{e_i^+} + (−1)^{|·|}D^{𝒮₊}_{e_i^-}⊗γ(ẽ_i^-) ).
inline bool comp_dirac_check(const SplitSpinConnection& sc) {
  const MetricSplit& split = sc.split();
  const CourantModel& model = *split.model;
  int m = model.torus_dim();
  GradedTensorModule gt(split.plus(), split.minus());

  auto graded_gamma_op = [&](const std::vector<Rat>& vp, const std::vector<Rat>& vm) {
    std::vector<ExpPoly> cp(vp.size()), cm(vm.size());
    for (std::size_t a = 0; a < vp.size(); ++a) cp[a] = ExpPoly::constant(m, GRat(vp[a]));
    for (std::size_t a = 0; a < vm.size(); ++a) cm[a] = ExpPoly::constant(m, GRat(vm[a]));
    return DiffOp::multiplication(gt.graded_gamma(cp, cm), m, 1);
  };
  // On the product carrier the function coefficients are attached to the plus
  // factor, so a covariant derivative acting through the minus factor keeps
  // only its zeroth-order (spin-connection) part; the single anchor-derivative
  // term always travels with the plus factor.
  auto zeroth_part = [&](const DiffOp& op) {
    DiffOp out(op.dim(), op.torus_dim(), op.parity());
    for (const auto& [key, mat] : op.terms())
      if (key.empty()) out.add_term(key, mat);
    return out;
  };
  auto cov_product = [&](const std::vector<Rat>& v) {
    DiffOp op = lift_op(gt, sc.cov(v, true), true, false);
    DiffOp cov_minus = sc.cov(v, false);
    return op + lift_op(gt, zeroth_part(cov_minus), false, false);
  };

  std::vector<Rat> zp(split.n_plus(), 0), zm(split.n_minus(), 0);
  // left side: full Dirac over the (E+ basis) ∪ (E- basis) frame
  DiffOp lhs(gt.dim(), m, 1);
  for (int i = 0; i < split.n_plus(); ++i) {
    std::vector<Rat> dual = split.space_plus.dual_frame_vector(i);
    lhs = lhs + graded_gamma_op(dual, zm) * cov_product(split.basis_plus[i]);
  }
  for (int i = 0; i < split.n_minus(); ++i) {
    std::vector<Rat> dual = split.space_minus.dual_frame_vector(i);
    lhs = lhs + graded_gamma_op(zp, dual) * cov_product(split.basis_minus[i]);
  }
  lhs = Rat(1, 2) * lhs;

  // right side: the four displayed terms (minus-factor derivatives zeroth-order)
  DiffOp rhs = lift_op(gt, sc.dirac(true), true, true) +
               lift_op(gt, zeroth_part(sc.dirac(false)), false, true);
  DiffOp mixed(gt.dim(), m, 1);
  for (int i = 0; i < split.n_plus(); ++i) {
    std::vector<Rat> dual = split.space_plus.dual_frame_vector(i);
    std::vector<ExpPoly> dc(dual.size());
    for (std::size_t a = 0; a < dual.size(); ++a) dc[a] = ExpPoly::constant(m, GRat(dual[a]));
    DiffOp g_plus = DiffOp::multiplication(gt.lift_plus(split.plus().gamma_section(dc)), m, 1);
    mixed =
        mixed + g_plus * lift_op(gt, zeroth_part(sc.cov(split.basis_plus[i], false)), false, false);
  }
  for (int i = 0; i < split.n_minus(); ++i) {
    std::vector<Rat> dual = split.space_minus.dual_frame_vector(i);
    std::vector<ExpPoly> dc(dual.size());
    for (std::size_t a = 0; a < dual.size(); ++a) dc[a] = ExpPoly::constant(m, GRat(dual[a]));
    DiffOp g_minus =
        DiffOp::multiplication(gt.lift_minus_odd(split.minus().gamma_section(dc)), m, 1);
    mixed = mixed + g_minus * lift_op(gt, sc.cov(split.basis_minus[i], true), true, false);
  }
  rhs = rhs + Rat(1, 2) * mixed;
  return op_equal(lhs, rhs);
}

// ---------------------------------------------------------------------------
// Spinor-level generalized Kähler and hyper-Kähler criteria.
// ---------------------------------------------------------------------------

/// Conjugation of the function ring: Σ c_k e^{ikθ} ↦ Σ c̄_k e^{−ikθ}.
inline ExpPoly ep_conj(const ExpPoly& f) {
  ExpPoly out(f.torus_dim());
  for (const auto& [k, c] : f.terms()) {
    std::vector<int> neg = k;
    for (int& x : neg) x = -x;
    out += ExpPoly::harmonic(neg, c.conj());
  }
  return out;
}

inline Spinor spinor_conj(const Spinor& s) {
  Spinor out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = ep_conj(s[i]);
  return out;
}

struct GkSpinorReport {
  bool dirac_plus = false, dirac_minus = false;  // Ð^{𝒮±}η± ≡ η±
  bool mixed_plus = false, mixed_minus = false;  // D^{𝒮±}_{e∓}η± ≡ η±
  int bound = 0;
  std::string witness;
  bool value() const { return dirac_plus && dirac_minus && mixed_plus && mixed_minus; }
};

/// The split pure spinors η± associated to (G, 𝒥): lines annihilated by
/// L ∩ (E±)_ℂ, expressed on the ± carriers.
inline std::pair<Spinor, Spinor> split_pure_spinors(const MetricSplit& split, const TMat& j) {
  const CourantModel& model = *split.model;
  int r = model.rank(), m = model.torus_dim();
  std::vector<std::vector<ExpPoly>> l = one_zero_bundle(model, j);
  auto part = [&](bool plus_part) {
    const QMat& other = plus_part ? split.coords_minus : split.coords_plus;
    EMat sys(other.rows(), static_cast<int>(l.size()));
    for (std::size_t a = 0; a < l.size(); ++a) {
      std::vector<ExpPoly> off = split.project_c(l[a], !plus_part);
      for (int i = 0; i < other.rows(); ++i) sys(i, static_cast<int>(a)) = off[i];
    }
    auto combos = ring_kernel(sys);
    const SpinorModule& s = plus_part ? split.plus() : split.minus();
    require(static_cast<int>(combos.size()) == s.n(),
            "L does not intersect the eigenbundle in the expected rank");
    std::vector<std::vector<ExpPoly>> basis;
    for (const auto& c : combos) {
      std::vector<ExpPoly> full(r);
      for (std::size_t a = 0; a < l.size(); ++a)
        for (int i = 0; i < r; ++i) full[i] += c[a].promoted(m) * l[a][i];
      basis.push_back(split.project_c(full, plus_part));
    }
    return spinor_of_isotropic(s, basis);
  };
  return {part(true), part(false)};
}

/// Decide the four conditions of the split-spinor generalized Kähler
/// criterion for a Hermitian pair (G, 𝒥) and a Levi-Civita connection D;
/// cross-checked against the bracket-level oracle.
inline GkSpinorReport gk_spinor_check(const CourantModel& model, const TMat& g, const TMat& j,
                                      std::optional<GenConnection> d = std::nullopt,
                                      int slack = degree_slack()) {
  {
    auto issues = validate_hermitian_pair(model, g, j);
    if (!issues.empty()) throw error("invalid generalized almost Hermitian pair: " + issues[0]);
  }
  int m = model.torus_dim();
  MetricSplit split = make_metric_split(model, g);
  GenConnection use = d.has_value() ? *d : levi_civita(model, g);
  SplitSpinConnection sc(split, use);
  auto [eta_p, eta_m] = split_pure_spinors(split, j);

  GkSpinorReport rep;
  int jdeg = 0;
  for (int a = 0; a < model.rank(); ++a)
    for (int b = 0; b < model.rank(); ++b) jdeg = std::max(jdeg, tp_degree(j(a, b)));
  rep.bound = std::max(spinor_degree(eta_p), spinor_degree(eta_m)) + model_degree(model) + jdeg +
              slack;

  auto dirac_cond = [&](bool plus_part, const Spinor& eta) {
    const SpinorModule& s = plus_part ? split.plus() : split.minus();
    Spinor rhs = sc.dirac(plus_part).apply(eta);
    std::vector<Spinor> gens(s.space().rank());
    for (int i = 0; i < s.space().rank(); ++i) {
      std::vector<ExpPoly> ei(s.space().rank());
      ei[i] = ring_one<ExpPoly>();
      gens[i] = s.gamma_section(ei).apply(eta);
    }
    return bounded_combination(gens, rhs, m, rep.bound).has_value();
  };
  auto mixed_cond = [&](bool plus_part, const Spinor& eta) {
    const auto& other_basis = plus_part ? split.basis_minus : split.basis_plus;
    for (const auto& e : other_basis) {
      Spinor rhs = sc.cov(e, plus_part).apply(eta);
      if (!bounded_combination({eta}, rhs, m, rep.bound).has_value()) return false;
    }
    return true;
  };
  rep.dirac_plus = dirac_cond(true, eta_p);
  rep.dirac_minus = dirac_cond(false, eta_m);
  rep.mixed_plus = mixed_cond(true, eta_p);
  rep.mixed_minus = mixed_cond(false, eta_m);
  if (!rep.value()) {
    rep.witness = std::string("failed within degree bound ") + std::to_string(rep.bound) + ":";
    if (!rep.dirac_plus) rep.witness += " dirac+";
    if (!rep.dirac_minus) rep.witness += " dirac-";
    if (!rep.mixed_plus) rep.witness += " mixed+";
    if (!rep.mixed_minus) rep.witness += " mixed-";
  }

  GkCheckResult oracle = gk_bracket_check(model, g, j);
  require(oracle.consistent(), "bracket-level generalized Kähler routes disagree");
  if (rep.value() != oracle.value())
    throw error(std::string("spinor and bracket generalized Kähler criteria disagree (") +
                (rep.value() ? "spinor pass" : rep.witness) + " vs bracket " +
                (oracle.value() ? "pass" : "fail") + "): degree bound too small or internal "
                "inconsistency");
  return rep;
}

struct HkSpinorReport {
  GkSpinorReport per_structure[3];
  bool value() const {
    return per_structure[0].value() && per_structure[1].value() && per_structure[2].value();
  }
};

/// Split-spinor criterion for generalized hyper-Kähler: the generalized
/// Kähler conditions for each of 𝒥₁, 𝒥₂, 𝒥₃; matched against the
/// bracket-level predicate structure by structure inside gk_spinor_check.
inline HkSpinorReport hk_spinor_check(const CourantModel& model, const TMat& g, const TMat& j1,
                                      const TMat& j2, const TMat& j3,
                                      std::optional<GenConnection> d = std::nullopt) {
  {
    auto issues = validate_hyper_triple(model, j1, j2, j3);
    if (!issues.empty()) throw error("invalid hypercomplex triple: " + issues[0]);
  }
  HkSpinorReport rep;
  const TMat* js[3] = {&j1, &j2, &j3};
  for (int i = 0; i < 3; ++i) rep.per_structure[i] = gk_spinor_check(model, g, *js[i], d);
  return rep;
}

}  // namespace ck
