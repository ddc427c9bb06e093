#pragma once

#include <algorithm>

#include "ck/linalg.hpp"

namespace ck {

/// Element of the ℤ₂-graded Clifford algebra Cl(E) with e·e = ⟨e,e⟩ for
/// grade-1 e, over the function ring (complexified coefficients).
/// Basis blades are products e_{i₁}···e_{i_k} with strictly increasing frame
/// indices, encoded as bitmasks.
class CliffordElement {
 public:
  CliffordElement() = default;
  explicit CliffordElement(QuadSpace space) : m_space(std::move(space)) {}

  static CliffordElement scalar(const QuadSpace& q, const ExpPoly& c) {
    CliffordElement out(q);
    out.add_blade(0, c);
    return out;
  }
  static CliffordElement generator(const QuadSpace& q, int i, const ExpPoly& c = ring_one<ExpPoly>()) {
    CliffordElement out(q);
    out.add_blade(1u << i, c);
    return out;
  }
  /// Grade-1 element from frame components.
  static CliffordElement vector(const QuadSpace& q, const std::vector<ExpPoly>& comps) {
    require(static_cast<int>(comps.size()) == q.rank(), "vector component count mismatch");
    CliffordElement out(q);
    for (int i = 0; i < q.rank(); ++i) out.add_blade(1u << i, comps[i]);
    return out;
  }
  static CliffordElement vector(const QuadSpace& q, const std::vector<TrigPoly>& comps) {
    std::vector<ExpPoly> c;
    c.reserve(comps.size());
    for (const auto& x : comps) c.push_back(ExpPoly::from_trig(x));
    return vector(q, c);
  }

  const QuadSpace& space() const { return m_space; }
  const std::map<std::uint32_t, ExpPoly>& blades() const { return m_blades; }
  bool is_zero() const { return m_blades.empty(); }
  bool is_scalar() const { return m_blades.empty() || (m_blades.size() == 1 && m_blades.begin()->first == 0); }
  ExpPoly scalar_part() const {
    auto it = m_blades.find(0);
    return it == m_blades.end() ? ExpPoly() : it->second;
  }

  void add_blade(std::uint32_t mask, const ExpPoly& c) {
    require(mask < (1u << m_space.rank()), "blade mask out of range");
    if (c.is_zero()) return;
    auto it = m_blades.find(mask);
    if (it == m_blades.end())
      m_blades.emplace(mask, c);
    else {
      it->second += c;
      if (it->second.is_zero()) m_blades.erase(it);
    }
  }

  /// Homogeneous ℤ₂-degree if all blades agree, else nullopt (0 = even).
  std::optional<int> z2_degree() const {
    std::optional<int> deg;
    for (const auto& [mask, c] : m_blades) {
      int d = __builtin_popcount(mask) & 1;
      if (!deg)
        deg = d;
      else if (*deg != d)
        return std::nullopt;
    }
    return deg ? deg : std::optional<int>(0);
  }

  friend CliffordElement operator+(const CliffordElement& a, const CliffordElement& b) {
    CliffordElement out = a.check_compat(b);
    for (const auto& [mask, c] : b.m_blades) out.add_blade(mask, c);
    return out;
  }
  friend CliffordElement operator-(const CliffordElement& a) {
    CliffordElement out(a.m_space);
    for (const auto& [mask, c] : a.m_blades) out.m_blades.emplace(mask, -c);
    return out;
  }
  friend CliffordElement operator-(const CliffordElement& a, const CliffordElement& b) {
    return a + (-b);
  }
  friend CliffordElement operator*(const ExpPoly& c, const CliffordElement& a) {
    CliffordElement out(a.m_space);
    for (const auto& [mask, x] : a.m_blades) out.add_blade(mask, c * x);
    return out;
  }
  friend CliffordElement operator*(const Rat& c, const CliffordElement& a) {
    return ExpPoly::constant(0, GRat(c)) * a;
  }
  CliffordElement& operator+=(const CliffordElement& b) { return *this = *this + b; }
  CliffordElement& operator-=(const CliffordElement& b) { return *this = *this - b; }

  friend bool operator==(const CliffordElement& a, const CliffordElement& b) {
    return (a - b).is_zero();
  }
  friend bool operator!=(const CliffordElement& a, const CliffordElement& b) { return !(a == b); }

  /// Clifford product via the relation e_i e_j + e_j e_i = 2⟨e_i, e_j⟩.
  friend CliffordElement operator*(const CliffordElement& a, const CliffordElement& b) {
    CliffordElement out = a.check_compat(b);
    out.m_blades.clear();
    for (const auto& [mb, cb] : b.m_blades) {
      // multiply each blade of a on the right by blade mb, generator by generator
      std::map<std::uint32_t, ExpPoly> acc;
      for (const auto& [ma, ca] : a.m_blades) {
        auto it = acc.find(ma);
        if (it == acc.end())
          acc.emplace(ma, ca * cb);
        else
          it->second += ca * cb;
      }
      for (std::uint32_t x = mb; x; x &= x - 1) {
        int j = __builtin_ctz(x);
        acc = a.right_mul_gen(acc, j);
      }
      for (const auto& [mask, c] : acc) out.add_blade(mask, c);
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json blades = nlohmann::json::array();
    for (const auto& [mask, c] : m_blades) {
      std::vector<int> idx;
      for (std::uint32_t x = mask; x; x &= x - 1) idx.push_back(__builtin_ctz(x) + 1);
      blades.push_back({{"indices", idx},
                        {"re", c.real_part().to_json()},
                        {"im", c.imag_part().to_json()}});
    }
    return blades;
  }

 private:
  CliffordElement check_compat(const CliffordElement& b) const {
    require(m_space.gram() == b.m_space.gram(), "Clifford elements over different spaces");
    return *this;
  }

  /// Multiply every blade in acc on the right by the generator e_j.
  std::map<std::uint32_t, ExpPoly> right_mul_gen(const std::map<std::uint32_t, ExpPoly>& acc,
                                                 int j) const {
    std::map<std::uint32_t, ExpPoly> out;
    auto add = [&out](std::uint32_t mask, const ExpPoly& c) {
      if (c.is_zero()) return;
      auto it = out.find(mask);
      if (it == out.end())
        out.emplace(mask, c);
      else {
        it->second += c;
        if (it->second.is_zero()) out.erase(it);
      }
    };
    const QMat& g = m_space.gram();
    for (const auto& [mask, c] : acc) {
      // move e_j leftward through the generators of mask with index > j,
      // producing contraction terms 2⟨e_i, e_j⟩ along the way
      int sign = 1;
      std::uint32_t remaining = mask;
      // generators with index > j, processed from the highest down
      std::vector<int> higher;
      for (std::uint32_t x = mask; x; x &= x - 1) {
        int i = __builtin_ctz(x);
        if (i > j) higher.push_back(i);
      }
      for (auto it = higher.rbegin(); it != higher.rend(); ++it) {
        int i = *it;
        // e_i e_j = 2 g_ij − e_j e_i
        if (g(i, j) != 0) {
          Rat f = Rat(2 * sign) * g(i, j);
          add(remaining & ~(1u << i), GRat(f) * c);
        }
        sign = -sign;
      }
      std::uint32_t lower_removed = remaining;
      for (int i : higher) lower_removed &= ~(1u << i);
      // now e_j sits just right of the generators ≤ j in lower_removed,
      // followed by the higher generators again
      std::uint32_t rest = 0;
      for (int i : higher) rest |= 1u << i;
      if (lower_removed & (1u << j)) {
        // e_j e_j = ⟨e_j, e_j⟩, consuming the existing generator
        // sign: e_j must pass nothing further (it is the highest in lower part)
        Rat f = Rat(sign) * g(j, j);
        add((lower_removed & ~(1u << j)) | rest, GRat(f) * c);
      } else {
        add(lower_removed | (1u << j) | rest, GRat(Rat(sign)) * c);
      }
    }
    return out;
  }

  QuadSpace m_space;
  std::map<std::uint32_t, ExpPoly> m_blades;
};

/// Chevalley quantization Λ^k E → Cl(E): antisymmetrized Clifford product,
/// λ(e_{i₁}∧…∧e_{i_k}) = (1/k!) Σ_σ sgn(σ) e_{i_σ(1)}···e_{i_σ(k)}.
inline CliffordElement quantize(const QuadSpace& q, const Alt& poly) {
  CliffordElement out(q);
  int k = poly.degree();
  for (const auto& [mask, c] : poly.components()) {
    std::vector<int> idx;
    for (std::uint32_t x = mask; x; x &= x - 1) idx.push_back(__builtin_ctz(x));
    CliffordElement sum(q);
    // iterate permutations
    std::vector<int> p(k);
    std::iota(p.begin(), p.end(), 0);
    do {
      int sign = 1;
      for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
          if (p[i] > p[j]) sign = -sign;
      CliffordElement prod = CliffordElement::scalar(q, ring_one<ExpPoly>());
      for (int i = 0; i < k; ++i) prod = prod * CliffordElement::generator(q, idx[p[i]]);
      sum += Rat(sign) * prod;
    } while (std::next_permutation(p.begin(), p.end()));
    Rat fact = 1;
    for (int i = 2; i <= k; ++i) fact *= i;
    out += (Rat(1) / fact) * (ExpPoly::from_trig(c) * sum);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spinor modules.
// ---------------------------------------------------------------------------

/// Spinor of a SpinorModule: coordinates in the exterior-algebra carrier
/// (blade bitmask over the module generators), complexified coefficients.
using Spinor = std::vector<ExpPoly>;

/// Irreducible Cl(E)-module for a neutral-signature E of rank 2n, realized
/// as the exterior algebra over n generators ξ_a: the chosen maximal
/// isotropic W acts by wedging (w_b ↦ ξ_b∧·) and the dual isotropic
/// complement U acts by contraction (u_a ↦ Σ_b 2⟨u_a, w_b⟩ ι_b).
class SpinorModule {
 public:
  /// wbasis, ubasis: columns-as-rows lists of constant frame components.
  SpinorModule(QuadSpace space, std::vector<std::vector<Rat>> wbasis,
               std::vector<std::vector<Rat>> ubasis)
      : m_space(std::move(space)), m_w(std::move(wbasis)), m_u(std::move(ubasis)) {
    int r = m_space.rank();
    require(r % 2 == 0, "spinor module needs even rank");
    m_n = r / 2;
    require(static_cast<int>(m_w.size()) == m_n && static_cast<int>(m_u.size()) == m_n,
            "isotropic bases must have rank n");
    auto qpair = [&](const std::vector<Rat>& a, const std::vector<Rat>& b) {
      Rat s = 0;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) s += a[i] * m_space.gram()(i, j) * b[j];
      return s;
    };
    QMat pairing(m_n, m_n);
    for (int a = 0; a < m_n; ++a) {
      require(static_cast<int>(m_w[a].size()) == r && static_cast<int>(m_u[a].size()) == r,
              "basis vector length mismatch");
      for (int b = 0; b < m_n; ++b) {
        require(qpair(m_w[a], m_w[b]) == 0, "W basis is not isotropic");
        require(qpair(m_u[a], m_u[b]) == 0, "U basis is not isotropic");
        pairing(a, b) = qpair(m_u[a], m_w[b]);
      }
    }
    m_pairing = pairing;
    (void)inverse(pairing);  // U ⊕ W = E requires an invertible pairing

    // change of basis: columns u_1..u_n, w_1..w_n
    QMat basis(r, r);
    for (int a = 0; a < m_n; ++a)
      for (int i = 0; i < r; ++i) {
        basis(i, a) = m_u[a][i];
        basis(i, m_n + a) = m_w[a][i];
      }
    m_basis_inv = inverse(basis);

    // generator action matrices on the 2^n-dimensional carrier
    int dim = 1 << m_n;
    std::vector<QMat> wedge_m(m_n, QMat(dim, dim)), contr_m(m_n, QMat(dim, dim));
    for (int b = 0; b < m_n; ++b)
      for (int s = 0; s < dim; ++s) {
        if (!(s & (1 << b))) {
          int below = __builtin_popcount(s & ((1 << b) - 1));
          wedge_m[b](s | (1 << b), s) = Rat((below & 1) ? -1 : 1);
        } else {
          int below = __builtin_popcount(s & ((1 << b) - 1));
          contr_m[b](s & ~(1 << b), s) = Rat((below & 1) ? -1 : 1);
        }
      }
    m_gamma_w = wedge_m;
    m_gamma_u.assign(m_n, QMat(dim, dim));
    for (int a = 0; a < m_n; ++a)
      for (int b = 0; b < m_n; ++b)
        if (m_pairing(a, b) != 0) m_gamma_u[a] = m_gamma_u[a] + (Rat(2) * m_pairing(a, b)) * contr_m[b];

    // frame generator matrices: decompose e_i over (u_a, w_b)
    m_gamma_frame.assign(r, QMat(dim, dim));
    for (int i = 0; i < r; ++i) {
      for (int a = 0; a < m_n; ++a) {
        if (m_basis_inv(a, i) != 0)
          m_gamma_frame[i] = m_gamma_frame[i] + m_basis_inv(a, i) * m_gamma_u[a];
        if (m_basis_inv(m_n + a, i) != 0)
          m_gamma_frame[i] = m_gamma_frame[i] + m_basis_inv(m_n + a, i) * m_gamma_w[a];
      }
    }
    // Clifford relation on the frame: γ_i γ_j + γ_j γ_i = 2⟨e_i,e_j⟩
    for (int i = 0; i < r; ++i)
      for (int j = i; j < r; ++j) {
        QMat anti = m_gamma_frame[i] * m_gamma_frame[j] + m_gamma_frame[j] * m_gamma_frame[i];
        QMat expect = (Rat(2) * m_space.gram()(i, j)) * QMat::identity(dim);
        if (anti != expect)
          throw internal_check_failure("spinor module violates the Clifford relation");
      }
  }

  const QuadSpace& space() const { return m_space; }
  int n() const { return m_n; }
  int dim() const { return 1 << m_n; }
  const std::vector<std::vector<Rat>>& w_basis() const { return m_w; }
  const std::vector<std::vector<Rat>>& u_basis() const { return m_u; }
  const QMat& gamma_frame(int i) const { return m_gamma_frame.at(i); }

  Spinor zero_spinor() const { return Spinor(dim()); }
  Spinor basis_spinor(std::uint32_t mask) const {
    Spinor s(dim());
    s.at(mask) = ring_one<ExpPoly>();
    return s;
  }

  /// γ of a grade-1 section given by frame components.
  EMat gamma_section(const std::vector<ExpPoly>& comps) const {
    require(static_cast<int>(comps.size()) == m_space.rank(), "section length mismatch");
    EMat out(dim(), dim());
    for (int i = 0; i < m_space.rank(); ++i) {
      if (comps[i].is_zero()) continue;
      for (int r2 = 0; r2 < dim(); ++r2)
        for (int c = 0; c < dim(); ++c)
          if (m_gamma_frame[i](r2, c) != 0)
            out(r2, c) += GRat(m_gamma_frame[i](r2, c)) * comps[i];
    }
    return out;
  }
  EMat gamma_section(const std::vector<TrigPoly>& comps) const {
    std::vector<ExpPoly> c;
    c.reserve(comps.size());
    for (const auto& x : comps) c.push_back(ExpPoly::from_trig(x));
    return gamma_section(c);
  }

  /// γ of an arbitrary Clifford element (blade products of frame matrices).
  EMat gamma(const CliffordElement& a) const {
    require(a.space().gram() == m_space.gram(), "Clifford element over a different space");
    EMat out(dim(), dim());
    for (const auto& [mask, c] : a.blades()) {
      QMat blade = QMat::identity(dim());
      for (std::uint32_t x = mask; x; x &= x - 1) blade = blade * m_gamma_frame[__builtin_ctz(x)];
      for (int r2 = 0; r2 < dim(); ++r2)
        for (int cc = 0; cc < dim(); ++cc)
          if (blade(r2, cc) != 0) out(r2, cc) += GRat(blade(r2, cc)) * c;
    }
    return out;
  }

  Spinor apply(const EMat& op, const Spinor& s) const { return op.apply(s); }

  /// Volume element ω = b₁···b_{2n} ∈ Cl(E) for an oriented orthogonal basis
  /// (b_i), normalized so that ω² = 1.  Fails when the normalization would be
  /// irrational — an unsupported signature/gram for the grading construction.
  CliffordElement volume() const {
    int r = m_space.rank();
    auto basis = m_space.orthogonal_basis();
    CliffordElement prod = CliffordElement::scalar(m_space, ring_one<ExpPoly>());
    Rat norms = 1;
    for (int k = 0; k < r; ++k) {
      std::vector<Rat> bk = basis[k];
      std::vector<ExpPoly> comps(r);
      for (int i = 0; i < r; ++i) comps[i] = ExpPoly::constant(0, GRat(bk[i]));
      prod = prod * CliffordElement::vector(m_space, comps);
      Rat self = 0;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) self += bk[i] * m_space.gram()(i, j) * bk[j];
      norms *= self;
    }
    // (b₁···b_r)² = (−1)^{r(r−1)/2} Π ⟨b_k, b_k⟩
    Rat sq = norms;
    if ((r * (r - 1) / 2) % 2) sq = -sq;
    auto root = rat_sqrt(sq);
    require(root.has_value() && *root != 0,
            "volume element does not square to 1: grading unsupported for this signature");
    return (Rat(1) / *root) * prod;
  }

  /// Chirality projectors ½(1 ± γ_ω).
  std::pair<QMat, QMat> grading_split() const {
    CliffordElement om = volume();
    EMat gw = gamma(om);
    QMat gwq(dim(), dim());
    for (int i = 0; i < dim(); ++i)
      for (int j = 0; j < dim(); ++j) {
        const ExpPoly& e = gw(i, j);
        require(e.is_zero() || (e.is_constant() && e.constant_value().im == 0),
                "volume action not constant");
        gwq(i, j) = e.is_zero() ? Rat(0) : e.constant_value().re;
      }
    if (gwq * gwq != QMat::identity(dim()))
      throw internal_check_failure("volume action does not square to the identity");
    QMat id = QMat::identity(dim());
    return {Rat(1, 2) * (id + gwq), Rat(1, 2) * (id - gwq)};
  }

 private:
  QuadSpace m_space;
  std::vector<std::vector<Rat>> m_w, m_u;
  int m_n = 0;
  QMat m_pairing, m_basis_inv;
  std::vector<QMat> m_gamma_w, m_gamma_u, m_gamma_frame;
};

// ---------------------------------------------------------------------------
// Graded tensor product of spinor modules (Koszul signs).
// ---------------------------------------------------------------------------

/// Carrier S₊⊗S₋ for Cl(E₊⊕E₋) ≅ Cl(E₊)⊗̂Cl(E₋):
/// γ_{v₊+v₋}(s₊⊗s₋) = (γ_{v₊}s₊)⊗s₋ + (−1)^{|s₊|} s₊⊗(γ_{v₋}s₋).
class GradedTensorModule {
 public:
  GradedTensorModule(const SpinorModule& plus, const SpinorModule& minus)
      : m_plus(&plus), m_minus(&minus) {}

  int dim() const { return m_plus->dim() * m_minus->dim(); }
  int index(std::uint32_t sp, std::uint32_t sm) const {
    return static_cast<int>(sp) * m_minus->dim() + static_cast<int>(sm);
  }
  const SpinorModule& plus() const { return *m_plus; }
  const SpinorModule& minus() const { return *m_minus; }

  /// Operator on the product carrier for v = v₊ ⊕ v₋ (components in the
  /// respective frames).
  EMat graded_gamma(const std::vector<ExpPoly>& v_plus, const std::vector<ExpPoly>& v_minus) const {
    EMat gp = m_plus->gamma_section(v_plus);
    EMat gm = m_minus->gamma_section(v_minus);
    EMat out(dim(), dim());
    for (int sp = 0; sp < m_plus->dim(); ++sp)
      for (int sm = 0; sm < m_minus->dim(); ++sm) {
        int col = index(sp, sm);
        for (int tp = 0; tp < m_plus->dim(); ++tp)
          if (!gp(tp, sp).is_zero()) out(index(tp, sm), col) += gp(tp, sp);
        int sgn = __builtin_popcount(static_cast<unsigned>(sp)) & 1 ? -1 : 1;
        for (int tm = 0; tm < m_minus->dim(); ++tm)
          if (!gm(tm, sm).is_zero())
            out(index(sp, tm), col) += GRat(Rat(sgn)) * gm(tm, sm);
      }
    return out;
  }

  /// Lift an operator acting only on the minus factor with Koszul sign
  /// (for odd operators: (−1)^{|s₊|} s₊ ⊗ (op s₋)).
  EMat lift_minus_odd(const EMat& op) const {
    EMat out(dim(), dim());
    for (int sp = 0; sp < m_plus->dim(); ++sp) {
      int sgn = __builtin_popcount(static_cast<unsigned>(sp)) & 1 ? -1 : 1;
      for (int sm = 0; sm < m_minus->dim(); ++sm)
        for (int tm = 0; tm < m_minus->dim(); ++tm)
          if (!op(tm, sm).is_zero())
            out(index(sp, tm), index(sp, sm)) += GRat(Rat(sgn)) * op(tm, sm);
    }
    return out;
  }
  EMat lift_plus(const EMat& op) const {
    EMat out(dim(), dim());
    for (int sm = 0; sm < m_minus->dim(); ++sm)
      for (int sp = 0; sp < m_plus->dim(); ++sp)
        for (int tp = 0; tp < m_plus->dim(); ++tp)
          if (!op(tp, sp).is_zero()) out(index(tp, sm), index(sp, sm)) += op(tp, sp);
    return out;
  }
  EMat lift_minus_even(const EMat& op) const {
    EMat out(dim(), dim());
    for (int sp = 0; sp < m_plus->dim(); ++sp)
      for (int sm = 0; sm < m_minus->dim(); ++sm)
        for (int tm = 0; tm < m_minus->dim(); ++tm)
          if (!op(tm, sm).is_zero()) out(index(sp, tm), index(sp, sm)) += op(tm, sm);
    return out;
  }

 private:
  const SpinorModule* m_plus;
  const SpinorModule* m_minus;
};

// ---------------------------------------------------------------------------
// Pure spinor machinery.
// ---------------------------------------------------------------------------

/// Result of an annihilator computation: basis vectors of
/// L_η = {v ∈ E_ℂ : γ_v η = 0} with function-ring components.
struct NullSpaceResult {
  std::vector<std::vector<ExpPoly>> basis;  // frame components
  int generic_rank = 0;                     // rank of the annihilator bundle
};

/// Evaluate the pointwise rank of a complexified matrix at a quarter-grid
/// point (field Gaussian elimination over ℚ(i)).
inline int grat_rank(std::vector<std::vector<GRat>> m) {
  int rows = static_cast<int>(m.size());
  int cols = rows ? static_cast<int>(m[0].size()) : 0;
  int rank_ = 0;
  for (int col = 0; col < cols && rank_ < rows; ++col) {
    int p = -1;
    for (int i = rank_; i < rows; ++i)
      if (!m[i][col].is_zero()) {
        p = i;
        break;
      }
    if (p < 0) continue;
    std::swap(m[p], m[rank_]);
    for (int i = rank_ + 1; i < rows; ++i) {
      if (m[i][col].is_zero()) continue;
      GRat f = m[i][col] / m[rank_][col];
      for (int j = col; j < cols; ++j) m[i][j] = m[i][j] - f * m[rank_][j];
    }
    ++rank_;
  }
  return rank_;
}

namespace detail {
/// Pointwise ranks of an EMat over the full quarter grid of T^m; enforces
/// constancy and agreement with the generic (symbolic-minor) rank.
inline void check_constant_rank(const EMat& m, int expect, const std::string& what) {
  int tdim = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) tdim = std::max(tdim, m(i, j).torus_dim());
  std::vector<int> q(tdim, 0);
  while (true) {
    std::vector<std::vector<GRat>> pt(m.rows(), std::vector<GRat>(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) pt[i][j] = m(i, j).promoted(tdim).eval_quarter(q);
    if (grat_rank(std::move(pt)) != expect)
      throw error(what + ": non-constant rank over the torus");
    int s = static_cast<int>(q.size()) - 1;
    for (; s >= 0; --s) {
      if (++q[s] < 4) break;
      q[s] = 0;
    }
    if (s < 0) break;
  }
}
}  // namespace detail

/// Annihilator L_η of a nonzero spinor; requires constant pointwise rank.
inline NullSpaceResult null_space(const SpinorModule& mod, const Spinor& eta) {
  bool nonzero = false;
  for (const auto& c : eta) nonzero = nonzero || !c.is_zero();
  require(nonzero, "null_space of the zero spinor");
  int r = mod.space().rank();
  EMat m(mod.dim(), r);
  for (int i = 0; i < r; ++i) {
    std::vector<ExpPoly> ei(r);
    ei[i] = ring_one<ExpPoly>();
    Spinor col = mod.gamma_section(ei).apply(eta);
    for (int b = 0; b < mod.dim(); ++b) m(b, i) = col[b];
  }
  NullSpaceResult out;
  int rk = generic_rank(m);
  out.generic_rank = r - rk;
  detail::check_constant_rank(m, rk, "null_space");
  out.basis = ring_kernel(m);
  return out;
}

/// Purity: annihilator is a rank-n (maximal isotropic) subbundle.
inline bool is_pure(const SpinorModule& mod, const Spinor& eta) {
  return null_space(mod, eta).generic_rank == mod.n();
}

/// Isotropy of a subbundle basis under the (complexified) scalar product.
inline bool is_isotropic(const QuadSpace& q, const std::vector<std::vector<ExpPoly>>& basis) {
  for (size_t a = 0; a < basis.size(); ++a)
    for (size_t b = a; b < basis.size(); ++b)
      if (!q.pair(basis[a], basis[b]).is_zero()) return false;
  return true;
}

/// Pure spinor line of a maximal isotropic subbundle: solves γ_{v_a}η = 0
/// for all basis vectors; the solution line is normalized to leading
/// coefficient 1 when that coefficient is invertible in the ring.
inline Spinor spinor_of_isotropic(const SpinorModule& mod,
                                  const std::vector<std::vector<ExpPoly>>& basis) {
  require(static_cast<int>(basis.size()) == mod.n(), "isotropic basis must have rank n");
  require(is_isotropic(mod.space(), basis), "basis is not isotropic");
  // the basis must have full generic rank n
  EMat bm(mod.space().rank(), mod.n());
  for (int a = 0; a < mod.n(); ++a)
    for (int i = 0; i < mod.space().rank(); ++i) bm(i, a) = basis[a][i];
  require(generic_rank(bm) == mod.n(), "isotropic basis is degenerate");

  EMat sys(mod.dim() * mod.n(), mod.dim());
  for (int a = 0; a < mod.n(); ++a) {
    EMat ga = mod.gamma_section(basis[a]);
    for (int i = 0; i < mod.dim(); ++i)
      for (int j = 0; j < mod.dim(); ++j) sys(a * mod.dim() + i, j) = ga(i, j);
  }
  auto ker = ring_kernel(sys);
  require(!ker.empty(), "no pure spinor annihilated by the given bundle");
  require(ker.size() == 1, "annihilated space is not a line");
  Spinor eta = ker[0];
  // normalize by the first nonzero coefficient when it is a unit
  for (size_t i = 0; i < eta.size(); ++i) {
    if (eta[i].is_zero()) continue;
    if (eta[i].is_constant()) {
      GRat inv = GRat(1) / eta[i].constant_value();
      for (auto& c : eta) c = inv * c;
    } else if (eta[i].term_count() == 1) {
      // single-harmonic leading coefficient: also a unit
      const auto& [k, c] = *eta[i].terms().begin();
      std::vector<int> neg = k;
      for (int& x : neg) x = -x;
      ExpPoly inv = ExpPoly::harmonic(neg, GRat(1) / c);
      for (auto& cc : eta) cc = inv * cc;
    }
    break;
  }
  return eta;
}

}  // namespace ck
