#pragma once

#include <cstdint>
#include <numeric>

#include "ck/matrix.hpp"

namespace ck {

/// Rank-n quadratic vector bundle in a fixed global frame: constant
/// symmetric invertible gram matrix over ℚ with exact signature.
class QuadSpace {
 public:
  QuadSpace() = default;
  explicit QuadSpace(QMat gram) : m_gram(std::move(gram)) {
    require(m_gram.rows() == m_gram.cols(), "gram matrix must be square");
    m_rank = m_gram.rows();
    for (int i = 0; i < m_rank; ++i)
      for (int j = 0; j < i; ++j)
        require(m_gram(i, j) == m_gram(j, i), "gram matrix must be symmetric");
    m_gram_inv = inverse(m_gram);  // throws if singular
    m_signature = compute_signature(m_gram);
  }

  int rank() const { return m_rank; }
  const QMat& gram() const { return m_gram; }
  const QMat& gram_inv() const { return m_gram_inv; }
  /// (positive, negative) inertia.
  std::pair<int, int> signature() const { return m_signature; }
  bool is_neutral() const { return m_signature.first == m_signature.second; }

  /// ⟨u, v⟩ for sections given by frame components.
  template <class T>
  T pair(const std::vector<T>& u, const std::vector<T>& v) const {
    require(static_cast<int>(u.size()) == m_rank && static_cast<int>(v.size()) == m_rank,
            "section length mismatch");
    T out = ring_zero<T>();
    for (int i = 0; i < m_rank; ++i)
      for (int j = 0; j < m_rank; ++j)
        if (m_gram(i, j) != 0) out = out + m_gram(i, j) * (u[i] * v[j]);
    return out;
  }

  /// Components of the metrically dual frame vector ẽ_i (⟨e_j, ẽ_i⟩ = δ_ij).
  std::vector<Rat> dual_frame_vector(int i) const {
    std::vector<Rat> out(m_rank);
    for (int j = 0; j < m_rank; ++j) out[j] = m_gram_inv(i, j);
    return out;
  }

  /// Metric adjoint of an endomorphism: ⟨A*u, v⟩ = ⟨u, Av⟩.
  template <class T>
  Mat<T> adjoint(const Mat<T>& a) const {
    auto lift = [&](const QMat& q) {
      Mat<T> out(q.rows(), q.cols());
      for (int i = 0; i < q.rows(); ++i)
        for (int j = 0; j < q.cols(); ++j)
          out(i, j) = q(i, j) * ring_one<T>();
      return out;
    };
    return lift(m_gram_inv) * a.transposed() * lift(m_gram);
  }

  /// ⟨Au, v⟩ + ⟨u, Av⟩ = 0 exactly.
  template <class T>
  bool is_skew_endo(const Mat<T>& a) const {
    return (adjoint(a) + a).is_zero();
  }

  /// Pairwise-orthogonal rational basis (rows of frame components) with
  /// nonzero self-pairings, oriented like the frame (positive change-of-basis
  /// determinant).  Obtained by symmetric Gaussian elimination.
  std::vector<std::vector<Rat>> orthogonal_basis() const {
    QMat a = m_gram;
    int n = m_rank;
    QMat b = QMat::identity(n);  // rows are the basis vectors
    for (int k = 0; k < n; ++k) {
      if (a(k, k) == 0) {
        int jd = -1, jo = -1;
        for (int j = k + 1; j < n; ++j) {
          if (jd < 0 && a(j, j) != 0) jd = j;
          if (jo < 0 && a(k, j) != 0) jo = j;
        }
        if (jd >= 0) {
          for (int t = 0; t < n; ++t) std::swap(a(k, t), a(jd, t));
          for (int t = 0; t < n; ++t) std::swap(a(t, k), a(t, jd));
          for (int t = 0; t < n; ++t) std::swap(b(k, t), b(jd, t));
        } else if (jo >= 0) {
          for (int t = 0; t < n; ++t) a(k, t) += a(jo, t);
          for (int t = 0; t < n; ++t) a(t, k) += a(t, jo);
          for (int t = 0; t < n; ++t) b(k, t) += b(jo, t);
        } else {
          throw internal_check_failure("orthogonal_basis: zero row in invertible gram");
        }
      }
      for (int i = k + 1; i < n; ++i) {
        if (a(i, k) == 0) continue;
        Rat f = a(i, k) / a(k, k);
        for (int t = 0; t < n; ++t) a(i, t) -= f * a(k, t);
        for (int t = 0; t < n; ++t) a(t, i) -= f * a(t, k);
        for (int t = 0; t < n; ++t) b(i, t) -= f * b(k, t);
      }
    }
    // orientation: determinant of the change of basis must be positive
    QMat det_m = b;
    Rat det = 1;
    for (int k = 0; k < n; ++k) {
      int p = -1;
      for (int i = k; i < n; ++i)
        if (det_m(i, k) != 0) {
          p = i;
          break;
        }
      if (p < 0) {
        det = 0;
        break;
      }
      if (p != k) {
        for (int t = 0; t < n; ++t) std::swap(det_m(k, t), det_m(p, t));
        det = -det;
      }
      det *= det_m(k, k);
      for (int i = k + 1; i < n; ++i) {
        if (det_m(i, k) == 0) continue;
        Rat f = det_m(i, k) / det_m(k, k);
        for (int t = k; t < n; ++t) det_m(i, t) -= f * det_m(k, t);
      }
    }
    require(det != 0, "orthogonal_basis: degenerate transform");
    std::vector<std::vector<Rat>> out(n, std::vector<Rat>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i][j] = b(i, j);
    if (det < 0)
      for (int j = 0; j < n; ++j) out[0][j] = -out[0][j];
    return out;
  }

 private:
  /// Rational congruence diagonalization (symmetric Gaussian elimination,
  /// leftmost usable pivot first), counting positive/negative entries.
  static std::pair<int, int> compute_signature(QMat a) {
    int n = a.rows(), pos = 0, neg = 0;
    for (int k = 0; k < n; ++k) {
      if (a(k, k) == 0) {
        int jd = -1, jo = -1;
        for (int j = k + 1; j < n; ++j) {
          if (jd < 0 && a(j, j) != 0) jd = j;
          if (jo < 0 && a(k, j) != 0) jo = j;
        }
        if (jd >= 0) {
          for (int t = 0; t < n; ++t) std::swap(a(k, t), a(jd, t));
          for (int t = 0; t < n; ++t) std::swap(a(t, k), a(t, jd));
        } else if (jo >= 0) {
          for (int t = 0; t < n; ++t) a(k, t) += a(jo, t);
          for (int t = 0; t < n; ++t) a(t, k) += a(t, jo);
        } else {
          continue;  // zero row/column (cannot occur for invertible gram)
        }
      }
      for (int i = k + 1; i < n; ++i) {
        if (a(i, k) == 0) continue;
        Rat f = a(i, k) / a(k, k);
        for (int t = 0; t < n; ++t) a(i, t) -= f * a(k, t);
        for (int t = 0; t < n; ++t) a(t, i) -= f * a(t, k);
      }
      if (a(k, k) > 0)
        ++pos;
      else if (a(k, k) < 0)
        ++neg;
    }
    return {pos, neg};
  }

  int m_rank = 0;
  QMat m_gram, m_gram_inv;
  std::pair<int, int> m_signature;
};

// ---------------------------------------------------------------------------
// Alternating multilinear fields (components on strictly increasing tuples,
// stored as bitmasks over the frame).
// ---------------------------------------------------------------------------

/// Sign of merging two disjoint increasing index sets (number of inversions).
inline int merge_sign(std::uint32_t a, std::uint32_t b) {
  int sign = 1;
  for (std::uint32_t x = b; x; x &= x - 1) {
    std::uint32_t low = x & ~(x - 1);
    // count elements of a strictly greater than this element of b
    int cnt = __builtin_popcount(a & ~(low | (low - 1)));
    if (cnt & 1) sign = -sign;
  }
  return sign;
}

/// Alternating d-linear field on a rank-n frame with TrigPoly coefficients.
/// Used both for forms in Λ^dE* and for polyvectors in Λ^dE; the variance is
/// determined by use.
class Alt {
 public:
  Alt() = default;
  Alt(int frame_rank, int degree) : m_n(frame_rank), m_deg(degree) {
    // degree > frame_rank is allowed and denotes the zero space Λ^d = 0
    require(degree >= 0, "bad form degree");
  }

  int frame_rank() const { return m_n; }
  int degree() const { return m_deg; }
  const std::map<std::uint32_t, TrigPoly>& components() const { return m_comp; }
  bool is_zero() const {
    for (const auto& [mask, c] : m_comp)
      if (!c.is_zero()) return false;
    return true;
  }

  const TrigPoly& coeff(std::uint32_t mask) const {
    static const TrigPoly zero;
    auto it = m_comp.find(mask);
    return it == m_comp.end() ? zero : it->second;
  }
  void add_coeff(std::uint32_t mask, const TrigPoly& c) {
    require(__builtin_popcount(mask) == m_deg && mask < (1u << m_n), "bad component mask");
    if (c.is_zero()) return;
    auto it = m_comp.find(mask);
    if (it == m_comp.end())
      m_comp.emplace(mask, c);
    else {
      it->second += c;
      if (it->second.is_zero()) m_comp.erase(it);
    }
  }

  /// Value on an ordered index tuple (0-based, possibly unsorted; repeats → 0).
  TrigPoly value(std::vector<int> idx) const {
    require(static_cast<int>(idx.size()) == m_deg, "index tuple length mismatch");
    int sign = 1;
    for (size_t i = 0; i < idx.size(); ++i)
      for (size_t j = i + 1; j < idx.size(); ++j) {
        if (idx[i] == idx[j]) return TrigPoly();
        if (idx[i] > idx[j]) {
          std::swap(idx[i], idx[j]);
          sign = -sign;
        }
      }
    std::uint32_t mask = 0;
    for (int i : idx) {
      require(i >= 0 && i < m_n, "frame index out of range");
      mask |= 1u << i;
    }
    return Rat(sign) * coeff(mask);
  }

  friend Alt operator+(const Alt& a, const Alt& b) {
    require(a.m_n == b.m_n && a.m_deg == b.m_deg, "form shape mismatch");
    Alt out = a;
    for (const auto& [mask, c] : b.m_comp) out.add_coeff(mask, c);
    return out;
  }
  friend Alt operator-(const Alt& a) {
    Alt out(a.m_n, a.m_deg);
    for (const auto& [mask, c] : a.m_comp) out.m_comp.emplace(mask, -c);
    return out;
  }
  friend Alt operator-(const Alt& a, const Alt& b) { return a + (-b); }
  friend Alt operator*(const Rat& c, const Alt& a) {
    Alt out(a.m_n, a.m_deg);
    if (c == 0) return out;
    for (const auto& [mask, x] : a.m_comp) out.m_comp.emplace(mask, c * x);
    return out;
  }
  friend Alt operator*(const TrigPoly& c, const Alt& a) {
    Alt out(a.m_n, a.m_deg);
    for (const auto& [mask, x] : a.m_comp) out.add_coeff(mask, c * x);
    return out;
  }
  Alt& operator+=(const Alt& b) { return *this = *this + b; }
  Alt& operator-=(const Alt& b) { return *this = *this - b; }
  friend bool operator==(const Alt& a, const Alt& b) {
    require(a.m_n == b.m_n && a.m_deg == b.m_deg, "form shape mismatch");
    return (a - b).is_zero();
  }
  friend bool operator!=(const Alt& a, const Alt& b) { return !(a == b); }

  friend Alt wedge(const Alt& a, const Alt& b) {
    require(a.m_n == b.m_n, "wedge frame mismatch");
    Alt out(a.m_n, a.m_deg + b.m_deg);
    for (const auto& [ma, ca] : a.m_comp)
      for (const auto& [mb, cb] : b.m_comp) {
        if (ma & mb) continue;
        out.add_coeff(ma | mb, Rat(merge_sign(ma, mb)) * (ca * cb));
      }
    return out;
  }

  /// Interior product with a frame-component vector: (ι_v α)(...) = α(v, ...).
  template <class T>
  friend Alt interior(const std::vector<T>& v, const Alt& a) {
    require(static_cast<int>(v.size()) == a.m_n, "interior product shape mismatch");
    Alt out(a.m_n, a.m_deg - 1);
    for (const auto& [mask, c] : a.m_comp) {
      int pos = 0;
      for (std::uint32_t x = mask; x; x &= x - 1, ++pos) {
        int i = __builtin_ctz(x);
        if (v[i] == ring_zero<T>()) continue;
        int sign = (pos & 1) ? -1 : 1;
        out.add_coeff(mask & ~(1u << i), Rat(sign) * (v[i] * c));
      }
    }
    return out;
  }

  /// Apply the musical isomorphism g⁻¹ (or any matrix) to every slot.
  Alt map_slots(const QMat& m) const {
    require(m.rows() == m_n && m.cols() == m_n, "slot map shape mismatch");
    Alt out(m_n, m_deg);
    // expand α'(i₁..i_d) = Σ m(i₁,j₁)...m(i_d,j_d) α(j₁..j_d)
    for (const auto& [mask, c] : m_comp) {
      std::vector<int> js;
      for (std::uint32_t x = mask; x; x &= x - 1) js.push_back(__builtin_ctz(x));
      // iterate over all target tuples via recursion on slots
      std::vector<int> tgt(m_deg);
      std::function<void(int, Rat)> go = [&](int slot, Rat f) {
        if (f == 0) return;
        if (slot == m_deg) {
          // add f·c to the alternating component of tgt
          std::vector<int> t = tgt;
          int sign = 1;
          for (size_t i = 0; i < t.size(); ++i)
            for (size_t j = i + 1; j < t.size(); ++j) {
              if (t[i] == t[j]) return;
              if (t[i] > t[j]) {
                std::swap(t[i], t[j]);
                sign = -sign;
              }
            }
          std::uint32_t tmask = 0;
          for (int i : t) tmask |= 1u << i;
          out.add_coeff(tmask, Rat(sign * 1) * (f * c));
          return;
        }
        for (int i = 0; i < m_n; ++i) {
          if (m(i, js[slot]) == 0) continue;
          tgt[slot] = i;
          go(slot + 1, f * m(i, js[slot]));
        }
      };
      go(0, Rat(1));
    }
    return out;
  }

 private:
  int m_n = 0, m_deg = 0;
  std::map<std::uint32_t, TrigPoly> m_comp;
};

/// Raise every index of a covariant alternating field (Λ^dE* → Λ^dE).
inline Alt raise_all(const QuadSpace& q, const Alt& a) { return a.map_slots(q.gram_inv()); }
/// Lower every index (Λ^dE → Λ^dE*).
inline Alt lower_all(const QuadSpace& q, const Alt& a) { return a.map_slots(q.gram()); }

// ---------------------------------------------------------------------------
// Dense tensors of arbitrary small valence with per-slot variance.
// ---------------------------------------------------------------------------

/// Dense tensor field over the frame: one TrigPoly per multi-index, with a
/// variance flag per slot (true = contravariant / vector slot).
class Tensor {
 public:
  Tensor() = default;
  Tensor(int frame_rank, std::vector<bool> contravariant)
      : m_n(frame_rank), m_var(std::move(contravariant)) {
    std::size_t sz = 1;
    for (size_t i = 0; i < m_var.size(); ++i) sz *= m_n;
    m_data.assign(sz, TrigPoly());
  }

  int frame_rank() const { return m_n; }
  int order() const { return static_cast<int>(m_var.size()); }
  const std::vector<bool>& variance() const { return m_var; }

  TrigPoly& at(const std::vector<int>& idx) { return m_data.at(flatten(idx)); }
  const TrigPoly& at(const std::vector<int>& idx) const { return m_data.at(flatten(idx)); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.m_n == b.m_n && a.m_var == b.m_var && a.m_data == b.m_data;
  }

  /// Musical isomorphism applied at one slot (raise uses g⁻¹, lower uses g).
  Tensor musical(const QuadSpace& q, int slot, bool raise) const {
    require(slot >= 0 && slot < order(), "invalid tensor slot");
    require(m_var[slot] != raise, raise ? "slot already contravariant" : "slot already covariant");
    const QMat& m = raise ? q.gram_inv() : q.gram();
    Tensor out(m_n, m_var);
    out.m_var[slot] = raise;
    std::vector<int> idx(order(), 0);
    do {
      TrigPoly s;
      std::vector<int> src = idx;
      for (int j = 0; j < m_n; ++j) {
        if (m(idx[slot], j) == 0) continue;
        src[slot] = j;
        s += m(idx[slot], j) * at(src);
      }
      out.at(idx) = s;
    } while (next_index(idx));
    return out;
  }

  /// Iterate multi-indices; returns false after the last one.
  bool next_index(std::vector<int>& idx) const {
    for (int s = order() - 1; s >= 0; --s) {
      if (++idx[s] < m_n) return true;
      idx[s] = 0;
    }
    return false;
  }

 private:
  std::size_t flatten(const std::vector<int>& idx) const {
    require(idx.size() == m_var.size(), "tensor index arity mismatch");
    std::size_t f = 0;
    for (int i : idx) {
      require(i >= 0 && i < m_n, "tensor index out of range");
      f = f * m_n + i;
    }
    return f;
  }

  int m_n = 0;
  std::vector<bool> m_var;
  std::vector<TrigPoly> m_data;
};

/// Full antisymmetrization of a (0,3) tensor, normalized so alternating
/// input is returned unchanged.
inline Alt skew3(const Tensor& t) {
  require(t.order() == 3, "skew3 expects a 3-tensor");
  int n = t.frame_rank();
  Alt out(n, 3);
  static const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        int base[3] = {i, j, k};
        TrigPoly s;
        for (int p = 0; p < 6; ++p) {
          Rat sgn(p < 3 ? 1 : -1);
          s += sgn * t.at({base[perms[p][0]], base[perms[p][1]], base[perms[p][2]]});
        }
        out.add_coeff((1u << i) | (1u << j) | (1u << k), Rat(1, 6) * s);
      }
  return out;
}

inline bool is_totally_skew(const Tensor& t) {
  require(t.order() == 3, "is_totally_skew expects a 3-tensor");
  int n = t.frame_rank();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (t.at({i, j, k}) != -t.at({j, i, k})) return false;
        if (t.at({i, j, k}) != -t.at({i, k, j})) return false;
      }
  return true;
}

/// The paper's bivector-to-endomorphism convention, extended linearly from
/// (e₁∧e₂)(e₃) := ⟨e₁,e₃⟩e₂ − ⟨e₂,e₃⟩e₁ — input is a polyvector in Λ²E.
inline TMat bivector_as_endo(const QuadSpace& q, const Alt& b) {
  require(b.degree() == 2, "bivector_as_endo expects degree 2");
  int n = q.rank();
  TMat out(n, n);
  for (const auto& [mask, c] : b.components()) {
    int i = __builtin_ctz(mask);
    int j = __builtin_ctz(mask & (mask - 1));
    for (int k = 0; k < n; ++k) {
      if (q.gram()(i, k) != 0) out(j, k) += q.gram()(i, k) * c;
      if (q.gram()(j, k) != 0) out(i, k) -= q.gram()(j, k) * c;
    }
  }
  return out;
}

}  // namespace ck
