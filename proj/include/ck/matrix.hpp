#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ck/exppoly.hpp"
#include "ck/laurent.hpp"

namespace ck {

template <class T>
inline T ring_zero() {
  return T{};
}
template <class T>
inline T ring_one();
template <>
inline Rat ring_one<Rat>() {
  return Rat(1);
}
template <>
inline TrigPoly ring_one<TrigPoly>() {
  return TrigPoly::constant(0, Rat(1));
}
template <>
inline ExpPoly ring_one<ExpPoly>() {
  return ExpPoly::constant(0, GRat(1));
}

/// Dense rows×cols matrix over an exact coefficient ring (Rat, TrigPoly,
/// ExpPoly, ...). Value-semantic and small: everything in this project is
/// at most rank ~16.
template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : m_rows(rows), m_cols(cols), m_data(rows * cols) {}

  static Mat identity(int n) {
    Mat out(n, n);
    for (int i = 0; i < n; ++i) out(i, i) = ring_one<T>();
    return out;
  }

  int rows() const { return m_rows; }
  int cols() const { return m_cols; }
  T& operator()(int i, int j) { return m_data.at(i * m_cols + j); }
  const T& operator()(int i, int j) const { return m_data.at(i * m_cols + j); }

  bool is_zero() const {
    for (const auto& x : m_data)
      if (!(x == ring_zero<T>())) return false;
    return true;
  }

  friend Mat operator+(const Mat& a, const Mat& b) {
    require(a.m_rows == b.m_rows && a.m_cols == b.m_cols, "matrix shape mismatch");
    Mat out(a.m_rows, a.m_cols);
    for (size_t i = 0; i < a.m_data.size(); ++i) out.m_data[i] = a.m_data[i] + b.m_data[i];
    return out;
  }
  friend Mat operator-(const Mat& a, const Mat& b) {
    require(a.m_rows == b.m_rows && a.m_cols == b.m_cols, "matrix shape mismatch");
    Mat out(a.m_rows, a.m_cols);
    for (size_t i = 0; i < a.m_data.size(); ++i) out.m_data[i] = a.m_data[i] - b.m_data[i];
    return out;
  }
  friend Mat operator-(const Mat& a) {
    Mat out(a.m_rows, a.m_cols);
    for (size_t i = 0; i < a.m_data.size(); ++i) out.m_data[i] = -a.m_data[i];
    return out;
  }
  friend Mat operator*(const Mat& a, const Mat& b) {
    require(a.m_cols == b.m_rows, "matrix product shape mismatch");
    Mat out(a.m_rows, b.m_cols);
    for (int i = 0; i < a.m_rows; ++i)
      for (int k = 0; k < a.m_cols; ++k) {
        if (a(i, k) == ring_zero<T>()) continue;
        for (int j = 0; j < b.m_cols; ++j) out(i, j) = out(i, j) + a(i, k) * b(k, j);
      }
    return out;
  }
  template <class S>
  friend Mat operator*(const S& c, const Mat& a) {
    Mat out(a.m_rows, a.m_cols);
    for (size_t i = 0; i < a.m_data.size(); ++i) out.m_data[i] = c * a.m_data[i];
    return out;
  }
  friend bool operator==(const Mat& a, const Mat& b) {
    return a.m_rows == b.m_rows && a.m_cols == b.m_cols && a.m_data == b.m_data;
  }
  friend bool operator!=(const Mat& a, const Mat& b) { return !(a == b); }

  Mat transposed() const {
    Mat out(m_cols, m_rows);
    for (int i = 0; i < m_rows; ++i)
      for (int j = 0; j < m_cols; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  std::vector<T> apply(const std::vector<T>& v) const {
    require(static_cast<int>(v.size()) == m_cols, "matrix·vector shape mismatch");
    std::vector<T> out(m_rows, ring_zero<T>());
    for (int i = 0; i < m_rows; ++i)
      for (int j = 0; j < m_cols; ++j) out[i] = out[i] + (*this)(i, j) * v[j];
    return out;
  }

  template <class F>
  auto map(F f) const -> Mat<decltype(f(std::declval<T>()))> {
    Mat<decltype(f(std::declval<T>()))> out(m_rows, m_cols);
    for (int i = 0; i < m_rows; ++i)
      for (int j = 0; j < m_cols; ++j) out(i, j) = f((*this)(i, j));
    return out;
  }

 private:
  int m_rows = 0, m_cols = 0;
  std::vector<T> m_data;
};

using QMat = Mat<Rat>;
using TMat = Mat<TrigPoly>;
using EMat = Mat<ExpPoly>;

// ---------------------------------------------------------------------------
// Exact linear algebra over ℚ.
// ---------------------------------------------------------------------------

/// In-place reduced row echelon form; returns the pivot columns (leftmost
/// pivot tie-breaking: first nonzero entry scanning down each column).
inline std::vector<int> rref(QMat& a) {
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < a.cols() && row < a.rows(); ++col) {
    int p = -1;
    for (int i = row; i < a.rows(); ++i)
      if (a(i, col) != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    if (p != row)
      for (int j = 0; j < a.cols(); ++j) std::swap(a(p, j), a(row, j));
    Rat inv = Rat(1) / a(row, col);
    for (int j = 0; j < a.cols(); ++j) a(row, j) *= inv;
    for (int i = 0; i < a.rows(); ++i) {
      if (i == row || a(i, col) == 0) continue;
      Rat f = a(i, col);
      for (int j = 0; j < a.cols(); ++j) a(i, j) -= f * a(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline int rank(QMat a) { return static_cast<int>(rref(a).size()); }

/// Solve A·x = b (multiple right-hand sides as columns of b). Returns the
/// particular solution with all free variables 0, or nullopt if inconsistent.
inline std::optional<QMat> solve(const QMat& a, const QMat& b) {
  require(a.rows() == b.rows(), "solve: shape mismatch");
  QMat aug(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
    for (int j = 0; j < b.cols(); ++j) aug(i, a.cols() + j) = b(i, j);
  }
  std::vector<int> pivots = rref(aug);
  for (int p : pivots)
    if (p >= a.cols()) return std::nullopt;
  QMat x(a.cols(), b.cols());
  for (size_t r = 0; r < pivots.size(); ++r)
    for (int j = 0; j < b.cols(); ++j) x(pivots[r], j) = aug(static_cast<int>(r), a.cols() + j);
  return x;
}

/// Basis of ker A as columns.
inline QMat kernel(const QMat& a0) {
  QMat a = a0;
  std::vector<int> pivots = rref(a);
  std::vector<bool> is_pivot(a.cols(), false);
  for (int p : pivots) is_pivot[p] = true;
  std::vector<int> free_cols;
  for (int j = 0; j < a.cols(); ++j)
    if (!is_pivot[j]) free_cols.push_back(j);
  QMat out(a.cols(), static_cast<int>(free_cols.size()));
  for (size_t f = 0; f < free_cols.size(); ++f) {
    out(free_cols[f], static_cast<int>(f)) = 1;
    for (size_t r = 0; r < pivots.size(); ++r)
      out(pivots[r], static_cast<int>(f)) = -a(static_cast<int>(r), free_cols[f]);
  }
  return out;
}

inline QMat inverse(const QMat& a) {
  require(a.rows() == a.cols(), "inverse of non-square matrix");
  auto x = solve(a, QMat::identity(a.rows()));
  require(x.has_value(), "matrix not invertible");
  return *x;
}

/// Solve the constant rational system A·x = b where b has TrigPoly entries,
/// coefficient-by-coefficient per trigonometric basis term.
inline std::optional<std::vector<TrigPoly>> solve_const_system(const QMat& a,
                                                              const std::vector<TrigPoly>& b,
                                                              int torus_dim) {
  require(a.rows() == static_cast<int>(b.size()), "solve_const_system: shape mismatch");
  std::map<TrigKey, QMat> rhs_by_key;
  for (int i = 0; i < a.rows(); ++i) {
    const TrigPoly bi = b[i].promoted(torus_dim);
    for (const auto& [key, c] : bi.terms()) {
      auto it = rhs_by_key.find(key);
      if (it == rhs_by_key.end()) it = rhs_by_key.emplace(key, QMat(a.rows(), 1)).first;
      it->second(i, 0) = c;
    }
  }
  std::vector<TrigPoly> x(a.cols(), TrigPoly(torus_dim));
  for (const auto& [key, rhs] : rhs_by_key) {
    auto sol = solve(a, rhs);
    if (!sol) return std::nullopt;
    for (int j = 0; j < a.cols(); ++j)
      if ((*sol)(j, 0) != 0) x[j].add_term(key.is_sin, key.k, (*sol)(j, 0));
  }
  return x;
}

// ---------------------------------------------------------------------------
// Exact linear algebra over the function ring (fraction-free Bareiss).
// ---------------------------------------------------------------------------

namespace detail {
/// Fraction-free row echelon reduction (Bareiss). Returns pivot (row, col)
/// pairs; the matrix is mutated to echelon form with exact-minor entries.
inline std::vector<std::pair<int, int>> bareiss_echelon(EMat& m) {
  std::vector<std::pair<int, int>> pivots;
  ExpPoly prev = ExpPoly::constant(m.rows() ? m(0, 0).torus_dim() : 0, GRat(1));
  int row = 0;
  for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
    int p = -1;
    std::size_t best = 0;
    for (int i = row; i < m.rows(); ++i)
      if (!m(i, col).is_zero() && (p < 0 || m(i, col).term_count() < best)) {
        p = i;
        best = m(i, col).term_count();
      }
    if (p < 0) continue;
    if (p != row)
      for (int j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(row, j));
    for (int i = row + 1; i < m.rows(); ++i) {
      for (int j = col + 1; j < m.cols(); ++j) {
        ExpPoly num = m(row, col) * m(i, j) - m(i, col) * m(row, j);
        if (num.is_zero()) {
          m(i, j) = ExpPoly(num.torus_dim());
          continue;
        }
        auto q = ExpPoly::exact_div(num, prev);
        if (!q) throw internal_check_failure("Bareiss division not exact");
        m(i, j) = *q;
      }
      m(i, col) = ExpPoly(m(i, col).torus_dim());
    }
    prev = m(row, col);
    pivots.emplace_back(row, col);
    ++row;
  }
  return pivots;
}
}  // namespace detail

/// Rank of a matrix over the fraction field of the function ring (i.e. the
/// generic pointwise rank on the torus).
inline int generic_rank(EMat m) { return static_cast<int>(detail::bareiss_echelon(m).size()); }

/// Basis of the kernel of A over the function field, with entries cleared to
/// honest ring elements (each basis vector is scaled by pivot products).
inline std::vector<std::vector<ExpPoly>> ring_kernel(EMat m) {
  int dim = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) dim = std::max(dim, m(i, j).torus_dim());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = m(i, j).promoted(dim);
  auto pivots = detail::bareiss_echelon(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto [r, c] : pivots) is_pivot[c] = true;
  std::vector<std::vector<ExpPoly>> out;
  for (int jf = 0; jf < m.cols(); ++jf) {
    if (is_pivot[jf]) continue;
    std::vector<ExpPoly> x(m.cols(), ExpPoly(dim));
    x[jf] = ExpPoly::constant(dim, GRat(1));
    for (int r = static_cast<int>(pivots.size()) - 1; r >= 0; --r) {
      auto [prow, pcol] = pivots[r];
      ExpPoly s(dim);
      for (int j = pcol + 1; j < m.cols(); ++j)
        if (!x[j].is_zero()) s += m(prow, j) * x[j];
      // enforce piv·x[pcol] + s = 0 while keeping entries in the ring:
      // scale every other component by the pivot, then set x[pcol] = −s.
      for (int j = 0; j < m.cols(); ++j)
        if (j != pcol) x[j] = m(prow, pcol) * x[j];
      x[pcol] = -s;
    }
    // divide out the polynomial content (pivot-product artifacts), so that
    // each basis vector has the true vanishing locus of the line it spans
    x = laurent_primitive(x);
    // normalize the rational content for readability
    Int num_gcd = 0;
    Int den_lcm = 1;
    for (const auto& e : x)
      for (const auto& [k, c] : e.terms())
        for (const Rat* r2 : {&c.re, &c.im}) {
          if (*r2 == 0) continue;
          num_gcd = boost::multiprecision::gcd(num_gcd, boost::multiprecision::abs(numerator(*r2)));
          den_lcm = boost::multiprecision::lcm(den_lcm, denominator(*r2));
        }
    if (num_gcd != 0) {
      GRat scale{Rat(den_lcm, num_gcd)};
      for (auto& e : x) e = scale * e;
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace ck
