#include <doctest.h>

#include "ck/linalg.hpp"
#include "test_util.hpp"

using namespace ck;

namespace {
QMat diag(std::vector<Rat> d) {
  QMat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}
}  // namespace

TEST_CASE("signature by rational congruence diagonalization") {
  CHECK(QuadSpace(diag({1, 1, -1, -1})).signature() == std::pair<int, int>{2, 2});
  CHECK(QuadSpace(diag({1, -1})).signature() == std::pair<int, int>{1, 1});
  CHECK(QuadSpace(diag({1, 1, 1, 1, -1, -1, -1, -1})).signature() == std::pair<int, int>{4, 4});
  // hyperbolic plane: off-diagonal pairing has signature (1,1)
  QMat h(2, 2);
  h(0, 1) = h(1, 0) = Rat(1, 2);
  QuadSpace qh(h);
  CHECK(qh.signature() == std::pair<int, int>{1, 1});
  CHECK(qh.is_neutral());
  // non-symmetric and singular grams rejected
  QMat ns(2, 2);
  ns(0, 1) = 1;
  CHECK_THROWS_AS((void)QuadSpace(ns), error);
  CHECK_THROWS_AS((void)QuadSpace(diag({1, 0})), error);
}

TEST_CASE("rational rref / solve / kernel") {
  QMat a(2, 3);
  a(0, 0) = 1;
  a(0, 1) = 2;
  a(0, 2) = 3;
  a(1, 0) = 2;
  a(1, 1) = 4;
  a(1, 2) = 7;
  CHECK(rank(a) == 2);
  QMat k = kernel(a);
  CHECK(k.cols() == 1);
  CHECK((a * k).is_zero());
  QMat b(2, 1);
  b(0, 0) = 1;
  b(1, 0) = 2;
  auto x = solve(a, b);
  REQUIRE(x.has_value());
  CHECK(a * *x == b);
  // inconsistent system
  QMat a2(2, 1), b2(2, 1);
  a2(0, 0) = 1;
  a2(1, 0) = 1;
  b2(0, 0) = 1;
  b2(1, 0) = 2;
  CHECK(!solve(a2, b2).has_value());
}

TEST_CASE("constant system with trig-polynomial right-hand side") {
  QMat a(2, 2);
  a(0, 0) = 1;
  a(0, 1) = 1;
  a(1, 0) = 1;
  a(1, 1) = -1;
  std::vector<TrigPoly> b = {TrigPoly::cos1(1, 0), TrigPoly::sin1(1, 0)};
  auto x = solve_const_system(a, b, 1);
  REQUIRE(x.has_value());
  for (int i = 0; i < 2; ++i) {
    TrigPoly s;
    for (int j = 0; j < 2; ++j) s += a(i, j) * (*x)[j];
    CHECK(s == b[i]);
  }
}

TEST_CASE("generic rank and ring kernel over the function ring") {
  // [cos θ, sin θ; −sin θ, cos θ] is invertible everywhere: rank 2
  EMat r(2, 2);
  r(0, 0) = ExpPoly::from_trig(TrigPoly::cos1(1, 0));
  r(0, 1) = ExpPoly::from_trig(TrigPoly::sin1(1, 0));
  r(1, 0) = ExpPoly::from_trig(Rat(-1) * TrigPoly::sin1(1, 0));
  r(1, 1) = ExpPoly::from_trig(TrigPoly::cos1(1, 0));
  CHECK(generic_rank(r) == 2);
  CHECK(ring_kernel(r).empty());

  // rank-1 matrix [cosθ, sinθ; cosθ·cosθ, cosθ·sinθ] has a 1-dim kernel
  EMat s(2, 2);
  s(0, 0) = r(0, 0);
  s(0, 1) = r(0, 1);
  s(1, 0) = r(0, 0) * r(0, 0);
  s(1, 1) = r(0, 0) * r(0, 1);
  CHECK(generic_rank(s) == 1);
  auto ker = ring_kernel(s);
  REQUIRE(ker.size() == 1);
  bool nonzero = false;
  for (const auto& e : ker[0]) nonzero = nonzero || !e.is_zero();
  CHECK(nonzero);
  for (int i = 0; i < 2; ++i) {
    ExpPoly acc;
    for (int j = 0; j < 2; ++j) acc += s(i, j) * ker[0][j];
    CHECK(acc.is_zero());
  }

  // random ring matrices: echelon rank matches grid-sampled max rank bound
  testutil::Rng rng(29);
  for (int t = 0; t < 8; ++t) {
    EMat m(3, 4);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = ExpPoly::from_trig(rng.trig(1, 2, 1));
    int rk = generic_rank(m);
    auto ker2 = ring_kernel(m);
    CHECK(static_cast<int>(ker2.size()) == 4 - rk);
    for (const auto& v : ker2)
      for (int i = 0; i < 3; ++i) {
        ExpPoly acc;
        for (int j = 0; j < 4; ++j) acc += m(i, j) * v[j];
        CHECK(acc.is_zero());
      }
  }
}

TEST_CASE("musical isomorphisms") {
  QuadSpace q(diag({1, -1}));
  Tensor e1(2, {true});
  e1.at({0}) = TrigPoly::constant(2, 1);
  Tensor low = e1.musical(q, 0, false);
  CHECK(low.at({0}) == TrigPoly::constant(2, 1));
  CHECK(low.at({1}).is_zero());
  Tensor e2(2, {true});
  e2.at({1}) = TrigPoly::constant(2, 1);
  CHECK(e2.musical(q, 0, false).at({1}) == TrigPoly::constant(2, Rat(-1)));

  testutil::Rng rng(31);
  QuadSpace q2(diag({2, -1, Rat(1, 3)}));
  for (int t = 0; t < 5; ++t) {
    Tensor r(3, {false, true});
    std::vector<int> idx(2, 0);
    do {
      r.at(idx) = rng.trig(2);
    } while (r.next_index(idx));
    CHECK(r.musical(q2, 0, true).musical(q2, 0, false) == r);
    CHECK(r.musical(q2, 1, false).musical(q2, 1, true) == r);
  }
}

TEST_CASE("bivector-to-endomorphism convention") {
  QuadSpace q2(diag({1, 1}));
  Alt b(2, 2);
  b.add_coeff(0b11, TrigPoly::constant(0, 1));  // e₁∧e₂
  TMat endo = bivector_as_endo(q2, b);
  // (e₁∧e₂)(e₁) = e₂ and (e₁∧e₂)(e₂) = −e₁
  CHECK(endo(1, 0) == ring_one<TrigPoly>());
  CHECK(endo(0, 0).is_zero());
  CHECK(endo(0, 1) == TrigPoly::constant(0, Rat(-1)));
  CHECK(q2.is_skew_endo(endo));

  QuadSpace q3(diag({1, 1, 1}));
  Alt b3(3, 2);
  b3.add_coeff(0b011, TrigPoly::constant(0, 1));
  TMat endo3 = bivector_as_endo(q3, b3);
  CHECK(endo3(0, 2).is_zero());  // (e₁∧e₂)(e₃) = 0
  CHECK(endo3(1, 2).is_zero());
  CHECK(endo3(2, 2).is_zero());
  CHECK(q3.is_skew_endo(endo3));

  // skewness for random bivectors under a non-diagonal gram
  QMat h(2, 2);
  h(0, 1) = h(1, 0) = Rat(1, 2);
  QuadSpace qh(h);
  testutil::Rng rng(37);
  for (int t = 0; t < 5; ++t) {
    Alt br(2, 2);
    br.add_coeff(0b11, rng.trig(1));
    CHECK(qh.is_skew_endo(bivector_as_endo(qh, br)));
  }
}

TEST_CASE("wedge and interior products") {
  testutil::Rng rng(41);
  int n = 4;
  for (int t = 0; t < 6; ++t) {
    Alt xi(n, 1), eta(n, 1);
    for (int i = 0; i < n; ++i) {
      xi.add_coeff(1u << i, rng.trig(1));
      eta.add_coeff(1u << i, rng.trig(1));
    }
    auto x = rng.section(n, 1);
    // antiderivation on degree 2: ι_X(ξ∧η) = ξ(X)η − η(X)ξ
    TrigPoly xiX, etaX;
    for (int i = 0; i < n; ++i) {
      xiX += xi.coeff(1u << i) * x[i];
      etaX += eta.coeff(1u << i) * x[i];
    }
    CHECK(interior(x, wedge(xi, eta)) == xiX * eta - etaX * xi);
    // odd-degree square is zero, graded commutativity
    CHECK(wedge(xi, xi).is_zero());
    CHECK(wedge(xi, eta) == -wedge(eta, xi));
    // ι² = 0 on a random 3-form
    Alt a(n, 3);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
      if (__builtin_popcount(mask) == 3) a.add_coeff(mask, rng.trig(1));
    CHECK(interior(x, interior(x, a)).is_zero());
  }
}

TEST_CASE("interior is an antiderivation") {
  testutil::Rng rng(43);
  int n = 4;
  for (int t = 0; t < 5; ++t) {
    Alt a(n, 2), b(n, 2);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
      if (__builtin_popcount(mask) == 2) {
        a.add_coeff(mask, rng.trig(1));
        b.add_coeff(mask, rng.trig(1));
      }
    auto x = rng.section(n, 1);
    Alt lhs = interior(x, wedge(a, b));
    Alt rhs = wedge(interior(x, a), b) + wedge(a, interior(x, b));  // |a| even
    CHECK(lhs == rhs);
  }
}

TEST_CASE("skew3 and total skewness") {
  int n = 2;
  // symmetric input → 0
  Tensor sym(n, {false, false, false});
  std::vector<int> idx(3, 0);
  testutil::Rng rng(47);
  do {
    std::vector<int> s = idx;
    std::sort(s.begin(), s.end());
    if (s == idx) sym.at(idx) = rng.trig(1);
  } while (sym.next_index(idx));
  // symmetrize fully
  Tensor symm(n, {false, false, false});
  idx.assign(3, 0);
  do {
    std::vector<int> s = idx;
    std::sort(s.begin(), s.end());
    symm.at(idx) = sym.at(s);
  } while (symm.next_index(idx));
  CHECK(skew3(symm).is_zero());

  // alternating input → itself
  int n4 = 4;
  Alt a(n4, 3);
  for (std::uint32_t mask = 0; mask < (1u << n4); ++mask)
    if (__builtin_popcount(mask) == 3) a.add_coeff(mask, rng.trig(1));
  Tensor t(n4, {false, false, false});
  idx.assign(3, 0);
  do {
    t.at(idx) = a.value(idx);
  } while (t.next_index(idx));
  CHECK(is_totally_skew(t));
  CHECK(skew3(t) == a);

  // product-type tensor t(u,v,w) = ⟨u,v⟩c(w) antisymmetrizes to 0
  QuadSpace q(QMat::identity(2));
  Tensor p(2, {false, false, false});
  idx.assign(3, 0);
  do {
    p.at(idx) = q.gram()(idx[0], idx[1]) * rng.trig(1);
  } while (p.next_index(idx));
  // not exactly the spec's example shape, so rebuild: t(u,v,w) = g(u,v)·f(w)
  Tensor p2(2, {false, false, false});
  TrigPoly f = rng.trig(1);
  idx.assign(3, 0);
  do {
    p2.at(idx) = q.gram()(idx[0], idx[1]) * f;
  } while (p2.next_index(idx));
  CHECK(skew3(p2).is_zero());
  CHECK(!is_totally_skew(p2));
}
