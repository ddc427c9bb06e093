#include <doctest.h>

#include "ck/clifford.hpp"
#include "test_util.hpp"

using namespace ck;

namespace {
QMat diag(std::vector<Rat> d) {
  QMat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

/// Hyperbolic gram of rank 2n: ⟨u_a, w_b⟩ = ½δ_ab (u's first, then w's),
/// the shape of the exact model T*M-pairing.
QMat hyperbolic(int n, Rat half = Rat(1, 2)) {
  QMat g(2 * n, 2 * n);
  for (int a = 0; a < n; ++a) g(a, n + a) = g(n + a, a) = half;
  return g;
}

SpinorModule standard_module(int n) {
  QuadSpace q(hyperbolic(n));
  std::vector<std::vector<Rat>> w(n, std::vector<Rat>(2 * n, Rat(0)));
  std::vector<std::vector<Rat>> u(n, std::vector<Rat>(2 * n, Rat(0)));
  for (int a = 0; a < n; ++a) {
    w[a][n + a] = 1;  // covector half
    u[a][a] = 1;      // vector half
  }
  return SpinorModule(q, w, u);
}

std::vector<ExpPoly> csec(const std::vector<TrigPoly>& v) {
  std::vector<ExpPoly> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(ExpPoly::from_trig(x));
  return out;
}
}  // namespace

TEST_CASE("Clifford relation and polarization") {
  QuadSpace q(diag({1, -1}));
  auto e1 = CliffordElement::generator(q, 0);
  auto e2 = CliffordElement::generator(q, 1);
  CHECK(e1 * e1 == CliffordElement::scalar(q, ring_one<ExpPoly>()));
  CHECK(e2 * e2 == Rat(-1) * CliffordElement::scalar(q, ring_one<ExpPoly>()));
  CHECK((e1 * e2 + e2 * e1).is_zero());
}

TEST_CASE("Clifford product: associativity and v·v = ⟨v,v⟩ on random data") {
  testutil::Rng rng(53);
  QMat h = hyperbolic(2);
  h(0, 0) = 1;  // still symmetric invertible, non-diagonal
  QuadSpace q(h);
  for (int t = 0; t < 8; ++t) {
    CliffordElement a(q), b(q), c(q);
    for (int s = 0; s < 3; ++s) {
      a.add_blade(static_cast<std::uint32_t>(rng.uniform(0, 15)), ExpPoly::from_trig(rng.trig(1)));
      b.add_blade(static_cast<std::uint32_t>(rng.uniform(0, 15)), ExpPoly::from_trig(rng.trig(1)));
      c.add_blade(static_cast<std::uint32_t>(rng.uniform(0, 15)), ExpPoly::from_trig(rng.trig(1)));
    }
    CHECK((a * b) * c == a * (b * c));
    auto v = CliffordElement::vector(q, rng.section(4, 1));
    std::vector<TrigPoly> comps = rng.section(4, 1);
    auto vv = CliffordElement::vector(q, comps);
    TrigPoly norm;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) norm += h(i, j) * comps[i] * comps[j];
    CHECK(vv * vv == CliffordElement::scalar(q, ExpPoly::from_trig(norm)));
  }
}

TEST_CASE("uvw − wuv = −2⟨u,w⟩v + 2⟨v,w⟩u") {
  testutil::Rng rng(59);
  QuadSpace q(hyperbolic(2));
  for (int t = 0; t < 10; ++t) {
    auto uc = rng.section(4, 1), vc = rng.section(4, 1), wc = rng.section(4, 1);
    auto u = CliffordElement::vector(q, uc);
    auto v = CliffordElement::vector(q, vc);
    auto w = CliffordElement::vector(q, wc);
    TrigPoly uw = q.pair(uc, wc), vw = q.pair(vc, wc);
    CliffordElement rhs =
        Rat(-2) * (ExpPoly::from_trig(uw) * v) + Rat(2) * (ExpPoly::from_trig(vw) * u);
    CHECK(u * v * w - w * u * v == rhs);
  }
}

TEST_CASE("quantization of a 2-vector: λ(e_i∧e_j) = e_i e_j − ⟨e_i,e_j⟩") {
  QMat h = hyperbolic(2);
  QuadSpace q(h);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      Alt b(4, 2);
      b.add_coeff((1u << i) | (1u << j), ring_one<TrigPoly>());
      auto ei = CliffordElement::generator(q, i);
      auto ej = CliffordElement::generator(q, j);
      CHECK(quantize(q, b) ==
            ei * ej - CliffordElement::scalar(q, ExpPoly::constant(0, GRat(h(i, j)))));
    }
}

TEST_CASE("spinor module: exterior-algebra action") {
  SpinorModule mod = standard_module(2);
  // (X+ξ)·α = ι_Xα + ξ∧α and γ_v² = ⟨v,v⟩
  testutil::Rng rng(61);
  for (int t = 0; t < 10; ++t) {
    auto vc = rng.section(4, 1);
    EMat gv = mod.gamma_section(vc);
    EMat sq = gv * gv;
    ExpPoly norm = ExpPoly::from_trig(mod.space().pair(vc, vc));
    EMat expect(mod.dim(), mod.dim());
    for (int i = 0; i < mod.dim(); ++i) expect(i, i) = norm;
    CHECK(sq == expect);
  }
  // explicit: γ_{u₁} ξ₁ = 2⟨u₁,w₁⟩·1 = 1, γ_{w₁} 1 = ξ₁
  Spinor xi1 = mod.basis_spinor(0b01);
  std::vector<ExpPoly> u1(4);
  u1[0] = ring_one<ExpPoly>();
  Spinor res = mod.gamma_section(u1).apply(xi1);
  CHECK(res[0] == ring_one<ExpPoly>());
  std::vector<ExpPoly> w1(4);
  w1[2] = ring_one<ExpPoly>();
  Spinor res2 = mod.gamma_section(w1).apply(mod.basis_spinor(0));
  CHECK(res2[0b01] == ring_one<ExpPoly>());
}

TEST_CASE("gamma is an algebra morphism") {
  SpinorModule mod = standard_module(2);
  const QuadSpace& q = mod.space();
  testutil::Rng rng(67);
  for (int t = 0; t < 8; ++t) {
    CliffordElement a(q), b(q);
    for (int s = 0; s < 3; ++s) {
      a.add_blade(static_cast<std::uint32_t>(rng.uniform(0, 15)), ExpPoly::from_trig(rng.trig(1)));
      b.add_blade(static_cast<std::uint32_t>(rng.uniform(0, 15)), ExpPoly::from_trig(rng.trig(1)));
    }
    CHECK(mod.gamma(a * b) == mod.gamma(a) * mod.gamma(b));
  }
  EMat id(mod.dim(), mod.dim());
  for (int i = 0; i < mod.dim(); ++i) id(i, i) = ring_one<ExpPoly>();
  CHECK(mod.gamma(CliffordElement::scalar(q, ring_one<ExpPoly>())) == id);
}

TEST_CASE("grading split") {
  SpinorModule mod = standard_module(1);
  auto [p0, p1] = mod.grading_split();
  CHECK(p0 + p1 == QMat::identity(2));
  CHECK(p0 * p0 == p0);
  CHECK(p1 * p1 == p1);
  CHECK((p0 * p1).is_zero());
  // S⁰ = even forms, S¹ = odd forms for the (u, w) frame orientation
  CHECK(p0(0, 0) == Rat(1));
  CHECK(p1(1, 1) == Rat(1));
  CHECK(p0(1, 1) == Rat(0));
  // odd generators swap chirality
  testutil::Rng rng(71);
  for (int i = 0; i < 2; ++i) {
    std::vector<ExpPoly> e(2);
    e[i] = ring_one<ExpPoly>();
    EMat g = mod.gamma_section(e);
    EMat p0e = p0.map([](const Rat& r) { return ExpPoly::constant(0, GRat(r)).promoted(0); });
    EMat p1e = p1.map([](const Rat& r) { return ExpPoly::constant(0, GRat(r)).promoted(0); });
    CHECK((p1e * g * p1e).is_zero());
    CHECK((p0e * g * p0e).is_zero());
  }
  // rank-4 module as well
  SpinorModule mod2 = standard_module(2);
  auto [q0, q1] = mod2.grading_split();
  CHECK(q0 + q1 == QMat::identity(4));
  CHECK(q0 * q0 == q0);
}

TEST_CASE("graded tensor module matches the direct-sum Clifford module") {
  // E = E₊ ⊕ E₋, both rank-2 neutral; compare γ^⊗ with γ on Cl(E).
  SpinorModule sp = standard_module(1), sm = standard_module(1);
  GradedTensorModule gt(sp, sm);
  // direct-sum space: frame (u⁺, w⁺, u⁻, w⁻)
  QMat g(4, 4);
  g(0, 1) = g(1, 0) = Rat(1, 2);
  g(2, 3) = g(3, 2) = Rat(1, 2);
  QuadSpace q(g);
  std::vector<std::vector<Rat>> w = {{0, 1, 0, 0}, {0, 0, 0, 1}};
  std::vector<std::vector<Rat>> u = {{1, 0, 0, 0}, {0, 0, 1, 0}};
  SpinorModule whole(q, w, u);

  testutil::Rng rng(73);
  for (int t = 0; t < 6; ++t) {
    auto vp = rng.section(2, 1), vm = rng.section(2, 1);
    EMat tensor_op = gt.graded_gamma(csec(vp), csec(vm));
    std::vector<TrigPoly> vfull = {vp[0], vp[1], vm[0], vm[1]};
    EMat whole_op = whole.gamma_section(vfull);
    // identification: (s₊, s₋) ↦ mask s₊ | s₋<<1 — both exterior algebras
    // with plus-generators before minus-generators
    for (int sp_i = 0; sp_i < 2; ++sp_i)
      for (int sm_i = 0; sm_i < 2; ++sm_i)
        for (int tp = 0; tp < 2; ++tp)
          for (int tm = 0; tm < 2; ++tm)
            CHECK(tensor_op(gt.index(tp, tm), gt.index(sp_i, sm_i)) ==
                  whole_op(tp | (tm << 1), sp_i | (sm_i << 1)));
    // Clifford relation on the tensor module
    EMat sq = tensor_op * tensor_op;
    TrigPoly norm = sp.space().pair(vp, vp) + sm.space().pair(vm, vm);
    EMat expect(4, 4);
    for (int i = 0; i < 4; ++i) expect(i, i) = ExpPoly::from_trig(norm);
    CHECK(sq == expect);
  }
  // Koszul sign: v₋ on odd s₊⊗s₋ picks up a minus sign
  std::vector<ExpPoly> vm(2);
  vm[1] = ring_one<ExpPoly>();  // w⁻
  EMat op = gt.graded_gamma(std::vector<ExpPoly>(2), vm);
  // s₊ = ξ⁺ (odd), s₋ = 1 → −ξ⁺⊗ξ⁻
  CHECK(op(gt.index(1, 1), gt.index(1, 0)) == -ring_one<ExpPoly>());
}

TEST_CASE("null spaces of exterior-form spinors") {
  SpinorModule mod = standard_module(2);
  // η = 1: annihilator = the contraction-acting half (U)
  auto r1 = null_space(mod, mod.basis_spinor(0));
  CHECK(r1.generic_rank == 2);
  CHECK(is_pure(mod, mod.basis_spinor(0)));
  for (const auto& v : r1.basis) {
    CHECK(v[2].is_zero());
    CHECK(v[3].is_zero());
  }
  CHECK(is_isotropic(mod.space(), r1.basis));
  // η = top form: annihilator = W
  auto rtop = null_space(mod, mod.basis_spinor(0b11));
  CHECK(rtop.generic_rank == 2);
  for (const auto& v : rtop.basis) {
    CHECK(v[0].is_zero());
    CHECK(v[1].is_zero());
  }
  // η = 1 + ξ₁∧ξ₂ is pure (exponential of a 2-form)
  Spinor e2 = mod.basis_spinor(0);
  e2[0b11] = ring_one<ExpPoly>();
  CHECK(is_pure(mod, e2));
  // η = 1 + ξ₁ is not pure
  Spinor imp = mod.basis_spinor(0);
  imp[0b01] = ring_one<ExpPoly>();
  CHECK(!is_pure(mod, imp));
  CHECK_THROWS_AS((void)null_space(mod, mod.zero_spinor()), error);
}

TEST_CASE("null space is isotropic for random spinors") {
  SpinorModule mod = standard_module(2);
  testutil::Rng rng(79);
  for (int t = 0; t < 8; ++t) {
    Spinor s = mod.zero_spinor();
    for (int i = 0; i < mod.dim(); ++i) s[i] = ExpPoly::constant(0, GRat(rng.rational()));
    bool nz = false;
    for (const auto& c : s) nz = nz || !c.is_zero();
    if (!nz) continue;
    auto r = null_space(mod, s);
    CHECK(is_isotropic(mod.space(), r.basis));
  }
}

TEST_CASE("spinor_of_isotropic round trips") {
  SpinorModule mod = standard_module(2);
  // L = U (vector half) → η = 1
  std::vector<std::vector<ExpPoly>> ubasis(2, std::vector<ExpPoly>(4));
  ubasis[0][0] = ring_one<ExpPoly>();
  ubasis[1][1] = ring_one<ExpPoly>();
  Spinor eta = spinor_of_isotropic(mod, ubasis);
  CHECK(eta == mod.basis_spinor(0));
  // constant complex structure on T²: L = span{∂₁ + i∂₂, dθ₁ + i dθ₂}
  std::vector<std::vector<ExpPoly>> lbasis(2, std::vector<ExpPoly>(4));
  lbasis[0][0] = ring_one<ExpPoly>();
  lbasis[0][1] = ExpPoly::i_unit();
  lbasis[1][2] = ring_one<ExpPoly>();
  lbasis[1][3] = ExpPoly::i_unit();
  Spinor dz = spinor_of_isotropic(mod, lbasis);
  // η should be the degree-1 spinor ξ₁ + i ξ₂ up to normalization
  CHECK(dz[0].is_zero());
  CHECK(dz[0b11].is_zero());
  CHECK(!dz[0b01].is_zero());
  CHECK(dz[0b10] == ExpPoly::i_unit() * dz[0b01]);
  auto back = null_space(mod, dz);
  CHECK(back.generic_rank == 2);
  CHECK(is_isotropic(mod.space(), back.basis));
  // the recovered bundle annihilates iff it equals L: check γ_v dz = 0 for v ∈ L
  for (const auto& v : lbasis) {
    Spinor img = mod.gamma_section(v).apply(dz);
    for (const auto& c : img) CHECK(c.is_zero());
  }
  // random pure spinors: exp of 2-forms, round trip projectively
  testutil::Rng rng(83);
  for (int t = 0; t < 5; ++t) {
    Spinor s = mod.basis_spinor(0);
    s[0b11] = ExpPoly::constant(0, GRat(rng.rational()));
    auto ns = null_space(mod, s);
    REQUIRE(ns.generic_rank == 2);
    Spinor s2 = spinor_of_isotropic(mod, ns.basis);
    CHECK(s2 == s);  // leading coefficient already 1
  }
}
