#include <doctest.h>

#include "ck/courant.hpp"
#include "test_util.hpp"

using namespace ck;

namespace {
CourantModel exact_t3(Rat h_const = 0) {
  Alt h(3, 3);
  if (h_const != 0) h.add_coeff(0b111, TrigPoly::constant(3, h_const));
  return CourantModel::exact(3, h);
}

CourantModel so3_model() {
  // [e_i, e_j] = ε_ijk e_k with the standard invariant gram
  std::vector<QMat> ad(3, QMat(3, 3));
  ad[0](2, 1) = 1;
  ad[0](1, 2) = -1;
  ad[1](0, 2) = 1;
  ad[1](2, 0) = -1;
  ad[2](1, 0) = 1;
  ad[2](0, 1) = -1;
  return CourantModel::quadratic_lie(QuadSpace(QMat::identity(3)), ad);
}

Section basic(int rank, int i, TrigPoly c) {
  Section s(rank);
  s[i] = std::move(c);
  return s;
}
}  // namespace

TEST_CASE("exterior derivative") {
  // d(sin θ₁ dθ₂) = cos θ₁ dθ₁∧dθ₂, d² = 0
  Alt a(3, 1);
  a.add_coeff(0b010, TrigPoly::sin1(3, 0));
  Alt da = exterior_d(a);
  CHECK(da.coeff(0b011) == TrigPoly::cos1(3, 0));
  CHECK(exterior_d(da).is_zero());
  // closed 3-form on T³ (top degree)
  Alt h(3, 3);
  h.add_coeff(0b111, TrigPoly::cos1(3, 1));
  CHECK(exterior_d(h).is_zero());
  // non-closed 3-form on T⁴
  Alt h4(4, 3);
  h4.add_coeff(0b1110, TrigPoly::sin1(4, 0));
  CHECK(!exterior_d(h4).is_zero());
}

TEST_CASE("anchor and pi_star_d on the exact model") {
  CourantModel m = exact_t3();
  // π(∂₁)(sin θ₁) = cos θ₁, anchor kills covectors
  CHECK(m.anchor_apply(basic(6, 0, TrigPoly::constant(3, 1)), TrigPoly::sin1(3, 0)) ==
        TrigPoly::cos1(3, 0));
  CHECK(m.anchor_apply(basic(6, 3, TrigPoly::constant(3, 1)), TrigPoly::sin1(3, 0)).is_zero());
  // θ-independent f → π*df = 0
  CHECK(sec_is_zero(m.pi_star_d(TrigPoly::constant(3, Rat(5)))));
  // ⟨π*df, v⟩ = π(v)(f) for random v, f
  testutil::Rng rng(101);
  for (int t = 0; t < 6; ++t) {
    TrigPoly f = rng.trig(3);
    Section v = rng.section(6, 3);
    CHECK(m.pair(m.pi_star_d(f), v) == m.anchor_apply(v, f));
  }
  // C5: 2[u,u] = π*d⟨u,u⟩ for random u
  for (int t = 0; t < 6; ++t) {
    Section u = rng.section(6, 3);
    Section lhs = m.dorfman(u, u);
    CHECK(sec_is_zero(sec_sub(sec_add(lhs, lhs), m.pi_star_d(m.pair(u, u)))));
  }
}

TEST_CASE("exact Dorfman bracket formulas") {
  CourantModel m0 = exact_t3();
  // [∂₁, f dθ₂] = (∂₁f) dθ₂
  TrigPoly f = TrigPoly::sin1(3, 0) + Rat(2) * TrigPoly::cos1(3, 2);
  Section out = m0.dorfman(basic(6, 0, TrigPoly::constant(3, 1)), basic(6, 4, f));
  CHECK(out[4] == f.derive(0));
  for (int i = 0; i < 6; ++i)
    if (i != 4) CHECK(out[i].is_zero());
  // with H = c·dθ₁∧dθ₂∧dθ₃: [∂₁, ∂₂] = c·dθ₃
  CourantModel mh = exact_t3(Rat(7));
  Section hb = mh.dorfman(basic(6, 0, TrigPoly::constant(3, 1)), basic(6, 1, TrigPoly::constant(3, 1)));
  CHECK(hb[5] == TrigPoly::constant(3, Rat(7)));
  for (int i = 0; i < 5; ++i) CHECK(hb[i].is_zero());
}

TEST_CASE("Courant axioms pass on exact models with closed H") {
  CHECK(exact_t3().axioms_check().all_pass());
  CHECK(exact_t3(Rat(1, 2)).axioms_check().all_pass());
  // non-constant closed H on T³: H = cos θ₁ dθ₁∧dθ₂∧dθ₃ (top degree, closed)
  Alt h(3, 3);
  h.add_coeff(0b111, TrigPoly::cos1(3, 0));
  CourantModel m = CourantModel::exact(3, h);
  CHECK(m.three_form_closed());
  CHECK(m.axioms_check().all_pass());
}

TEST_CASE("dH != 0 breaks C1 with a witness") {
  Alt h(4, 3);
  h.add_coeff(0b1110, TrigPoly::sin1(4, 0));  // sin θ₁ dθ₂∧dθ₃∧dθ₄
  CourantModel m = CourantModel::exact(4, h);
  CHECK(!m.three_form_closed());
  AxiomReport rep = m.axioms_check();
  CHECK(!rep.axiom[0]);
  CHECK(!rep.witness[0].empty());
  // the other axioms survive
  CHECK(rep.axiom[1]);
  CHECK(rep.axiom[2]);
  CHECK(rep.axiom[3]);
  CHECK(rep.axiom[4]);
}

TEST_CASE("quadratic Lie models") {
  CourantModel m = so3_model();
  CHECK(m.axioms_check().all_pass());
  // [e₁, e₂] = e₃
  Section b = m.dorfman(basic(3, 0, TrigPoly::constant(0, 1)), basic(3, 1, TrigPoly::constant(0, 1)));
  CHECK(b[2] == TrigPoly::constant(0, 1));
  // abelian model: bracket 0
  CourantModel ab = CourantModel::quadratic_lie(QuadSpace(QMat::identity(2)),
                                                std::vector<QMat>(2, QMat(2, 2)));
  CHECK(sec_is_zero(ab.dorfman(basic(2, 0, TrigPoly::constant(0, 1)),
                               basic(2, 1, TrigPoly::constant(0, 1)))));
  CHECK(ab.axioms_check().all_pass());
  // 2-dim nonabelian Lie algebra with identity gram: C4 fails
  std::vector<QMat> ad(2, QMat(2, 2));
  ad[0](1, 1) = 1;  // [e₁, e₂] = e₂
  ad[1](1, 0) = -1;
  CourantModel bad = CourantModel::quadratic_lie(QuadSpace(QMat::identity(2)), ad);
  AxiomReport rep = bad.axioms_check();
  CHECK(!rep.axiom[3]);
  CHECK(!rep.witness[3].empty());
}

TEST_CASE("dissection with trivial fiber reproduces the exact model") {
  // 𝒢 = 0, ℋ = H: frame orders (α, X) vs (∂, dθ) are swapped halves
  Alt h3(3, 3);
  h3.add_coeff(0b111, TrigPoly::cos1(3, 1));
  CourantModel diss = CourantModel::dissection(
      3, QuadSpace(), {}, std::vector<TMat>(3, TMat(0, 0)),
      std::vector<std::vector<std::vector<TrigPoly>>>(3, std::vector<std::vector<TrigPoly>>(
                                                             3, std::vector<TrigPoly>())),
      h3);
  CourantModel ex = CourantModel::exact(3, h3);
  testutil::Rng rng(107);
  auto to_exact = [&](const Section& s) {
    // dissection frame (α₁..α₃, X₁..X₃) → exact frame (∂₁..∂₃, dθ₁..dθ₃)
    Section out(6);
    for (int a = 0; a < 3; ++a) {
      out[a] = s[3 + a];
      out[3 + a] = s[a];
    }
    return out;
  };
  for (int t = 0; t < 8; ++t) {
    Section u = rng.section(6, 3), v = rng.section(6, 3);
    Section lhs = to_exact(diss.dorfman(u, v));
    Section rhs = ex.dorfman(to_exact(u), to_exact(v));
    CHECK(sec_is_zero(sec_sub(lhs, rhs)));
  }
}

TEST_CASE("dissection with curvature and abelian fiber") {
  // T², 𝒢 = ℝ^{1,1} abelian, R(∂₁,∂₂) = g₁ constant, ℋ = 0
  int f = 2, g = 2;
  QMat fg(2, 2);
  fg(0, 0) = 1;
  fg(1, 1) = -1;
  std::vector<std::vector<std::vector<TrigPoly>>> curv(
      f, std::vector<std::vector<TrigPoly>>(f, std::vector<TrigPoly>(g)));
  curv[0][1][0] = TrigPoly::constant(2, 1);
  curv[1][0][0] = TrigPoly::constant(2, Rat(-1));
  CourantModel m = CourantModel::dissection(
      f, QuadSpace(fg), std::vector<QMat>(g, QMat(g, g)), std::vector<TMat>(f, TMat(g, g)), curv,
      Alt(f, 3), {}, {{1, 1}}, {{Rat(1, 2), Rat(-1, 2)}});
  CHECK(m.axioms_check().all_pass());
  // Pr_𝒢 [r₁, r₂] = [r₁, r₂]^𝒢 = 0 for the abelian fiber
  Section r1 = basic(m.rank(), 2, TrigPoly::constant(2, 1));
  Section r2 = basic(m.rank(), 3, TrigPoly::constant(2, 1));
  Section br = m.dorfman(r1, r2);
  CHECK(br[2].is_zero());
  CHECK(br[3].is_zero());
  // R appears in the bracket of anchored sections: Pr_𝒢 [X₁, X₂] = R(∂₁,∂₂)
  Section x1 = basic(m.rank(), 4, TrigPoly::constant(2, 1));
  Section x2 = basic(m.rank(), 5, TrigPoly::constant(2, 1));
  Section bx = m.dorfman(x1, x2);
  CHECK(bx[2] == TrigPoly::constant(2, 1));
  CHECK(bx[3].is_zero());
}

TEST_CASE("isotropic frames") {
  CourantModel ex = exact_t3(Rat(1));
  IsotropicFrame fr = ex.isotropic_frame();
  REQUIRE(fr.p.size() == 3);
  REQUIRE(fr.q.size() == 3);
  auto rpair = [&](const std::vector<Rat>& a, const std::vector<Rat>& b) {
    Rat s = 0;
    for (int i = 0; i < ex.rank(); ++i)
      for (int j = 0; j < ex.rank(); ++j) s += a[i] * ex.space().gram()(i, j) * b[j];
    return s;
  };
  for (size_t a = 0; a < fr.p.size(); ++a)
    for (size_t b = 0; b < fr.p.size(); ++b) {
      CHECK(rpair(fr.p[a], fr.p[b]) == 0);
      CHECK(rpair(fr.q[a], fr.q[b]) == 0);
      CHECK(rpair(fr.p[a], fr.q[b]) == (a == b ? Rat(1) : Rat(0)));
    }
  // 𝒫 ⊂ ker π
  for (const auto& p : fr.p) {
    Section s(ex.rank());
    for (int i = 0; i < ex.rank(); ++i) s[i] = TrigPoly::constant(3, p[i]);
    for (const auto& c : ex.anchor_vec(s)) CHECK(c.is_zero());
  }
  // quadratic Lie model with a supplied Lagrangian splitting
  QMat ng(2, 2);
  ng(0, 1) = ng(1, 0) = Rat(1, 2);
  CourantModel ql = CourantModel::quadratic_lie(QuadSpace(ng), std::vector<QMat>(2, QMat(2, 2)),
                                                {{0, 1}}, {{1, 0}});
  IsotropicFrame qf = ql.isotropic_frame();
  REQUIRE(qf.p.size() == 1);
  CHECK(qf.p[0][1] == 1);
  CHECK(qf.q[0][0] == 2);  // rescaled so that ⟨p, q⟩ = 1
  // model without splitting data: construction fails
  CHECK_THROWS_AS((void)so3_model().isotropic_frame(), error);
}

TEST_CASE("corollary sum identity on a dissection") {
  // Σ_a π(q_a)⟨σ, p_a⟩ = 0 for σ ∈ ker π
  int f = 2, g = 2;
  QMat fg(2, 2);
  fg(0, 1) = fg(1, 0) = Rat(1, 2);
  std::vector<std::vector<std::vector<TrigPoly>>> curv(
      f, std::vector<std::vector<TrigPoly>>(f, std::vector<TrigPoly>(g)));
  CourantModel m = CourantModel::dissection(f, QuadSpace(fg), std::vector<QMat>(g, QMat(g, g)),
                                            std::vector<TMat>(f, TMat(g, g)), curv, Alt(f, 3), {},
                                            {{0, 1}}, {{1, 0}});
  IsotropicFrame fr = m.isotropic_frame();
  REQUIRE(fr.p.size() == 3);
  testutil::Rng rng(109);
  for (int t = 0; t < 5; ++t) {
    // σ ranges over ker π = F* ⊕ 𝒢: components 0..3 free, 4..5 zero
    Section sigma(m.rank());
    for (int i = 0; i < 4; ++i) sigma[i] = rng.trig(2);
    TrigPoly total;
    for (size_t a = 0; a < fr.p.size(); ++a) {
      Section pa(m.rank()), qa(m.rank());
      for (int i = 0; i < m.rank(); ++i) {
        pa[i] = TrigPoly::constant(2, fr.p[a][i]);
        qa[i] = TrigPoly::constant(2, fr.q[a][i]);
      }
      total += m.anchor_apply(qa, m.pair(sigma, pa));
    }
    CHECK(total.is_zero());
  }
}

TEST_CASE("model JSON round trips and malformed input") {
  nlohmann::json je;
  je["variant"] = "exact";
  je["torus_dim"] = 3;
  nlohmann::json term;
  term["indices"] = {1, 2, 3};
  term["coeff"] = "1/2";
  je["H"]["terms"] = nlohmann::json::array({term});
  CourantModel m = CourantModel::from_json(je);
  CHECK(m.rank() == 6);
  CHECK(m.three_form().coeff(0b111) == TrigPoly::constant(3, Rat(1, 2)));
  CHECK(m.axioms_check().all_pass());

  nlohmann::json jq;
  jq["variant"] = "quadratic_lie";
  jq["rank"] = 3;
  jq["gram"] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  jq["structure"] = nlohmann::json::array();
  auto sc = [&](int i, int j, int k, const char* c) {
    nlohmann::json e;
    e["i"] = i;
    e["j"] = j;
    e["k"] = k;
    e["c"] = c;
    jq["structure"].push_back(e);
  };
  sc(1, 2, 3, "1");
  sc(2, 3, 1, "1");
  sc(1, 3, 2, "-1");
  CourantModel q = CourantModel::from_json(jq);
  CHECK(q.axioms_check().all_pass());
  Section b = q.dorfman(basic(3, 0, TrigPoly::constant(0, 1)), basic(3, 1, TrigPoly::constant(0, 1)));
  CHECK(b[2] == TrigPoly::constant(0, 1));

  CHECK_THROWS_AS((void)CourantModel::from_json(nlohmann::json{{"variant", "nope"}}), error);
  CHECK_THROWS_AS((void)CourantModel::from_json(nlohmann::json{{"torus_dim", 2}}), error);
  nlohmann::json bad_gram = {{"variant", "quadratic_lie"}, {"rank", 2}, {"gram", {{1, 0}, {0, 0}}}};
  CHECK_THROWS_AS((void)CourantModel::from_json(bad_gram), error);
}
