#include "ck/dirac.hpp"

#include <doctest.h>

#include <random>

using namespace ck;

namespace {

CourantModel exact_model(int m) { return CourantModel::exact(m, Alt(m, 3)); }

/// Exact T^3 with the constant twist H = 3 dtheta_1 ^ dtheta_2 ^ dtheta_3.
CourantModel twisted_t3() {
  Alt h(3, 3);
  h.add_coeff(0b111, TrigPoly::constant(3, 3));
  return CourantModel::exact(3, h);
}

/// Rank-8 model over T^2 with a neutral abelian fiber, a flat boost partial
/// connection mixing two fiber directions, and splitting data for the fiber.
CourantModel fibered_t2() {
  QMat fg(4, 4);
  fg(0, 0) = fg(1, 1) = 1;
  fg(2, 2) = fg(3, 3) = -1;
  std::vector<std::vector<std::vector<TrigPoly>>> curv(
      2, std::vector<std::vector<TrigPoly>>(2, std::vector<TrigPoly>(4)));
  std::vector<TMat> nabla(2, TMat(4, 4));
  nabla[0](1, 2) = TrigPoly::constant(2, 1);
  nabla[0](2, 1) = TrigPoly::constant(2, 1);
  return CourantModel::dissection(2, QuadSpace(fg), std::vector<QMat>(4, QMat(4, 4)), nabla, curv,
                                  Alt(2, 3), {}, {{1, 0, 1, 0}, {0, 1, 0, 1}},
                                  {{1, 0, -1, 0}, {0, 1, 0, -1}});
}

/// Rank-6 model over T^2 with a neutral abelian rank-2 fiber and a nonzero
/// constant curvature R(X_1, X_2) = g_1 + g_2.
CourantModel curved_t2() {
  QMat fg(2, 2);
  fg(0, 0) = 1;
  fg(1, 1) = -1;
  std::vector<std::vector<std::vector<TrigPoly>>> curv(
      2, std::vector<std::vector<TrigPoly>>(2, std::vector<TrigPoly>(2)));
  curv[0][1][0] = TrigPoly::constant(2, 1);
  curv[0][1][1] = TrigPoly::constant(2, 1);
  curv[1][0][0] = TrigPoly::constant(2, -1);
  curv[1][0][1] = TrigPoly::constant(2, -1);
  return CourantModel::dissection(2, QuadSpace(fg), std::vector<QMat>(2, QMat(2, 2)),
                                  std::vector<TMat>(2, TMat(2, 2)), curv, Alt(2, 3), {},
                                  {{1, 1}}, {{1, -1}});
}

/// sl(2) plus a negative-definite center, with a Lagrangian splitting.
CourantModel sl2_center() {
  QMat g(4, 4);
  g(0, 0) = 2;            // h
  g(1, 2) = g(2, 1) = 1;  // e, f
  g(3, 3) = -2;           // z
  std::vector<QMat> ad(4, QMat(4, 4));
  ad[0](1, 1) = 2;   // [h,e] = 2e
  ad[0](2, 2) = -2;  // [h,f] = -2f
  ad[1](0, 2) = 1;   // [e,f] = h
  ad[1](1, 0) = -2;
  ad[2](0, 1) = -1;
  ad[2](2, 0) = 2;
  return CourantModel::quadratic_lie(QuadSpace(g), ad, {{0, 1, 0, 0}, {1, 0, 0, 1}},
                                     {{0, 0, 1, 0}, {1, 0, 0, -1}});
}

/// The double h ⋉ h* of the nonabelian 2-dimensional Lie algebra
/// h = span(x, y), [x,y] = y, with the canonical pairing; basis x, y, x*, y*.
CourantModel heis_double() {
  QMat g(4, 4);
  g(0, 2) = g(2, 0) = 1;
  g(1, 3) = g(3, 1) = 1;
  std::vector<QMat> ad(4, QMat(4, 4));
  ad[0](1, 1) = 1;   // [x,y] = y
  ad[0](3, 3) = -1;  // [x,y*] = -y*
  ad[1](1, 0) = -1;
  ad[1](2, 3) = 1;  // [y,y*] = x*
  ad[3](3, 0) = 1;
  ad[3](2, 1) = -1;
  return CourantModel::quadratic_lie(QuadSpace(g), ad, {{0, 0, 1, 0}, {0, 0, 0, 1}},
                                     {{1, 0, 0, 0}, {0, 1, 0, 0}});
}

/// Abelian rank-2 quadratic Lie model with a neutral pairing.
CourantModel abelian_neutral2() {
  QMat g(2, 2);
  g(0, 1) = g(1, 0) = 1;
  return CourantModel::quadratic_lie(QuadSpace(g), std::vector<QMat>(2, QMat(2, 2)), {{1, 0}},
                                     {{0, 1}});
}

Section const_section(const CourantModel& model, const std::vector<Rat>& v) {
  Section out = sec_zero(model.rank());
  for (int i = 0; i < model.rank(); ++i) out[i] = TrigPoly::constant(model.torus_dim(), v[i]);
  return out;
}

Section frame_section(const CourantModel& model, int i) {
  Section out = sec_zero(model.rank());
  out[i] = ring_one<TrigPoly>();
  return out;
}

/// Deterministic pseudo-random correction tensor, skew in the last two slots.
Tensor random_eta(std::mt19937& rng, int r, int m) {
  std::uniform_int_distribution<int> coef(-2, 2), kind(0, 2);
  Tensor eta(r, {false, false, false});
  for (int l = 0; l < r; ++l)
    for (int v = 0; v < r; ++v)
      for (int w = v + 1; w < r; ++w) {
        TrigPoly c;
        int what = kind(rng);
        Rat x = coef(rng);
        if (what == 0)
          c = TrigPoly::constant(m, x);
        else if (what == 1)
          c = x * TrigPoly::cos1(m, kind(rng) % m);
        else
          c = x * TrigPoly::sin1(m, kind(rng) % m);
        eta.at({l, v, w}) = c;
        eta.at({l, w, v}) = -c;
      }
  return eta;
}

Section random_section(std::mt19937& rng, int r, int m) {
  std::uniform_int_distribution<int> coef(-2, 2), kind(0, 2);
  Section s(r);
  for (int i = 0; i < r; ++i) {
    int what = kind(rng);
    Rat x = coef(rng);
    if (what == 0)
      s[i] = TrigPoly::constant(m, x);
    else if (what == 1)
      s[i] = x * TrigPoly::cos1(m, kind(rng) % m);
    else
      s[i] = x * TrigPoly::sin1(m, kind(rng) % m);
  }
  return s;
}

/// Random pointwise skew-adjoint correction endomorphisms.
std::vector<TMat> random_skew(std::mt19937& rng, const CourantModel& model) {
  int r = model.rank(), m = model.torus_dim();
  std::uniform_int_distribution<int> coef(-1, 1), kind(0, 2);
  std::vector<TMat> out(r, TMat(r, r));
  for (int l = 0; l < r; ++l) {
    TMat raw(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        int what = kind(rng);
        Rat x = coef(rng);
        if (what == 0)
          raw(i, j) = TrigPoly::constant(m, x);
        else if (what == 1)
          raw(i, j) = x * TrigPoly::cos1(m, kind(rng) % m);
        else
          raw(i, j) = x * TrigPoly::sin1(m, kind(rng) % m);
      }
    out[l] = raw - model.space().adjoint(raw);
  }
  return out;
}

DiffOp zero_op(const SpinorSetup& setup, int parity) {
  return DiffOp(setup.module.dim(), setup.model->torus_dim(), parity);
}

}  // namespace

TEST_CASE("flat exact model: the canonical operator is the de Rham differential") {
  // In the pairing normalization <d_a, dtheta_b> = (1/2) delta_ab the dual of
  // d_a is 2 dtheta_a and the canonical weighted operator on the exterior
  // algebra over 2 dtheta_a reduces exactly to d.
  CourantModel model = exact_model(2);
  SpinorSetup setup = make_spinor_setup(model);
  DiffOp can = canonical_dgo(model, setup);
  DiffOp expect(setup.module.dim(), 2, 1);
  for (int t = 0; t < 2; ++t)
    expect.add_term({t}, setup.module.gamma_section(frame_section(model, 2 + t)));
  CHECK(op_equal(can, expect));
  DgoReport rep = dgo_check(model, setup.module, can);
  CHECK(rep.pass());
  CHECK(rep.square.is_zero());
}

TEST_CASE("twisted exact model: the canonical operator is d minus the H wedge") {
  CourantModel model = twisted_t3();
  SpinorSetup setup = make_spinor_setup(model);
  DiffOp can = canonical_dgo(model, setup);
  DiffOp expect(setup.module.dim(), 3, 1);
  for (int t = 0; t < 3; ++t)
    expect.add_term({t}, setup.module.gamma_section(frame_section(model, 3 + t)));
  Alt emb(6, 3);  // H on the dtheta indices of the full frame
  emb.add_coeff(0b111000, TrigPoly::constant(3, 3));
  expect.add_term({}, EMat(setup.module.dim(), setup.module.dim()) -
                          setup.module.gamma(quantize(model.space(), emb)));
  CHECK(op_equal(can, expect));
}

TEST_CASE("canonical operator is independent of the generalized connection") {
  std::mt19937 rng(11);
  for (const CourantModel& model : {twisted_t3(), fibered_t2()}) {
    SpinorSetup setup = make_spinor_setup(model);
    DiffOp can = canonical_dgo(model, setup);
    GenConnection ref(model);
    for (int trial = 0; trial < 3; ++trial) {
      GenConnection d = ref.plus_eta(random_eta(rng, model.rank(), model.torus_dim()));
      CHECK(op_equal(can, canonical_dgo(model, setup, d)));
    }
  }
}

TEST_CASE("Dirac operator is independent of the dual frame pair used") {
  std::mt19937 rng(13);
  for (const CourantModel& model : {twisted_t3(), fibered_t2()}) {
    SpinorSetup setup = make_spinor_setup(model);
    GenConnection d =
        GenConnection(model).plus_eta(random_eta(rng, model.rank(), model.torus_dim()));
    SpinConnection sc(model, setup.module, d, /*weighted=*/true);
    // (e_i, e~_i) replaced by the isotropic pair (p_a, q_a) u (q_a, p_a)
    DiffOp alt = zero_op(setup, 1);
    int m = model.torus_dim();
    for (std::size_t a = 0; a < setup.frame.p.size(); ++a) {
      Section p = const_section(model, setup.frame.p[a]);
      Section q = const_section(model, setup.frame.q[a]);
      alt = alt + gamma_op(setup.module, p, m) * sc.cov_section(setup.frame.q[a]);
      alt = alt + gamma_op(setup.module, q, m) * sc.cov_section(setup.frame.p[a]);
    }
    CHECK(op_equal(Rat(1, 2) * alt, dirac(sc)));
  }
}

TEST_CASE("quadratic Lie model: flat Dirac vanishes and the ansatz is the torsion term") {
  CourantModel model = sl2_center();
  CHECK(model.axioms_check().all_pass());
  SpinorSetup setup = make_spinor_setup(model);
  SpinConnection sc(model, setup.module, GenConnection(model), /*weighted=*/true);
  CHECK(op_equal(dirac(sc), zero_op(setup, 1)));
  Alt t = torsion(model, GenConnection(model));
  CliffordElement tc = quantize(model.space(), raise_alt3(model.space(), t));
  DiffOp quarter = Rat(1, 4) * gamma_op(setup.module, tc, model.torus_dim());
  CHECK(op_equal(canonical_dgo(model, setup), quarter));
}

TEST_CASE("spin lift compatibility identity on operators") {
  // (1/2) Sum_i [gamma(e~_i) gamma(D_{e_i} v), gamma_w]
  //   = Sum_i <D_{e_i} v, w> gamma(e~_i) - gamma(D_w v)  for frame vectors w.
  std::mt19937 rng(17);
  for (const CourantModel& model : {twisted_t3(), fibered_t2()}) {
    int r = model.rank(), m = model.torus_dim();
    SpinorSetup setup = make_spinor_setup(model);
    const SpinorModule& s = setup.module;
    GenConnection d = GenConnection(model).plus_eta(random_eta(rng, r, m));
    Section v = random_section(rng, r, m);
    for (int w = 0; w < r; ++w) {
      Section ew = frame_section(model, w);
      EMat gw = s.gamma_section(ew);
      EMat comm(s.dim(), s.dim()), rhs(s.dim(), s.dim());
      for (int i = 0; i < r; ++i) {
        Section ei = frame_section(model, i);
        std::vector<Rat> di = model.space().dual_frame_vector(i);
        Section dual = const_section(model, di);
        Section dv = d.apply(ei, v);
        EMat block = s.gamma_section(dual) * s.gamma_section(dv);
        comm = comm + block * gw - gw * block;
        ExpPoly c = ExpPoly::from_trig(model.pair(dv, ew));
        EMat gd = s.gamma_section(dual);
        for (int x = 0; x < s.dim(); ++x)
          for (int y = 0; y < s.dim(); ++y)
            if (!gd(x, y).is_zero()) rhs(x, y) += c * gd(x, y);
      }
      rhs = rhs - s.gamma_section(d.apply(ew, v));
      EMat half(s.dim(), s.dim());
      for (int x = 0; x < s.dim(); ++x)
        for (int y = 0; y < s.dim(); ++y) half(x, y) = GRat(Rat(1, 2)) * comm(x, y);
      CHECK(half == rhs);
    }
  }
}

TEST_CASE("generating operator axioms hold on every fixture") {
  for (const CourantModel& model :
       {exact_model(2), twisted_t3(), fibered_t2(), curved_t2(), sl2_center(), heis_double()}) {
    CHECK(model.axioms_check().all_pass());
    SpinorSetup setup = make_spinor_setup(model);
    DiffOp can = canonical_dgo(model, setup);
    DgoReport rep = dgo_check(model, setup.module, can);
    INFO(rep.witness);
    CHECK(rep.pass());
    // the scalar square equals -(1/16) |T|^2 for the reference connection
    CHECK(rep.square == dirac_square_formula(model, torsion(model, GenConnection(model))));
  }
}

TEST_CASE("known scalar squares") {
  {
    CourantModel model = sl2_center();
    SpinorSetup setup = make_spinor_setup(model);
    DgoReport rep = dgo_check(model, setup.module, canonical_dgo(model, setup));
    CHECK(rep.square == TrigPoly::constant(0, Rat(1, 8)));
  }
  {
    CourantModel model = heis_double();
    SpinorSetup setup = make_spinor_setup(model);
    DgoReport rep = dgo_check(model, setup.module, canonical_dgo(model, setup));
    CHECK(rep.pass());
    CHECK(rep.square.is_zero());
  }
}

TEST_CASE("square of a shifted generating operator") {
  // (dgo + gamma_e)^2 - dgo^2 = [dgo, gamma_e] + <e, e>
  {
    CourantModel model = twisted_t3();
    SpinorSetup setup = make_spinor_setup(model);
    DiffOp can = canonical_dgo(model, setup);
    Section e = sec_zero(6);
    e[0] = ring_one<TrigPoly>();  // d_1
    e[3] = ring_one<TrigPoly>();  // dtheta_1, <e,e> = 1
    DiffOp ge = gamma_op(setup.module, e, 3);
    DiffOp shifted = can + ge;
    DiffOp lhs = shifted * shifted - can * can;
    DiffOp rhs = super_commutator(can, ge) +
                 DiffOp::scalar(ExpPoly::constant(3, GRat(1)), setup.module.dim(), 3);
    CHECK(op_equal(lhs, rhs));
  }
  {
    CourantModel model = abelian_neutral2();
    SpinorSetup setup = make_spinor_setup(model);
    DiffOp can = canonical_dgo(model, setup);
    CHECK(op_equal(can, zero_op(setup, 1)));
    Section e = const_section(model, {1, 1});  // <e,e> = 2
    DiffOp ge = gamma_op(setup.module, e, 0);
    DiffOp sq = (can + ge) * (can + ge);
    auto sc = sq.scalar_multiplier();
    REQUIRE(sc.has_value());
    CHECK(*sc == ExpPoly::constant(0, GRat(2)));
  }
}

TEST_CASE("membership in the scalar-shift space of the canonical operator") {
  CourantModel model = twisted_t3();
  SpinorSetup setup = make_spinor_setup(model);
  DiffOp can = canonical_dgo(model, setup);
  CHECK(dgo_shift_member(model, setup.module, can, sec_zero(6)));
  CHECK(dgo_shift_member(model, setup.module, can, model.pi_star_d(TrigPoly::sin1(3, 0))));
  CHECK(dgo_shift_member(model, setup.module, can, frame_section(model, 3)));  // dtheta_1
  CHECK_FALSE(dgo_shift_member(model, setup.module, can, frame_section(model, 0)));  // d_1

  // shifting by a member keeps a generating operator; by a non-member breaks
  // the scalar-square axiom
  DiffOp good = can + gamma_op(setup.module, frame_section(model, 3), 3);
  CHECK(dgo_check(model, setup.module, good).pass());
  DiffOp bad = can + gamma_op(setup.module, frame_section(model, 0), 3);
  DgoReport rep = dgo_check(model, setup.module, bad);
  CHECK(rep.axiom_i);
  CHECK(rep.axiom_ii);
  CHECK_FALSE(rep.axiom_iii);
}

TEST_CASE("transformation identities under a change of connection") {
  std::mt19937 rng(23);
  for (const CourantModel& model : {twisted_t3(), fibered_t2()}) {
    SpinorSetup setup = make_spinor_setup(model);
    GenConnection ref(model);
    std::vector<TMat> a = random_skew(rng, model);
    TrafoReport rep = trafo_check(model, setup.module, ref, a);
    for (const auto& f : rep.failures) INFO(f);
    CHECK(rep.pass());
  }
  // a non-skew correction is rejected
  CourantModel model = exact_model(2);
  SpinorSetup setup = make_spinor_setup(model);
  std::vector<TMat> bad(4, TMat(4, 4));
  bad[0](0, 0) = TrigPoly::constant(2, 1);
  CHECK_THROWS_AS((void)trafo_check(model, setup.module, GenConnection(model), bad), error);
}

TEST_CASE("divergence of connections") {
  std::mt19937 rng(29);
  // the flat connection has divergence-free frame sections
  for (const CourantModel& model : {twisted_t3(), fibered_t2(), curved_t2()}) {
    GenConnection flat = flat_connection(model);
    for (int l = 0; l < model.rank(); ++l)
      CHECK(divergence(model, flat, frame_section(model, l)).is_zero());
  }
  // kernel-of-anchor sections stay divergence free under function rescaling
  {
    CourantModel model = fibered_t2();
    GenConnection flat = flat_connection(model);
    TrigPoly f = TrigPoly::cos1(2, 0);
    for (int l = 0; l < 6; ++l) {  // alpha_1, alpha_2, g_1..g_4
      Section v = sec_zero(8);
      v[l] = f;
      CHECK(divergence(model, flat, v).is_zero());
    }
    Section x1 = sec_zero(8);
    x1[6] = f;  // f X_1: divergence is pi(X_1)(f)
    CHECK(divergence(model, flat, x1) == f.derive(0));
  }
  // div_{D+A}(v) = div_D(v) - <v_A, v>
  for (const CourantModel& model : {twisted_t3(), fibered_t2()}) {
    GenConnection d =
        GenConnection(model).plus_eta(random_eta(rng, model.rank(), model.torus_dim()));
    std::vector<TMat> a = random_skew(rng, model);
    GenConnection d2 = d.plus_correction(a);
    Section va = trace_section(model, a);
    for (int l = 0; l < model.rank(); ++l) {
      Section v = frame_section(model, l);
      CHECK(divergence(model, d2, v) == divergence(model, d, v) - model.pair(va, v));
    }
  }
}

TEST_CASE("standard form matches the canonical operator") {
  for (const CourantModel& model :
       {exact_model(2), twisted_t3(), fibered_t2(), curved_t2(), sl2_center(), heis_double()}) {
    SpinorSetup setup = make_spinor_setup(model);
    CHECK(op_equal(standard_form(model, setup), canonical_dgo(model, setup)));
  }
}
