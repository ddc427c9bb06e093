#include <doctest.h>

#include "ck/exppoly.hpp"
#include "ck/trigpoly.hpp"
#include "test_util.hpp"

using namespace ck;

namespace {
TrigPoly c1(int m, int i) { return TrigPoly::cos1(m, i); }
TrigPoly s1(int m, int i) { return TrigPoly::sin1(m, i); }
}  // namespace

TEST_CASE("rational parsing and formatting") {
  CHECK(rat_parse("1/2") == Rat(1, 2));
  CHECK(rat_parse("-3") == Rat(-3));
  CHECK(rat_parse("4/-8") == Rat(-1, 2));
  CHECK(rat_str(Rat(-1, 2)) == "-1/2");
  CHECK(rat_str(Rat(6, 3)) == "2");
  CHECK_THROWS_AS(rat_parse("1/0"), error);
  CHECK_THROWS_AS(rat_parse("x"), error);
}

TEST_CASE("additive inverse, identity, coefficient merge") {
  TrigPoly f = c1(1, 0);
  CHECK((f + (-f)).is_zero());
  CHECK(TrigPoly(2) + s1(2, 1) == s1(2, 1));
  CHECK(TrigPoly::cos1(1, 0, Rat(1, 2)) + TrigPoly::cos1(1, 0, Rat(1, 2)) == c1(1, 0));
}

TEST_CASE("product-to-sum identities") {
  // cos²θ₁ = ½ + ½cos 2θ₁
  TrigPoly sq = c1(1, 0) * c1(1, 0);
  TrigPoly expect = TrigPoly::constant(1, Rat(1, 2));
  expect.add_term(false, {2}, Rat(1, 2));
  CHECK(sq == expect);
  // sinθ₁·cosθ₁ = ½sin 2θ₁
  CHECK(s1(1, 0) * c1(1, 0) == TrigPoly::harmonic(true, {2}, Rat(1, 2)));
  // unit
  TrigPoly one = TrigPoly::constant(1, 1);
  testutil::Rng rng;
  for (int t = 0; t < 10; ++t) {
    TrigPoly f = rng.trig(1);
    CHECK(f * one == f);
  }
}

TEST_CASE("canonical form: sign absorption and sin-zero") {
  // cos(−θ₁) = cos θ₁, sin(−θ₁) = −sin θ₁, sin(0) = 0
  CHECK(TrigPoly::harmonic(false, {-1}) == c1(1, 0));
  CHECK(TrigPoly::harmonic(true, {-1}) == Rat(-1) * s1(1, 0));
  CHECK(TrigPoly::harmonic(true, {0}).is_zero());
  CHECK(TrigPoly::harmonic(false, {0, -1, 2}) == TrigPoly::harmonic(false, {0, 1, -2}));
}

TEST_CASE("ring axioms on random triples") {
  testutil::Rng rng(7);
  for (int t = 0; t < 25; ++t) {
    int m = rng.uniform(1, 3);
    TrigPoly a = rng.trig(m), b = rng.trig(m), c = rng.trig(m);
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a + b == b + a);
    CHECK(a * b == b * a);
  }
}

TEST_CASE("derivatives") {
  CHECK(s1(1, 0).derive(0) == c1(1, 0));
  CHECK(TrigPoly::constant(1, Rat(5)).derive(0).is_zero());
  // ∂₂ cos(θ₁+2θ₂) = −2 sin(θ₁+2θ₂)
  CHECK(TrigPoly::harmonic(false, {1, 2}).derive(1) == TrigPoly::harmonic(true, {1, 2}, Rat(-2)));
  CHECK_THROWS_AS(s1(1, 0).derive(1), error);

  testutil::Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    int m = rng.uniform(2, 3);
    TrigPoly a = rng.trig(m), b = rng.trig(m);
    int i = rng.uniform(0, m - 1), j = rng.uniform(0, m - 1);
    CHECK((a * b).derive(i) == a.derive(i) * b + a * b.derive(i));  // Leibniz
    CHECK(a.derive(i).derive(j) == a.derive(j).derive(i));          // mixed partials
  }
}

TEST_CASE("exact evaluation on the quarter grid") {
  CHECK(c1(1, 0).eval_quarter({0}) == Rat(1));
  CHECK(s1(1, 0).eval_quarter({2}) == Rat(0));
  TrigPoly f = c1(1, 0) * c1(1, 0);  // ½ + ½cos2θ₁
  CHECK(f.eval_quarter({1}) == Rat(0));
  CHECK_THROWS_AS(c1(1, 0).eval_quarter({0, 0}), error);
}

TEST_CASE("degree tracking") {
  CHECK(TrigPoly::harmonic(false, {1, -3}).degree() == 3);
  CHECK(TrigPoly::constant(2, 4).degree() == 0);
  testutil::Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    TrigPoly a = rng.trig(2), b = rng.trig(2);
    CHECK(a.degree() + b.degree() >= (a * b).degree());
    CHECK(std::max(a.degree(), b.degree()) >= (a + b).degree());
  }
}

TEST_CASE("JSON round trip") {
  testutil::Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    TrigPoly f = rng.trig(2);
    CHECK(TrigPoly::from_json(f.to_json()) == f);
  }
  auto j = nlohmann::json::parse(R"({"m":2,"terms":[{"kind":"cos","k":[1,0],"c":"1/2"}]})");
  CHECK(TrigPoly::from_json(j) == TrigPoly::cos1(2, 0, Rat(1, 2)));
  CHECK_THROWS_AS(TrigPoly::from_json(nlohmann::json::parse(R"({"m":1})")), error);
}

TEST_CASE("dimension promotion for constants, mismatch rejected") {
  TrigPoly half = TrigPoly::constant(Rat(1, 2));
  CHECK(half * c1(2, 0) == TrigPoly::cos1(2, 0, Rat(1, 2)));
  CHECK_THROWS_AS((void)(c1(1, 0) + c1(2, 0)), error);
}

TEST_CASE("exponential basis: embedding is a ring map and invertible") {
  testutil::Rng rng(19);
  for (int t = 0; t < 15; ++t) {
    int m = rng.uniform(1, 3);
    TrigPoly a = rng.trig(m), b = rng.trig(m);
    ExpPoly ea = ExpPoly::from_trig(a), eb = ExpPoly::from_trig(b);
    CHECK(ea * eb == ExpPoly::from_trig(a * b));
    CHECK(ea + eb == ExpPoly::from_trig(a + b));
    CHECK(ea.real_part() == a);
    CHECK(ea.imag_part().is_zero());
    int i = rng.uniform(0, m - 1);
    CHECK(ea.derive(i) == ExpPoly::from_trig(a.derive(i)));
    std::vector<int> q(m);
    for (int s = 0; s < m; ++s) q[s] = rng.uniform(0, 3);
    CHECK(ea.eval_quarter(q) == GRat(a.eval_quarter(q)));
  }
}

TEST_CASE("exponential basis: conjugation and exact division") {
  testutil::Rng rng(23);
  for (int t = 0; t < 15; ++t) {
    int m = rng.uniform(1, 2);
    ExpPoly a = ExpPoly::from_trig(rng.trig(m), rng.trig(m));
    ExpPoly b = ExpPoly::from_trig(rng.trig(m), rng.trig(m));
    CHECK((a * b).conj() == a.conj() * b.conj());
    if (!b.is_zero()) {
      auto q = ExpPoly::exact_div(a * b, b);
      REQUIRE(q.has_value());
      CHECK(*q == a);
    }
  }
  // indivisible example: (E₁ + 2) ∤ E₁
  ExpPoly e1 = ExpPoly::harmonic({1});
  CHECK(!ExpPoly::exact_div(e1, e1 + ExpPoly::constant(1, GRat(2))).has_value());
}
