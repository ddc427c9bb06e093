#pragma once

#include "ck/courant.hpp"

namespace ck {

/// Apply an endomorphism field to a section (components in the model frame).
inline Section apply_endo(const TMat& a, const Section& v) {
  require(a.rows() == a.cols() && a.cols() == static_cast<int>(v.size()),
          "endomorphism shape mismatch");
  Section out(v.size());
  for (int i = 0; i < a.rows(); ++i) {
    TrigPoly acc;
    for (int j = 0; j < a.cols(); ++j)
      if (!a(i, j).is_zero() && !v[j].is_zero()) acc += a(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

inline TMat endo_identity(int r, int m) {
  TMat out(r, r);
  for (int i = 0; i < r; ++i) out(i, i) = TrigPoly::constant(m, 1);
  return out;
}

/// Endomorphism matrix from JSON (rows of flexible scalar entries).
inline TMat endo_from_json(const nlohmann::json& j, int r, int m) {
  require(j.is_array() && static_cast<int>(j.size()) == r, "endomorphism row count mismatch");
  TMat out(r, r);
  for (int i = 0; i < r; ++i) {
    require(j[i].is_array() && static_cast<int>(j[i].size()) == r,
            "endomorphism column count mismatch");
    for (int k = 0; k < r; ++k) out(i, k) = CourantModel::trig_flexible(j[i][k], m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation.
// ---------------------------------------------------------------------------

/// Generalized metric: G² = Id, self-adjoint; E± are then automatically
/// orthogonal complements with nondegenerate restricted scalar products.
inline std::vector<std::string> validate_gen_metric(const CourantModel& model, const TMat& g) {
  std::vector<std::string> issues;
  int r = model.rank();
  if (g.rows() != r || g.cols() != r) return {"G^end has the wrong shape"};
  if (g * g != endo_identity(r, model.torus_dim())) issues.push_back("(G^end)^2 != Id");
  if (model.space().adjoint(g) != g) issues.push_back("G^end is not self-adjoint");
  return issues;
}

/// Generalized almost complex structure: 𝒥² = −Id and orthogonality
/// ⟨𝒥u, 𝒥v⟩ = ⟨u, v⟩ (equivalently 𝒥* 𝒥 = Id).
inline std::vector<std::string> validate_gen_complex(const CourantModel& model, const TMat& j) {
  std::vector<std::string> issues;
  int r = model.rank();
  if (j.rows() != r || j.cols() != r) return {"𝒥 has the wrong shape"};
  TMat id = endo_identity(r, model.torus_dim());
  if (j * j != Rat(-1) * id) issues.push_back("𝒥² != -Id");
  if (model.space().adjoint(j) * j != id) issues.push_back("𝒥 is not orthogonal");
  return issues;
}

inline std::vector<std::string> validate_hyper_triple(const CourantModel& model, const TMat& j1,
                                                      const TMat& j2, const TMat& j3) {
  std::vector<std::string> issues;
  auto sub = [&](const char* tag, const TMat& j) {
    for (const auto& s : validate_gen_complex(model, j))
      issues.push_back(std::string(tag) + ": " + s);
  };
  sub("𝒥₁", j1);
  sub("𝒥₂", j2);
  sub("𝒥₃", j3);
  if (!(j1 * j2 + j2 * j1).is_zero()) issues.push_back("𝒥₁𝒥₂ + 𝒥₂𝒥₁ != 0");
  if (!(j1 * j3 + j3 * j1).is_zero()) issues.push_back("𝒥₁𝒥₃ + 𝒥₃𝒥₁ != 0");
  if (!(j2 * j3 + j3 * j2).is_zero()) issues.push_back("𝒥₂𝒥₃ + 𝒥₃𝒥₂ != 0");
  if (j3 != j1 * j2) issues.push_back("𝒥₃ != 𝒥₁𝒥₂");
  return issues;
}

/// Generalized almost Hermitian pair: valid G and 𝒥 with G(𝒥u, 𝒥v) = G(u,v);
/// then [G^end, 𝒥] = 0 and 𝒥₂ := G^end𝒥 is a valid almost complex structure.
inline std::vector<std::string> validate_hermitian_pair(const CourantModel& model, const TMat& g,
                                                        const TMat& j) {
  std::vector<std::string> issues = validate_gen_metric(model, g);
  for (const auto& s : validate_gen_complex(model, j)) issues.push_back(s);
  if (!issues.empty()) return issues;
  if (model.space().adjoint(j) * g * j != g) issues.push_back("G(𝒥u,𝒥v) != G(u,v)");
  if (!(g * j - j * g).is_zero()) issues.push_back("[G^end, 𝒥] != 0");
  for (const auto& s : validate_gen_complex(model, g * j))
    issues.push_back(std::string("𝒥₂ = G^end𝒥: ") + s);
  return issues;
}

// ---------------------------------------------------------------------------
// Nijenhuis tensor and integrability.
// ---------------------------------------------------------------------------

/// N_𝒥(u,v,w) = ⟨[𝒥u,𝒥v] − [u,v] − 𝒥([𝒥u,v] + [u,𝒥v]), w⟩, assembled on
/// the frame and asserted totally skew before returning.
inline Alt nijenhuis(const CourantModel& model, const TMat& j) {
  {
    auto issues = validate_gen_complex(model, j);
    if (!issues.empty()) throw error("invalid generalized almost complex structure: " + issues[0]);
  }
  int r = model.rank();
  std::vector<Section> frame(r), jframe(r);
  for (int i = 0; i < r; ++i) {
    frame[i] = sec_zero(r);
    frame[i][i] = TrigPoly::constant(model.torus_dim(), 1);
    jframe[i] = apply_endo(j, frame[i]);
  }
  Tensor t(r, {false, false, false});
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      if (a == b) continue;  // N(u,u) = 0 once skewness is asserted
      Section n = sec_sub(model.dorfman(jframe[a], jframe[b]), model.dorfman(frame[a], frame[b]));
      Section inner =
          sec_add(model.dorfman(jframe[a], frame[b]), model.dorfman(frame[a], jframe[b]));
      n = sec_sub(n, apply_endo(j, inner));
      for (int c = 0; c < r; ++c) t.at({a, b, c}) = model.pair(n, frame[c]);
    }
  if (!is_totally_skew(t))
    throw internal_check_failure("Nijenhuis tensor is not totally skew-symmetric");
  return skew3(t);
}

inline bool is_integrable(const CourantModel& model, const TMat& j) {
  return nijenhuis(model, j).is_zero();
}

/// (1,0)-bundle of 𝒥: the +i eigenbundle over the complexified function ring;
/// requires constant pointwise rank r/2.
inline std::vector<std::vector<ExpPoly>> one_zero_bundle(const CourantModel& model, const TMat& j) {
  int r = model.rank();
  EMat a(r, r);
  for (int i = 0; i < r; ++i) {
    for (int k = 0; k < r; ++k) a(i, k) = ExpPoly::from_trig(j(i, k));
    a(i, i) -= ExpPoly::i_unit(model.torus_dim());
  }
  int rk = generic_rank(a);
  require(2 * rk == r, "(1,0)-bundle has wrong generic rank");
  detail::check_constant_rank(a, rk, "one_zero_bundle");
  auto ker = ring_kernel(a);
  require(static_cast<int>(ker.size()) == r - rk, "(1,0)-bundle kernel extraction failed");
  return ker;
}

// ---------------------------------------------------------------------------
// Bracket-level generalized Kähler checks.
// ---------------------------------------------------------------------------

/// Dorfman bracket of complexified sections.
inline std::vector<ExpPoly> dorfman_c(const CourantModel& model, const std::vector<ExpPoly>& u,
                                      const std::vector<ExpPoly>& v) {
  int r = model.rank();
  Section ur(r), ui(r), vr(r), vi(r);
  for (int k = 0; k < r; ++k) {
    ur[k] = u[k].real_part();
    ui[k] = u[k].imag_part();
    vr[k] = v[k].real_part();
    vi[k] = v[k].imag_part();
  }
  Section re = sec_sub(model.dorfman(ur, vr), model.dorfman(ui, vi));
  Section im = sec_add(model.dorfman(ur, vi), model.dorfman(ui, vr));
  std::vector<ExpPoly> out(r);
  for (int k = 0; k < r; ++k) out[k] = ExpPoly::from_trig(re[k], im[k]);
  return out;
}

struct GkCheckResult {
  bool closure_plus = false;    // L ∩ (E₊)_ℂ closed under the bracket
  bool closure_minus = false;   // L ∩ (E₋)_ℂ closed under the bracket
  bool j1_integrable = false;   // N_𝒥₁ = 0
  bool j2_integrable = false;   // N_𝒥₂ = 0
  std::string witness;
  bool closure() const { return closure_plus && closure_minus; }
  bool integrable() const { return j1_integrable && j2_integrable; }
  /// Both routes must agree (they are equivalent characterizations).
  bool consistent() const { return closure() == integrable(); }
  bool value() const { return closure(); }
};

/// Generalized Kähler check: closure of L ∩ (E±)_ℂ under the Dorfman bracket,
/// computed independently from the integrability of 𝒥₁ and 𝒥₂ = G^end𝒥₁ and
/// compared.  Closure of an isotropic subbundle under the bracket of a basis
/// of sections extends to all function multiples by the Leibniz identities,
/// so the basis test is exhaustive.
inline GkCheckResult gk_bracket_check(const CourantModel& model, const TMat& g, const TMat& j) {
  {
    auto issues = validate_hermitian_pair(model, g, j);
    if (!issues.empty())
      throw error("invalid generalized almost Hermitian pair: " + issues[0]);
  }
  int r = model.rank(), m = model.torus_dim();
  GkCheckResult out;
  out.j1_integrable = is_integrable(model, j);
  out.j2_integrable = is_integrable(model, g * j);

  // membership matrices: v ∈ L ∩ (E±)_ℂ  ⟺  (𝒥 − i)v = 0 and (Id ∓ G)v = 0
  EMat jc(r, r), gc(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      jc(a, b) = ExpPoly::from_trig(j(a, b));
      gc(a, b) = ExpPoly::from_trig(g(a, b));
    }
  EMat idm(r, r);
  for (int a = 0; a < r; ++a) idm(a, a) = ExpPoly::constant(m, GRat(1));
  for (int a = 0; a < r; ++a) jc(a, a) -= ExpPoly::i_unit(m);

  auto closed = [&](int sign, bool& flag, const char* tag) {
    EMat proj = sign > 0 ? idm - gc : idm + gc;  // annihilates E_{±}
    EMat stacked(2 * r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        stacked(a, b) = jc(a, b);
        stacked(r + a, b) = proj(a, b);
      }
    auto basis = ring_kernel(stacked);
    flag = true;
    for (size_t x = 0; x < basis.size() && flag; ++x)
      for (size_t y = 0; y < basis.size() && flag; ++y) {
        if (x == y) continue;
        std::vector<ExpPoly> br = dorfman_c(model, basis[x], basis[y]);
        std::vector<ExpPoly> r1 = jc.apply(br), r2 = proj.apply(br);
        for (int a = 0; a < r; ++a)
          if (!r1[a].is_zero() || !r2[a].is_zero()) {
            flag = false;
            out.witness = std::string(tag) + ": bracket of basis sections " +
                          std::to_string(x + 1) + "," + std::to_string(y + 1) +
                          " leaves the bundle";
            break;
          }
      }
  };
  closed(+1, out.closure_plus, "L∩E+");
  closed(-1, out.closure_minus, "L∩E-");
  return out;
}

/// The mixed-bracket consequence of the generalized Kähler condition:
/// [u, 𝒥v]₊ = 𝒥[u,v]₊ for u ∈ Γ(E₋), v ∈ Γ(E₊), and the mirrored identity.
inline bool mixed_bracket_identity(const CourantModel& model, const TMat& g, const TMat& j) {
  GkCheckResult gk = gk_bracket_check(model, g, j);
  require(gk.value() && gk.consistent(), "mixed_bracket_identity requires a generalized Kähler pair");
  int r = model.rank(), m = model.torus_dim();
  TMat id = endo_identity(r, m);
  TMat pp = Rat(1, 2) * (id + g), pm = Rat(1, 2) * (id - g);
  std::vector<TrigPoly> mults = {TrigPoly::constant(m, 1)};
  for (int t = 0; t < m; ++t) {
    mults.push_back(TrigPoly::cos1(m, t));
    mults.push_back(TrigPoly::sin1(m, t));
  }
  for (int i = 0; i < r; ++i)
    for (const auto& phi : mults)
      for (int k = 0; k < r; ++k)
        for (const auto& psi : mults) {
          Section su = sec_zero(r), sv = sec_zero(r);
          su[i] = phi;
          sv[k] = psi;
          // u ∈ E₋, v ∈ E₊ for the first identity; swapped for the second
          Section um = apply_endo(pm, su), vp = apply_endo(pp, sv);
          Section lhs = apply_endo(pp, model.dorfman(um, apply_endo(j, vp)));
          Section rhs = apply_endo(j, apply_endo(pp, model.dorfman(um, vp)));
          if (!sec_is_zero(sec_sub(lhs, rhs))) return false;
          Section up = apply_endo(pp, su), vm = apply_endo(pm, sv);
          lhs = apply_endo(pm, model.dorfman(up, apply_endo(j, vm)));
          rhs = apply_endo(j, apply_endo(pm, model.dorfman(up, vm)));
          if (!sec_is_zero(sec_sub(lhs, rhs))) return false;
        }
  return true;
}

}  // namespace ck
