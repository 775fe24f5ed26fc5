#pragma once

#include <optional>
#include <string>
#include <vector>

#include "modcomm/linalg.hpp"
#include "modcomm/mat2.hpp"
#include "modcomm/modgroup.hpp"

// Field-tower classification of candidate commensurators, conjugator
// reconstruction through the Sylvester system AX = XB, the η-quadratic
// bη² + (a−d)η − (c+f) = 0, and the trace obstruction for Galois pairs.

namespace modcomm {

enum class FieldTag { rational, sqrt_q, quad_k, quad_l, unsupported };

struct FieldClass {
  FieldTag tag = FieldTag::rational;
  Int d = 0;                  // quad_k / quad_l
  std::array<Rat, 2> zeta{};  // quad_l

  std::string str() const {
    switch (tag) {
      case FieldTag::rational: return "Rational";
      case FieldTag::sqrt_q: return "SqrtQ";
      case FieldTag::quad_k: return "QuadK(" + d.get_str() + ")";
      case FieldTag::quad_l: return "QuadL(" + d.get_str() + ")";
      case FieldTag::unsupported: return "Unsupported";
    }
    return "";
  }
};

// Minimal tag: Rational ⊂ SqrtQ ⊂ QuadK ⊂ QuadL.
inline FieldClass classify_field(const ProjMat& g) {
  FieldClass out;
  if (g.all_rational()) {
    out.tag = FieldTag::rational;
    return out;
  }
  if (sqrtq_membership(g)) {
    out.tag = FieldTag::sqrt_q;
    return out;
  }
  bool k_level = true;
  for (const auto& e : g.e)
    if (e.field.level == FieldLevel::quad_l && (sgn(e.c[2]) != 0 || sgn(e.c[3]) != 0))
      k_level = false;
  if (g.field.level == FieldLevel::quad_k || k_level) {
    out.tag = FieldTag::quad_k;
    out.d = g.field.d;
    return out;
  }
  out.tag = FieldTag::quad_l;
  out.d = g.field.d;
  out.zeta = g.field.zeta;
  return out;
}

namespace detail {

// Sylvester system for AX = XB over the entries of A and ±B.
inline IMatrix conjugacy_system(const IntMat& A, const std::array<Int, 4>& B) {
  const Int &a = A.a, &b = A.b, &c = A.c, &d = A.d;
  const Int &e = B[0], &f = B[1], &g = B[2], &h = B[3];
  return IMatrix{
      {a - e, -g, b, Int(0)},
      {-f, a - h, Int(0), b},
      {c, Int(0), d - e, -g},
      {Int(0), c, -f, d - h},
  };
}

enum class FormOutcome { positive, negative_only, singular_only };

struct RawConjugator {
  FormOutcome outcome = FormOutcome::singular_only;
  IVec x;  // integral matrix entries with det > 0, when outcome is positive
  Int det = 0;
};

// The determinant is a binary quadratic form on the (≤ 2 dimensional)
// nullspace; decide exactly whether it takes a positive value and return a
// deterministic witness.  All-negative determinants are the real-conjugacy
// obstruction; an identically singular nullspace means not conjugate.
inline RawConjugator pick_positive_det(const std::vector<IVec>& kernel) {
  auto det_of = [](const IVec& v) -> Int { return v[0] * v[3] - v[1] * v[2]; };
  auto combine = [](const IVec& a, const IVec& b, const Int& s, const Int& t) {
    IVec out(4);
    for (int i = 0; i < 4; ++i) out[i] = s * a[i] + t * b[i];
    Int g = 0;
    for (const Int& x : out) g = gcd(g, x);
    if (g > 1)
      for (auto& x : out) x /= g;
    return out;
  };
  auto positive = [&](IVec v) {
    Int d = det_of(v);
    require(sgn(d) > 0, errc::internal, "quadratic form analysis missed its positive value");
    return RawConjugator{FormOutcome::positive, std::move(v), d};
  };
  auto all_nonzero = [](const IVec& v) {
    for (const Int& x : v)
      if (sgn(x) == 0) return false;
    return true;
  };
  if (kernel.empty()) return {};
  if (kernel.size() == 1) {
    Int d = det_of(kernel[0]);
    if (sgn(d) == 0) return {};
    if (sgn(d) < 0) return {FormOutcome::negative_only, {}, 0};
    return positive(kernel[0]);
  }
  require(kernel.size() == 2, errc::internal, "conjugacy nullspace has dimension > 2");
  const IVec &v1 = kernel[0], &v2 = kernel[1];
  // q(s, t) = det(s·v1 + t·v2) = d1·s² + m·st + d2·t²
  Int d1 = det_of(v1), d2 = det_of(v2), m;
  {
    IVec sum(4);
    for (int i = 0; i < 4; ++i) sum[i] = v1[i] + v2[i];
    m = det_of(sum) - d1 - d2;
  }
  // scan the short deterministic list twice: all-nonzero entries beat sparse
  // ones (the nonzero branch feeds the eta cross-validation)
  std::vector<IVec> scan{v1, v2, combine(v1, v2, 1, 1), combine(v1, v2, 1, -1)};
  for (bool want_dense : {true, false})
    for (const IVec& v : scan) {
      if (sgn(det_of(v)) <= 0) continue;
      if (want_dense && !all_nonzero(v)) continue;
      return positive(v);
    }
  if (sgn(d1) == 0 && sgn(m) != 0)
    return positive(combine(v1, v2, (abs(d2) + 1) * sgn(m), 1));  // q(s,1) = m·s + d2
  if (sgn(d2) == 0 && sgn(m) != 0)
    return positive(combine(v1, v2, 1, (abs(d1) + 1) * sgn(m)));
  if (sgn(d1) == 0 && sgn(d2) == 0 && sgn(m) == 0) return {};  // q ≡ 0: only singular
  // d1, d2 < 0: positive values exist iff the discriminant is positive; the
  // maximum of q(s, t)/t² sits at s/t = −m/(2·d1) — use (s, t) = (m, −2·d1)
  Int disc = m * m - 4 * d1 * d2;
  if (sgn(disc) <= 0) return {FormOutcome::negative_only, {}, 0};
  return positive(combine(v1, v2, m, -2 * d1));
}

} // namespace detail

// x with x⁻¹Ax = B in PSL: a nonzero nullspace solution of AX = XB scaled to
// determinant 1. Scaling adjoins √ of a rational, so x lands in Q or Q(√d);
// an all-negative-determinant nullspace is the real-conjugacy obstruction.
inline ProjMat conjugator_between(const IntMat& A, const IntMat& B) {
  require(!(A.is_identity() && B.is_identity()), errc::not_conjugate,
          "conjugation of ±I against ±I is degenerate");
  Int tA = A.a + A.d, tB = B.a + B.d;
  std::vector<std::array<Int, 4>> sides;  // SL2 lifts of B with matching trace
  if (tA == tB) sides.push_back({B.a, B.b, B.c, B.d});
  if (tA == -tB) sides.push_back({Int(-B.a), Int(-B.b), Int(-B.c), Int(-B.d)});
  require(!sides.empty(), errc::not_conjugate, "traces differ");

  std::optional<detail::RawConjugator> raw;
  bool negative_seen = false;
  for (const auto& side : sides) {
    auto kernel = kernel_basis(detail::conjugacy_system(A, side), 4);
    detail::RawConjugator pick = detail::pick_positive_det(kernel);
    if (pick.outcome == detail::FormOutcome::positive) {
      raw = std::move(pick);
      break;
    }
    if (pick.outcome == detail::FormOutcome::negative_only) negative_seen = true;
  }
  require(raw.has_value() || !negative_seen, errc::no_real_scaling,
          "every invertible solution has negative determinant");
  require(raw.has_value(), errc::not_conjugate,
          "nullspace is trivial or carries only singular solutions");

  auto [d0, s] = squarefree_split(raw->det);
  ProjMat x;
  if (d0 == 1) {
    Rat scale = make_rat(1, s);
    x = ProjMat(FieldDesc::rational(), TowerScalar(raw->x[0] * scale),
                TowerScalar(raw->x[1] * scale), TowerScalar(raw->x[2] * scale),
                TowerScalar(raw->x[3] * scale));
  } else {
    FieldDesc f = FieldDesc::quadratic(d0);
    Rat scale = make_rat(1, s * d0);  // 1/√det = √d0/(s·d0)
    auto lift = [&](const Int& v) {
      TowerScalar t(f, Rat(0));
      t.c[1] = Rat(v) * scale;
      return t;
    };
    x = ProjMat(f, lift(raw->x[0]), lift(raw->x[1]), lift(raw->x[2]), lift(raw->x[3]));
  }
  ProjMat lhs = inverse(x) * ProjMat(A) * x;
  require(lhs == promote_mat(ProjMat(B), x.field), errc::internal,
          "reconstructed conjugator fails to conjugate");
  return x;
}

struct EtaRoots {
  FieldDesc field;
  TowerScalar r1, r2;
  Int disc;  // (a−d)² + 4b(c+f)
};

// Roots of bη² + (a−d)η − (c+f) = 0, the appendix normalization equation;
// a,b,c,d from A and e,f,g,h from B.
inline EtaRoots eta_roots(const IntMat& A, const IntMat& B) {
  require(sgn(A.b) != 0, errc::zero_leading_coefficient, "the equation needs b != 0");
  Int lin = A.a - A.d;
  Int cst = A.c + B.b;  // c + f
  Int disc = lin * lin + 4 * A.b * cst;
  require(sgn(disc) >= 0, errc::negative_discriminant, "no real roots");
  EtaRoots out;
  out.disc = disc;
  if (auto r = exact_sqrt(disc)) {
    out.field = FieldDesc::rational();
    out.r1 = TowerScalar(make_rat(-lin + *r, 2 * A.b));
    out.r2 = TowerScalar(make_rat(-lin - *r, 2 * A.b));
    return out;
  }
  auto [d0, s] = squarefree_split(disc);
  FieldDesc f = FieldDesc::quadratic(d0);
  // (−lin ± s√d0)/(2b)
  auto root = [&](int sign) {
    TowerScalar t(f, make_rat(-lin, 2 * A.b));
    t.c[1] = make_rat(sign * s, 2 * A.b);
    return t;
  };
  out.field = f;
  out.r1 = root(+1);
  out.r2 = root(-1);
  return out;
}

enum class SelfConjugacy { plus, minus, neither };

inline const char* to_string(SelfConjugacy s) {
  switch (s) {
    case SelfConjugacy::plus: return "Plus";
    case SelfConjugacy::minus: return "Minus";
    case SelfConjugacy::neither: return "Neither";
  }
  return "";
}

// A = ±σ(A) on a determinant-1 lift: Plus iff every √ζ-coordinate vanishes,
// Minus iff every K-coordinate vanishes.
inline SelfConjugacy check_self_conjugate(const ProjMat& x) {
  require(x.field.level == FieldLevel::quad_l, errc::field_mismatch,
          "self-conjugacy is a question at level L");
  bool plus = true, minus = true;
  for (const auto& e : x.e) {
    if (sgn(e.c[2]) != 0 || sgn(e.c[3]) != 0) plus = false;
    if (sgn(e.c[0]) != 0 || sgn(e.c[1]) != 0) minus = false;
  }
  if (plus) return SelfConjugacy::plus;
  if (minus) return SelfConjugacy::minus;
  return SelfConjugacy::neither;
}

struct TraceObstruction {
  Word word;  // over H-generators (1..r) and the extra letter (r+1)
  ProjMat w, sigma_w;
  TowerScalar tr_sq_w, tr_sq_sigma;
};

// Search for a Galois pair (W, σW), both hyperbolic, with tr(W) ≠ tr(σW):
// such a pair certifies failure of the foliation-preservation condition.
inline std::optional<TraceObstruction> trace_obstruction(const SchreierBasis& h_basis,
                                                         const ProjMat& extra, int word_bound) {
  require(extra.field.level != FieldLevel::base, errc::field_mismatch,
          "the extra generator must live above Q");
  int rank = h_basis.rank + 1;
  const FieldDesc& f = extra.field;
  std::vector<ProjMat> letters;
  for (const auto& g : h_basis.gens) {
    ProjMat m(g.mat);
    letters.push_back(ProjMat(f, promote(m.e[0], f), promote(m.e[1], f), promote(m.e[2], f),
                              promote(m.e[3], f)));
  }
  letters.push_back(extra);

  TowerScalar four(f, Rat(4));
  WordEnumerator en(rank);
  while (true) {
    Word w = en.next();
    if ((int)w.size() > word_bound) return std::nullopt;
    bool uses_extra = false;
    for (int letter : w)
      if (std::abs(letter) == rank) uses_extra = true;
    if (!uses_extra) continue;  // σ fixes purely integral words
    ProjMat W;
    bool first = true;
    for (int letter : w) {
      const ProjMat& base = letters[std::abs(letter) - 1];
      ProjMat piece = letter > 0 ? base : inverse(base);
      W = first ? piece : W * piece;
      first = false;
    }
    ProjMat SW = entrywise_sigma(W);
    TowerScalar t1 = W.trace(), t2 = SW.trace();
    TowerScalar q1 = t1 * t1, q2 = t2 * t2;
    if (sign(q1 - four) <= 0) continue;
    if (sign(q2 - four) <= 0) continue;
    if (compare(q1, q2) == 0) continue;
    TraceObstruction out;
    out.word = w;
    out.w = W;
    out.sigma_w = SW;
    out.tr_sq_w = q1;
    out.tr_sq_sigma = q2;
    return out;
  }
}

} // namespace modcomm
