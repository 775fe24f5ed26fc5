#pragma once

#include <array>
#include <optional>
#include <string>

#include "modcomm/tower.hpp"

// 2×2 matrices: integral PSL2(Z) representatives, rational matrices, and
// determinant-1 projective matrices over the quadratic towers, together
// with the PSL2(Q)√Q membership decision.

namespace modcomm {

// PSL2(Z) element: det 1, sign canonicalized (first nonzero of a,b,c,d positive)
struct IntMat {
  Int a = 1, b = 0, c = 0, d = 1;

  IntMat() = default;
  IntMat(Int a_, Int b_, Int c_, Int d_) : a(a_), b(b_), c(c_), d(d_) {
    require(a * d - b * c == 1, errc::internal, "IntMat must have determinant 1");
    canonicalize();
  }

  void canonicalize() {
    for (const Int* e : {&a, &b, &c, &d}) {
      if (sgn(*e) == 0) continue;
      if (sgn(*e) < 0) { a = -a; b = -b; c = -c; d = -d; }
      return;
    }
  }

  bool is_identity() const { return a == 1 && b == 0 && c == 0 && d == 1; }
  Int trace_sq() const { Int t = a + d; return t * t; }

  bool operator==(const IntMat& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
  bool operator!=(const IntMat& o) const { return !(*this == o); }
  bool operator<(const IntMat& o) const {
    if (a != o.a) return a < o.a;
    if (b != o.b) return b < o.b;
    if (c != o.c) return c < o.c;
    return d < o.d;
  }
};

inline IntMat operator*(const IntMat& x, const IntMat& y) {
  return IntMat(x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d);
}

inline IntMat inverse(const IntMat& m) { return IntMat(m.d, -m.b, -m.c, m.a); }

inline IntMat pow(IntMat base, Int e) {
  if (sgn(e) < 0) { base = inverse(base); e = -e; }
  IntMat r;
  while (sgn(e) > 0) {
    if (mpz_odd_p(e.get_mpz_t())) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

// ±I mod k, entrywise
inline bool congruent_identity_mod(const IntMat& m, const Int& k) {
  auto zero = [&](const Int& x) { return mod_floor(x, k) == 0; };
  bool plus = zero(m.a - 1) && zero(m.b) && zero(m.c) && zero(m.d - 1);
  bool minus = zero(m.a + 1) && zero(m.b) && zero(m.c) && zero(m.d + 1);
  return plus || minus;
}

inline IntMat mat_S() { return IntMat(0, -1, 1, 0); }
inline IntMat mat_T() { return IntMat(1, 1, 0, 1); }
inline IntMat mat_U() { return mat_S() * mat_T(); }  // order 3 in PSL2(Z)

// Rational 2×2 matrix, not necessarily det 1.
struct QMat2 {
  Rat a = 0, b = 0, c = 0, d = 0;

  QMat2() = default;
  QMat2(Rat a_, Rat b_, Rat c_, Rat d_) : a(a_), b(b_), c(c_), d(d_) {}
  explicit QMat2(const IntMat& m) : a(m.a), b(m.b), c(m.c), d(m.d) {}

  Rat det() const { return a * d - b * c; }
  bool operator==(const QMat2& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
  bool operator!=(const QMat2& o) const { return !(*this == o); }
};

inline QMat2 operator*(const QMat2& x, const QMat2& y) {
  return QMat2(x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
               x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d);
}

inline QMat2 operator*(const Rat& s, const QMat2& m) {
  return QMat2(s * m.a, s * m.b, s * m.c, s * m.d);
}

inline QMat2 inverse(const QMat2& m) {
  Rat dt = m.det();
  require(sgn(dt) != 0, errc::division_by_zero, "inverse of singular matrix");
  Rat i = Rat(1) / dt;
  return QMat2(i * m.d, -i * m.b, -i * m.c, i * m.a);
}

inline bool is_integral(const QMat2& m) {
  return is_integer(m.a) && is_integer(m.b) && is_integer(m.c) && is_integer(m.d);
}

// Integral det-1 matrices drop into PSL2(Z).
inline std::optional<IntMat> as_psl2z(const QMat2& m) {
  if (!is_integral(m)) return std::nullopt;
  Rat dt = m.det();
  if (dt != 1) return std::nullopt;
  return IntMat(rat_num(m.a), rat_num(m.b), rat_num(m.c), rat_num(m.d));
}

// Determinant-1 projective matrix over a tower field, canonical sign.
struct ProjMat {
  FieldDesc field;
  std::array<TowerScalar, 4> e;  // a, b, c, d

  ProjMat() {
    e = {TowerScalar(Rat(1)), TowerScalar(Rat(0)), TowerScalar(Rat(0)), TowerScalar(Rat(1))};
  }

  ProjMat(const FieldDesc& f, TowerScalar a, TowerScalar b, TowerScalar c, TowerScalar d)
      : field(f) {
    e = {promote(a, f), promote(b, f), promote(c, f), promote(d, f)};
    TowerScalar dt = e[0] * e[3] - e[1] * e[2];
    require(dt == TowerScalar::one(f), errc::internal, "ProjMat must have determinant 1");
    canonicalize();
  }

  explicit ProjMat(const IntMat& m)
      : ProjMat(FieldDesc::rational(), TowerScalar(Rat(m.a)), TowerScalar(Rat(m.b)),
                TowerScalar(Rat(m.c)), TowerScalar(Rat(m.d))) {}

  explicit ProjMat(const QMat2& m)
      : ProjMat(FieldDesc::rational(), TowerScalar(m.a), TowerScalar(m.b), TowerScalar(m.c),
                TowerScalar(m.d)) {}

  void canonicalize() {
    for (const auto& x : e) {
      if (x.is_zero()) continue;
      if (sign(x) < 0)
        for (auto& y : e) y = -y;
      return;
    }
  }

  const TowerScalar& a() const { return e[0]; }
  const TowerScalar& b() const { return e[1]; }
  const TowerScalar& c() const { return e[2]; }
  const TowerScalar& d() const { return e[3]; }

  TowerScalar trace() const { return e[0] + e[3]; }

  bool all_rational() const {
    for (const auto& x : e)
      if (!x.is_rational()) return false;
    return true;
  }

  std::optional<QMat2> as_rational() const {
    if (!all_rational()) return std::nullopt;
    return QMat2(*e[0].as_rat(), *e[1].as_rat(), *e[2].as_rat(), *e[3].as_rat());
  }

  bool operator==(const ProjMat& o) const { return field == o.field && e == o.e; }
  bool operator!=(const ProjMat& o) const { return !(*this == o); }
};

inline ProjMat operator*(const ProjMat& x, const ProjMat& y) {
  require(x.field == y.field || x.field.inside(y.field) || y.field.inside(x.field),
          errc::field_mismatch, "matrix product across incompatible towers");
  const FieldDesc& f = x.field.inside(y.field) ? y.field : x.field;
  return ProjMat(f, x.e[0] * y.e[0] + x.e[1] * y.e[2], x.e[0] * y.e[1] + x.e[1] * y.e[3],
                 x.e[2] * y.e[0] + x.e[3] * y.e[2], x.e[2] * y.e[1] + x.e[3] * y.e[3]);
}

inline ProjMat inverse(const ProjMat& m) {
  return ProjMat(m.field, m.e[3], -m.e[1], -m.e[2], m.e[0]);
}

inline ProjMat promote_mat(const ProjMat& m, const FieldDesc& f) {
  return ProjMat(f, promote(m.e[0], f), promote(m.e[1], f), promote(m.e[2], f),
                 promote(m.e[3], f));
}

inline ProjMat entrywise_sigma(const ProjMat& m) {
  return ProjMat(m.field, galois_sigma(m.e[0]), galois_sigma(m.e[1]), galois_sigma(m.e[2]),
                 galois_sigma(m.e[3]));
}

// g = √q·B projectively, q the positive squarefree integer coset representative,
// B rational with det B = 1/q.
struct SqrtQDecomp {
  Int q = 1;
  QMat2 mat;
};

// Decides membership in PSL2(Q)√Q = Comm(PSL2(Z)): present iff every pairwise
// product of entries of a lift is rational.
inline std::optional<SqrtQDecomp> sqrtq_membership(const ProjMat& g) {
  int lead = -1;
  for (int i = 0; i < 4; ++i)
    if (!g.e[i].is_zero()) { lead = i; break; }
  require(lead >= 0, errc::internal, "zero matrix");
  std::array<Rat, 4> prod;  // entry_i · entry_lead
  for (int i = 0; i < 4; ++i) {
    auto p = (g.e[i] * g.e[lead]).as_rat();
    if (!p) return std::nullopt;
    prod[i] = *p;
  }
  // cross products are then rational automatically: e_i e_j = (e_i e)(e_j e)/e²
  Rat q_raw = prod[lead];  // lead², positive
  Int q_sf = squarefree_coset_rep(q_raw);
  // lead = s·√q_sf with s = ±√(q_raw/q_sf) rational
  Rat s2 = q_raw / Rat(q_sf);
  auto s = exact_sqrt(s2);
  require(s.has_value(), errc::internal, "squarefree reduction lost a square");
  Rat scale = Rat(sign(g.e[lead])) * (*s) / q_raw;  // = 1/(s·q_sf·sign) · ... = sign/(lead·√q_sf)·lead²'s worth
  SqrtQDecomp out;
  out.q = q_sf;
  out.mat = QMat2(prod[0] * scale, prod[1] * scale, prod[2] * scale, prod[3] * scale);
  return out;
}

inline ProjMat from_decomp(const SqrtQDecomp& d) {
  if (d.q == 1) {
    return ProjMat(FieldDesc::rational(), TowerScalar(d.mat.a), TowerScalar(d.mat.b),
                   TowerScalar(d.mat.c), TowerScalar(d.mat.d));
  }
  FieldDesc f = FieldDesc::quadratic(d.q);
  auto lift = [&](const Rat& r) {
    TowerScalar x(f, Rat(0));
    x.c[1] = r;  // r·√q
    return x;
  };
  return ProjMat(f, lift(d.mat.a), lift(d.mat.b), lift(d.mat.c), lift(d.mat.d));
}

// A^g = g⁻¹Ag for integral A and g ∈ PSL2(Q)√Q; the scalar part cancels.
inline QMat2 rational_conjugate(const IntMat& A, const SqrtQDecomp& g) {
  return inverse(g.mat) * QMat2(A) * g.mat;
}

inline QMat2 conjugate_by(const QMat2& m, const SqrtQDecomp& g) {
  return inverse(g.mat) * m * g.mat;
}

enum class TraceClass { elliptic, parabolic, hyperbolic };

inline const char* to_string(TraceClass c) {
  switch (c) {
    case TraceClass::elliptic: return "elliptic";
    case TraceClass::parabolic: return "parabolic";
    case TraceClass::hyperbolic: return "hyperbolic";
  }
  return "";
}

// Exact comparison of tr² against 4.
inline TraceClass classify_by_trace(const ProjMat& m) {
  TowerScalar t = m.trace();
  int s = sign(t * t - TowerScalar(m.field, Rat(4)));
  if (s < 0) return TraceClass::elliptic;
  if (s == 0) return TraceClass::parabolic;
  return TraceClass::hyperbolic;
}

inline TraceClass classify_by_trace(const IntMat& m) { return classify_by_trace(ProjMat(m)); }

} // namespace modcomm
