#pragma once

#include <array>
#include <optional>
#include <sstream>
#include <string>

#include "modcomm/rational.hpp"

// Scalars in the quadratic towers Q ⊂ K = Q(√d) ⊂ L = K(√ζ), with a
// designated real embedding sending √d and √ζ to the positive roots.
// The second embedding of L is realized through galois_sigma, never as a
// separate embedding object. All comparisons are exact sign computations.

namespace modcomm {

enum class FieldLevel { base, quad_k, quad_l };

// sign of a + b√d in the designated embedding (d > 1, not a square)
inline int quad_sign(const Rat& a, const Rat& b, const Rat& d) {
  int sa = sgn(a), sb = sgn(b);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  Rat t = a * a - b * b * d;
  int st = sgn(t);
  require(st != 0, errc::internal, "quadratic sign degenerate: d is a square");
  return sa * st;
}

struct FieldDesc {
  FieldLevel level = FieldLevel::base;
  Int d = 0;                  // quad_k / quad_l
  std::array<Rat, 2> zeta{};  // quad_l: zeta = zeta[0] + zeta[1]·√d ∈ K

  static FieldDesc rational() { return FieldDesc{}; }

  static FieldDesc quadratic(const Int& d) {
    require(d > 1, errc::field_mismatch, "quadratic field needs d > 1");
    require(is_squarefree(d), errc::field_mismatch, "quadratic field needs squarefree d");
    FieldDesc f;
    f.level = FieldLevel::quad_k;
    f.d = d;
    return f;
  }

  // L = K(√ζ); ζ ∈ K must be positive in the embedding and not a square in K.
  static FieldDesc quartic(const Int& d, const Rat& z0, const Rat& z1) {
    FieldDesc f = quadratic(d);
    f.level = FieldLevel::quad_l;
    f.zeta = {z0, z1};
    Rat dr(d);
    require(quad_sign(z0, z1, dr) > 0, errc::field_mismatch, "zeta must be positive");
    // ζ square in K iff z0²−z1²d = s² in Q and (z0±s)/2 is a rational square
    bool square = false;
    if (sgn(z1) == 0) {
      square = is_rational_square(z0) || is_rational_square(z0 / dr);
    } else {
      Rat disc = z0 * z0 - z1 * z1 * dr;
      if (auto s = exact_sqrt(disc)) {
        square = is_rational_square((z0 + *s) / 2) || is_rational_square((z0 - *s) / 2);
      }
    }
    require(!square, errc::field_mismatch, "zeta must not be a square in K");
    return f;
  }

  bool operator==(const FieldDesc& o) const {
    if (level != o.level) return false;
    if (level == FieldLevel::base) return true;
    if (d != o.d) return false;
    if (level == FieldLevel::quad_k) return true;
    return zeta == o.zeta;
  }
  bool operator!=(const FieldDesc& o) const { return !(*this == o); }

  // true when this field sits inside `bigger` as the evident subtower
  bool inside(const FieldDesc& bigger) const {
    if (*this == bigger) return true;
    if (level == FieldLevel::base) return true;
    if (level == FieldLevel::quad_k)
      return bigger.level != FieldLevel::base && bigger.d == d;
    return false;
  }

  int coords() const {
    switch (level) {
      case FieldLevel::base: return 1;
      case FieldLevel::quad_k: return 2;
      case FieldLevel::quad_l: return 4;
    }
    return 1;
  }
};

// coords: base [a]; K [a + b√d]; L [(c0 + c1√d) + (c2 + c3√d)·√ζ]
struct TowerScalar {
  FieldDesc field;
  std::array<Rat, 4> c{};

  TowerScalar() = default;
  explicit TowerScalar(const Rat& r) { c[0] = r; }
  TowerScalar(const FieldDesc& f, const Rat& r) : field(f) { c[0] = r; }

  static TowerScalar zero(const FieldDesc& f) { return TowerScalar(f, Rat(0)); }
  static TowerScalar one(const FieldDesc& f) { return TowerScalar(f, Rat(1)); }

  static TowerScalar sqrt_d(const FieldDesc& f) {
    require(f.level != FieldLevel::base, errc::field_mismatch, "sqrt(d) needs a quadratic level");
    TowerScalar x(f, Rat(0));
    x.c[1] = 1;
    return x;
  }

  static TowerScalar sqrt_zeta(const FieldDesc& f) {
    require(f.level == FieldLevel::quad_l, errc::field_mismatch, "sqrt(zeta) needs level L");
    TowerScalar x(f, Rat(0));
    x.c[2] = 1;
    return x;
  }

  bool is_zero() const { return sgn(c[0]) == 0 && sgn(c[1]) == 0 && sgn(c[2]) == 0 && sgn(c[3]) == 0; }
  bool is_rational() const { return sgn(c[1]) == 0 && sgn(c[2]) == 0 && sgn(c[3]) == 0; }

  std::optional<Rat> as_rat() const {
    if (!is_rational()) return std::nullopt;
    return c[0];
  }

  bool operator==(const TowerScalar& o) const { return field == o.field && c == o.c; }
  bool operator!=(const TowerScalar& o) const { return !(*this == o); }
};

// Demotion is on request, never silent.
inline std::optional<TowerScalar> demote_to_k(const TowerScalar& x) {
  if (x.field.level != FieldLevel::quad_l) return std::nullopt;
  if (sgn(x.c[2]) != 0 || sgn(x.c[3]) != 0) return std::nullopt;
  TowerScalar y(FieldDesc::quadratic(x.field.d), x.c[0]);
  y.c[1] = x.c[1];
  return y;
}

inline TowerScalar promote(const TowerScalar& x, const FieldDesc& target) {
  require(x.field.inside(target), errc::field_mismatch, "no promotion between these fields");
  TowerScalar y(target, x.c[0]);
  y.c[1] = x.c[1];
  y.c[2] = x.c[2];
  y.c[3] = x.c[3];
  return y;
}

inline std::pair<TowerScalar, TowerScalar> unify(const TowerScalar& x, const TowerScalar& y) {
  if (x.field == y.field) return {x, y};
  if (x.field.inside(y.field)) return {promote(x, y.field), y};
  if (y.field.inside(x.field)) return {x, promote(y, x.field)};
  fail(errc::field_mismatch, "operands lie in incompatible towers");
}

inline TowerScalar operator+(const TowerScalar& a, const TowerScalar& b) {
  auto [x, y] = unify(a, b);
  for (int i = 0; i < 4; ++i) x.c[i] += y.c[i];
  return x;
}

inline TowerScalar operator-(const TowerScalar& a, const TowerScalar& b) {
  auto [x, y] = unify(a, b);
  for (int i = 0; i < 4; ++i) x.c[i] -= y.c[i];
  return x;
}

inline TowerScalar operator-(const TowerScalar& a) {
  TowerScalar x = a;
  for (auto& v : x.c) v = -v;
  return x;
}

namespace detail {
using K2 = std::array<Rat, 2>;  // element of K as a + b√d

inline K2 k_mul(const K2& x, const K2& y, const Rat& d) {
  return {x[0] * y[0] + x[1] * y[1] * d, x[0] * y[1] + x[1] * y[0]};
}
inline K2 k_add(const K2& x, const K2& y) { return {x[0] + y[0], x[1] + y[1]}; }
inline K2 k_sub(const K2& x, const K2& y) { return {x[0] - y[0], x[1] - y[1]}; }
inline bool k_zero(const K2& x) { return sgn(x[0]) == 0 && sgn(x[1]) == 0; }
inline K2 k_inv(const K2& x, const Rat& d) {
  Rat n = x[0] * x[0] - x[1] * x[1] * d;
  require(sgn(n) != 0, errc::division_by_zero, "inverse of zero in K");
  return {x[0] / n, -x[1] / n};
}
} // namespace detail

inline TowerScalar operator*(const TowerScalar& a, const TowerScalar& b) {
  auto [x, y] = unify(a, b);
  using namespace detail;
  switch (x.field.level) {
    case FieldLevel::base: {
      TowerScalar r(x.field, x.c[0] * y.c[0]);
      return r;
    }
    case FieldLevel::quad_k: {
      Rat d(x.field.d);
      K2 p = k_mul({x.c[0], x.c[1]}, {y.c[0], y.c[1]}, d);
      TowerScalar r(x.field, p[0]);
      r.c[1] = p[1];
      return r;
    }
    case FieldLevel::quad_l: {
      Rat d(x.field.d);
      K2 xa{x.c[0], x.c[1]}, xb{x.c[2], x.c[3]};
      K2 ya{y.c[0], y.c[1]}, yb{y.c[2], y.c[3]};
      K2 zeta{x.field.zeta[0], x.field.zeta[1]};
      // (A + B√ζ)(C + D√ζ) = (AC + BDζ) + (AD + BC)√ζ
      K2 lo = k_add(k_mul(xa, ya, d), k_mul(k_mul(xb, yb, d), zeta, d));
      K2 hi = k_add(k_mul(xa, yb, d), k_mul(xb, ya, d));
      TowerScalar r(x.field, lo[0]);
      r.c[1] = lo[1];
      r.c[2] = hi[0];
      r.c[3] = hi[1];
      return r;
    }
  }
  fail(errc::internal, "unreachable");
}

inline TowerScalar inverse(const TowerScalar& x) {
  require(!x.is_zero(), errc::division_by_zero, "inverse of zero");
  using namespace detail;
  switch (x.field.level) {
    case FieldLevel::base:
      return TowerScalar(x.field, Rat(1) / x.c[0]);
    case FieldLevel::quad_k: {
      Rat d(x.field.d);
      K2 v = k_inv({x.c[0], x.c[1]}, d);
      TowerScalar r(x.field, v[0]);
      r.c[1] = v[1];
      return r;
    }
    case FieldLevel::quad_l: {
      // (A + B√ζ)⁻¹ = (A − B√ζ)/(A² − B²ζ); ζ non-square keeps the norm nonzero
      Rat d(x.field.d);
      K2 A{x.c[0], x.c[1]}, B{x.c[2], x.c[3]};
      K2 zeta{x.field.zeta[0], x.field.zeta[1]};
      K2 norm = k_sub(k_mul(A, A, d), k_mul(k_mul(B, B, d), zeta, d));
      require(!k_zero(norm), errc::division_by_zero, "inverse of zero in L");
      K2 ninv = k_inv(norm, d);
      K2 lo = k_mul(A, ninv, d);
      K2 hi = k_mul({-B[0], -B[1]}, ninv, d);
      TowerScalar r(x.field, lo[0]);
      r.c[1] = lo[1];
      r.c[2] = hi[0];
      r.c[3] = hi[1];
      return r;
    }
  }
  fail(errc::internal, "unreachable");
}

inline TowerScalar operator/(const TowerScalar& a, const TowerScalar& b) {
  auto [x, y] = unify(a, b);
  return x * inverse(y);
}

// Top-level Galois conjugation: negates √ζ at level L, √d at level K.
inline TowerScalar galois_sigma(const TowerScalar& x) {
  TowerScalar y = x;
  switch (x.field.level) {
    case FieldLevel::base:
      fail(errc::base_field_has_no_conjugation, "sigma on Q");
    case FieldLevel::quad_k:
      y.c[1] = -y.c[1];
      return y;
    case FieldLevel::quad_l:
      y.c[2] = -y.c[2];
      y.c[3] = -y.c[3];
      return y;
  }
  fail(errc::internal, "unreachable");
}

inline int sign(const TowerScalar& x) {
  using namespace detail;
  switch (x.field.level) {
    case FieldLevel::base:
      return sgn(x.c[0]);
    case FieldLevel::quad_k:
      return quad_sign(x.c[0], x.c[1], Rat(x.field.d));
    case FieldLevel::quad_l: {
      Rat d(x.field.d);
      K2 A{x.c[0], x.c[1]}, B{x.c[2], x.c[3]};
      K2 zeta{x.field.zeta[0], x.field.zeta[1]};
      auto ksign = [&](const K2& v) { return quad_sign(v[0], v[1], d); };
      int sa = ksign(A), sb = ksign(B);
      if (sb == 0) return sa;
      if (sa == 0) return sb;
      if (sa == sb) return sa;
      K2 t = k_sub(k_mul(A, A, d), k_mul(k_mul(B, B, d), zeta, d));
      int st = ksign(t);
      require(st != 0, errc::internal, "quartic sign degenerate: zeta is a square");
      return sa * st;
    }
  }
  fail(errc::internal, "unreachable");
}

inline int compare(const TowerScalar& a, const TowerScalar& b) { return sign(a - b); }

inline std::string to_string(const Rat& q) {
  std::ostringstream os;
  os << q.get_num();
  if (q.get_den() != 1) os << "/" << q.get_den();
  return os.str();
}

// Canonical text: `p/q`, `(p1/q1)+(p2/q2)*sqrt(d)`, and the analogous
// two-coefficient form over K with sqrt(zeta).
inline std::string to_string(const TowerScalar& x) {
  std::string root_d;
  if (x.field.level != FieldLevel::base) root_d = "sqrt(" + Int(x.field.d).get_str() + ")";
  auto k_part = [&](const Rat& a, const Rat& b) {
    return "(" + to_string(a) + ")+(" + to_string(b) + ")*" + root_d;
  };
  switch (x.field.level) {
    case FieldLevel::base:
      return to_string(x.c[0]);
    case FieldLevel::quad_k:
      return k_part(x.c[0], x.c[1]);
    case FieldLevel::quad_l:
      return "(" + k_part(x.c[0], x.c[1]) + ")+(" + k_part(x.c[2], x.c[3]) + ")*sqrt(zeta)";
  }
  return "";
}

inline std::string to_string(const FieldDesc& f) {
  switch (f.level) {
    case FieldLevel::base:
      return "Q";
    case FieldLevel::quad_k:
      return "K(d=" + Int(f.d).get_str() + ")";
    case FieldLevel::quad_l:
      return "L(d=" + Int(f.d).get_str() + ",zeta=(" + to_string(f.zeta[0]) + "," +
             to_string(f.zeta[1]) + "))";
  }
  return "";
}

} // namespace modcomm
