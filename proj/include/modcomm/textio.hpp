#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "modcomm/fox.hpp"
#include "modcomm/free_subgroup.hpp"
#include "modcomm/mat2.hpp"
#include "modcomm/modgroup.hpp"

// Canonical text forms and the matching parsers.  Every serialized value
// reparses to an equal object; certificates and the table cache both build on
// this layer.  No floating point is accepted anywhere.

namespace modcomm {

class Cursor {
 public:
  explicit Cursor(std::string s) : s_(std::move(s)) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }

  char peek() {
    skip_ws();
    require(pos_ < s_.size(), errc::parse_error, "unexpected end of input");
    return s_[pos_];
  }

  void expect(char c) {
    require(peek() == c, errc::parse_error, std::string("expected '") + c + "' in: " + s_);
    ++pos_;
  }

  bool accept(char c) {
    if (at_end() || s_[pos_] != c) return false;
    ++pos_;
    return true;
  }

  bool accept_word(const std::string& w) {
    skip_ws();
    if (s_.compare(pos_, w.size(), w) == 0) {
      pos_ += w.size();
      return true;
    }
    return false;
  }

  Int integer() {
    skip_ws();
    size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
    while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) ++pos_;
    require(pos_ > start && std::isdigit((unsigned char)s_[pos_ - 1]), errc::parse_error,
            "expected an integer in: " + s_);
    return Int(s_.substr(start, pos_ - start));
  }

  Rat rational() {
    Int num = integer();
    if (accept('/')) {
      Int den = integer();
      require(sgn(den) > 0, errc::parse_error, "denominator must be positive");
      return make_rat(num, den);
    }
    return Rat(num);
  }

  std::string token() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace((unsigned char)s_[pos_])) ++pos_;
    require(pos_ > start, errc::parse_error, "expected a token");
    return s_.substr(start, pos_ - start);
  }

  std::string rest() {
    skip_ws();
    return s_.substr(pos_);
  }

 private:
  std::string s_;
  size_t pos_ = 0;
};

// ---- words and integer vectors: comma separated, `e` for empty ----

inline std::string vec_text(const IVec& v) {
  if (v.empty()) return "e";
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += v[i].get_str();
  }
  return s;
}

inline std::string word_text(const Word& w) { return to_string(w); }

inline IVec parse_ivec(const std::string& text) {
  if (text == "e") return {};
  IVec out;
  Cursor c(text);
  out.push_back(c.integer());
  while (c.accept(',')) out.push_back(c.integer());
  require(c.at_end(), errc::parse_error, "trailing characters in vector: " + text);
  return out;
}

inline Word parse_word(const std::string& text) {
  IVec v = parse_ivec(text);
  Word w;
  for (const Int& x : v) {
    require(x.fits_sint_p() && sgn(x) != 0, errc::parse_error, "bad word letter");
    w.push_back((int)x.get_si());
  }
  return w;
}

// ---- rationals and matrices ----

inline std::string rat_text(const Rat& q) { return to_string(q); }

inline Rat parse_rat(const std::string& text) {
  Cursor c(text);
  Rat q = c.rational();
  require(c.at_end(), errc::parse_error, "trailing characters in rational: " + text);
  return q;
}

inline std::string qmat_text(const QMat2& m) {
  return "[" + rat_text(m.a) + "," + rat_text(m.b) + "," + rat_text(m.c) + "," + rat_text(m.d) +
         "]";
}

inline QMat2 parse_qmat(const std::string& text) {
  Cursor c(text);
  c.expect('[');
  Rat a = c.rational();
  c.expect(',');
  Rat b = c.rational();
  c.expect(',');
  Rat cc = c.rational();
  c.expect(',');
  Rat d = c.rational();
  c.expect(']');
  require(c.at_end(), errc::parse_error, "trailing characters in matrix: " + text);
  return QMat2(a, b, cc, d);
}

inline std::string intmat_text(const IntMat& m) {
  return qmat_text(QMat2(m));
}

inline IntMat parse_intmat(const std::string& text) {
  QMat2 m = parse_qmat(text);
  auto p = as_psl2z(m);
  require(p.has_value(), errc::parse_error, "matrix is not integral of determinant 1: " + text);
  return *p;
}

// ---- tower fields and scalars ----

inline std::string field_text(const FieldDesc& f) { return to_string(f); }

inline std::pair<FieldDesc, std::string> split_field_prefix(const std::string& text) {
  // returns the FieldDesc and the remainder after its textual form
  Cursor c(text);
  if (c.accept_word("K(d=")) {
    Int d = c.integer();
    c.expect(')');
    return {FieldDesc::quadratic(d), c.rest()};
  }
  if (c.accept_word("L(d=")) {
    Int d = c.integer();
    c.expect(',');
    require(c.accept_word("zeta=("), errc::parse_error, "expected zeta in field: " + text);
    Rat z0 = c.rational();
    c.expect(',');
    Rat z1 = c.rational();
    c.expect(')');
    c.expect(')');
    return {FieldDesc::quartic(d, z0, z1), c.rest()};
  }
  if (c.accept_word("Q")) return {FieldDesc::rational(), c.rest()};
  fail(errc::parse_error, "unknown field descriptor: " + text);
}

inline std::string scalar_text(const TowerScalar& x) { return to_string(x); }

namespace detail_textio {

// `(p1/q1)+(p2/q2)*sqrt(D)` with D matching the field
inline std::pair<Rat, Rat> parse_k_part(Cursor& c, const Int& d) {
  c.expect('(');
  Rat a = c.rational();
  c.expect(')');
  c.expect('+');
  c.expect('(');
  Rat b = c.rational();
  c.expect(')');
  c.expect('*');
  require(c.accept_word("sqrt("), errc::parse_error, "expected sqrt(d) in scalar");
  Int got = c.integer();
  require(got == d, errc::parse_error, "scalar names a different quadratic field");
  c.expect(')');
  return {a, b};
}

} // namespace detail_textio

inline TowerScalar parse_scalar(Cursor& c, const FieldDesc& f) {
  TowerScalar x(f, Rat(0));
  switch (f.level) {
    case FieldLevel::base:
      x.c[0] = c.rational();
      return x;
    case FieldLevel::quad_k: {
      auto [a, b] = detail_textio::parse_k_part(c, f.d);
      x.c[0] = a;
      x.c[1] = b;
      return x;
    }
    case FieldLevel::quad_l: {
      c.expect('(');
      auto [a, b] = detail_textio::parse_k_part(c, f.d);
      c.expect(')');
      c.expect('+');
      c.expect('(');
      auto [e, g] = detail_textio::parse_k_part(c, f.d);
      c.expect(')');
      c.expect('*');
      require(c.accept_word("sqrt(zeta)"), errc::parse_error, "expected sqrt(zeta) in scalar");
      x.c[0] = a;
      x.c[1] = b;
      x.c[2] = e;
      x.c[3] = g;
      return x;
    }
  }
  fail(errc::parse_error, "unreachable");
}

// Full projective matrix: `Q{a,b,c,d}`, `K(d=2){(p,q),...}`, `L(...){...}`.
inline std::string projmat_text(const ProjMat& m) {
  std::string s = field_text(m.field) + "{";
  for (int i = 0; i < 4; ++i) {
    if (i) s += ",";
    s += scalar_text(m.e[i]);
  }
  return s + "}";
}

inline ProjMat parse_projmat(const std::string& text) {
  auto [field, rest] = split_field_prefix(text);
  Cursor c(rest);
  c.expect('{');
  TowerScalar a = parse_scalar(c, field);
  c.expect(',');
  TowerScalar b = parse_scalar(c, field);
  c.expect(',');
  TowerScalar cc = parse_scalar(c, field);
  c.expect(',');
  TowerScalar d = parse_scalar(c, field);
  c.expect('}');
  require(c.at_end(), errc::parse_error, "trailing characters in matrix: " + text);
  TowerScalar det = a * d - b * cc;
  require(det == TowerScalar::one(field), errc::parse_error,
          "matrix must have determinant exactly 1: " + text);
  return ProjMat(field, a, b, cc, d);
}

// ---- coset tables: single-line records ----

inline std::string perm_text(const std::vector<int>& p) {
  std::string s;
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(p[i]);
  }
  return s;
}

inline std::vector<int> parse_perm(const std::string& text, int n) {
  IVec v = parse_ivec(text);
  std::vector<int> p;
  for (const Int& x : v) {
    require(x.fits_sint_p() && x >= 0 && x < n, errc::parse_error, "permutation entry out of range");
    p.push_back((int)x.get_si());
  }
  require((int)p.size() == n, errc::parse_error, "permutation length mismatch");
  return p;
}

inline std::string modtable_text(const CosetTable& t) {
  return "n=" + std::to_string(t.n) + " S=" + perm_text(t.perm_S) + " U=" + perm_text(t.perm_U);
}

inline CosetTable parse_modtable(const std::string& text) {
  Cursor c(text);
  require(c.accept_word("n="), errc::parse_error, "expected n= in table record");
  Int n = c.integer();
  require(n.fits_sint_p() && n >= 1, errc::parse_error, "bad table size");
  CosetTable t;
  t.n = (int)n.get_si();
  require(c.accept_word("S="), errc::parse_error, "expected S= in table record");
  t.perm_S = parse_perm(c.token(), t.n);
  require(c.accept_word("U="), errc::parse_error, "expected U= in table record");
  t.perm_U = parse_perm(c.token(), t.n);
  t.finish();
  require(t.valid(), errc::parse_error, "coset table fails its invariants");
  return t;
}

inline std::string freetable_text(const FreeCosetTable& t) {
  std::string s = "rank=" + std::to_string(t.rank) + " n=" + std::to_string(t.n);
  for (int i = 0; i < t.rank; ++i) s += " x" + std::to_string(i + 1) + "=" + perm_text(t.fwd[i]);
  return s;
}

inline FreeCosetTable parse_freetable(const std::string& text) {
  Cursor c(text);
  require(c.accept_word("rank="), errc::parse_error, "expected rank= in table record");
  Int rank = c.integer();
  require(c.accept_word("n="), errc::parse_error, "expected n= in table record");
  Int n = c.integer();
  require(rank.fits_sint_p() && n.fits_sint_p() && rank >= 1 && n >= 1, errc::parse_error,
          "bad table dimensions");
  FreeCosetTable t((int)rank.get_si(), (int)n.get_si());
  for (int i = 0; i < t.rank; ++i) {
    require(c.accept_word("x" + std::to_string(i + 1) + "="), errc::parse_error,
            "expected generator column in table record");
    t.fwd[i] = parse_perm(c.token(), t.n);
  }
  t.finish();
  require(t.valid(), errc::parse_error, "free coset table fails its invariants");
  return t;
}

// ---- series specs ----

inline SeriesSpec parse_series(const std::string& text) {
  Cursor c(text);
  SeriesSpec spec;
  if (c.accept_word("lcs:"))
    spec.kind = SeriesKind::lower_central;
  else if (c.accept_word("derived:"))
    spec.kind = SeriesKind::derived;
  else
    fail(errc::parse_error, "series must be lcs:<i> or derived:<i>, got: " + text);
  Int i = c.integer();
  require(i.fits_sint_p() && i >= 2, errc::parse_error, "series index must be >= 2");
  spec.index = (int)i.get_si();
  require(c.at_end(), errc::parse_error, "trailing characters in series spec");
  return spec;
}

} // namespace modcomm
