#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

using namespace modcomm;
using testutil::rand_rat;
using testutil::rand_scalar;

namespace {

FieldDesc K2() { return FieldDesc::quadratic(2); }
FieldDesc K5() { return FieldDesc::quadratic(5); }

TowerScalar ts(const FieldDesc& f, long a) { return TowerScalar(f, Rat(a)); }

} // namespace

TEST_CASE("field descriptor validation") {
  CHECK_NOTHROW(FieldDesc::quadratic(2));
  CHECK_THROWS_AS(FieldDesc::quadratic(4), error);   // not squarefree
  CHECK_THROWS_AS(FieldDesc::quadratic(1), error);
  CHECK_THROWS_AS(FieldDesc::quadratic(-2), error);
  // zeta must be positive and not a square in K
  CHECK_NOTHROW(FieldDesc::quartic(2, Rat(3), Rat(0)));
  CHECK_NOTHROW(FieldDesc::quartic(2, Rat(0), Rat(1)));      // zeta = sqrt(2) itself
  CHECK_THROWS_AS(FieldDesc::quartic(2, Rat(-3), Rat(0)), error);  // negative
  CHECK_THROWS_AS(FieldDesc::quartic(2, Rat(4), Rat(0)), error);   // 4 = 2² in K
  CHECK_THROWS_AS(FieldDesc::quartic(2, Rat(2), Rat(0)), error);   // 2 = (√2)² in K
  // 3 + 2√2 = (1 + √2)²
  CHECK_THROWS_AS(FieldDesc::quartic(2, Rat(3), Rat(2)), error);
  CHECK_NOTHROW(FieldDesc::quartic(2, Rat(1), Rat(2)));
}

TEST_CASE("norm form and inverses") {
  FieldDesc f = K2();
  TowerScalar one = TowerScalar::one(f), r2 = TowerScalar::sqrt_d(f);
  CHECK((one + r2) * (one - r2) == ts(f, -1));

  // (3 + 2√5)⁻¹ = (−3 + 2√5)/11, checked by multiplying back
  FieldDesc f5 = K5();
  TowerScalar x = ts(f5, 3) + ts(f5, 2) * TowerScalar::sqrt_d(f5);
  TowerScalar xi = inverse(x);
  CHECK(xi.c[0] == Rat(-3, 11));
  CHECK(xi.c[1] == Rat(2, 11));
  CHECK(xi * x == TowerScalar::one(f5));

  CHECK_THROWS_AS(inverse(TowerScalar::zero(f)), error);
  CHECK_THROWS_AS(ts(f, 1) / TowerScalar::zero(f), error);
}

TEST_CASE("x / x = 1 for random nonzero x at every level") {
  std::vector<FieldDesc> fields{FieldDesc::rational(), K2(),
                                FieldDesc::quartic(2, Rat(3), Rat(1))};
  for (const auto& f : fields)
    for (int i = 0; i < 50; ++i) {
      TowerScalar x = rand_scalar(f);
      if (x.is_zero()) continue;
      CHECK(x / x == TowerScalar::one(f));
    }
}

TEST_CASE("galois sigma") {
  FieldDesc L = FieldDesc::quartic(2, Rat(3), Rat(0));
  TowerScalar sz = TowerScalar::sqrt_zeta(L);
  CHECK(galois_sigma(sz) == -sz);
  // fixes the lower field
  TowerScalar k = promote(TowerScalar::sqrt_d(K2()) + ts(K2(), 7), L);
  CHECK(galois_sigma(k) == k);
  // σ(3 + 2√ζ) = 3 − 2√ζ; product 9 − 4ζ = −3 lies in K
  TowerScalar v = ts(L, 3) + ts(L, 2) * sz;
  TowerScalar sv = galois_sigma(v);
  CHECK(sv == ts(L, 3) - ts(L, 2) * sz);
  TowerScalar prod = sv * v, sum = sv + v;
  CHECK(sgn(prod.c[2]) == 0);
  CHECK(sgn(prod.c[3]) == 0);
  CHECK(prod == ts(L, -3));
  CHECK(sgn(sum.c[2]) == 0);
  CHECK(sgn(sum.c[3]) == 0);
  // K level conjugation negates √d
  TowerScalar kk = ts(K2(), 1) + TowerScalar::sqrt_d(K2());
  CHECK(galois_sigma(kk) == ts(K2(), 1) - TowerScalar::sqrt_d(K2()));
  CHECK_THROWS_AS(galois_sigma(TowerScalar(Rat(5))), error);
}

TEST_CASE("field operations are exact on random elements") {
  FieldDesc L = FieldDesc::quartic(3, Rat(2), Rat(1));
  for (int i = 0; i < 1000; ++i) {
    TowerScalar x = rand_scalar(L, 4), y = rand_scalar(L, 4);
    if (!y.is_zero()) CHECK((x * y) / y == x);
    CHECK(galois_sigma(galois_sigma(x)) == x);
  }
}

TEST_CASE("designated embedding sign") {
  FieldDesc f = K2();
  TowerScalar r2 = TowerScalar::sqrt_d(f);
  CHECK(sign(r2) == 1);
  CHECK(sign(ts(f, 1) - r2) == -1);     // 1 − √2 < 0
  CHECK(sign(ts(f, 2) - r2) == 1);      // 2 − √2 > 0
  CHECK(sign(TowerScalar::zero(f)) == 0);
  FieldDesc L = FieldDesc::quartic(2, Rat(3), Rat(0));
  TowerScalar sz = TowerScalar::sqrt_zeta(L);  // √3 in the embedding
  CHECK(sign(ts(L, 2) - sz) == 1);
  CHECK(sign(ts(L, 1) - sz) == -1);
  CHECK(compare(sz * sz, ts(L, 3)) == 0);
}

TEST_CASE("promotion is explicit and demotion on request") {
  TowerScalar q(Rat(3, 2));
  FieldDesc f = K2();
  TowerScalar p = promote(q, f);
  CHECK(p.field == f);
  CHECK(p.is_rational());
  CHECK_THROWS_AS(promote(TowerScalar(K5(), Rat(1)), f), error);
  FieldDesc L = FieldDesc::quartic(2, Rat(3), Rat(0));
  TowerScalar atl = promote(TowerScalar::sqrt_d(f), L);
  auto down = demote_to_k(atl);
  REQUIRE(down.has_value());
  CHECK(down->field == f);
  CHECK(!demote_to_k(promote(TowerScalar::sqrt_zeta(L), L)).has_value());
  // mixed-field arithmetic promotes the lower operand, never guesses
  CHECK((q + TowerScalar::sqrt_d(f)).field == f);
  CHECK_THROWS_AS(TowerScalar(K5(), Rat(1)) + TowerScalar(f, Rat(1)), error);
}

TEST_CASE("sqrtq membership examples") {
  FieldDesc f = K2();
  TowerScalar r2 = TowerScalar::sqrt_d(f), zero = TowerScalar::zero(f);
  ProjMat g(f, r2, zero, zero, TowerScalar(f, Rat(1, 2)) * r2);
  auto d = sqrtq_membership(g);
  REQUIRE(d.has_value());
  CHECK(d->q == 2);
  CHECK(d->mat == QMat2(Rat(1), Rat(0), Rat(0), Rat(1, 2)));
  CHECK(d->mat.det() == Rat(1, 2));  // det B = 1/q

  IntMat m = testutil::rand_psl2z_word(6);
  auto dm = sqrtq_membership(ProjMat(m));
  REQUIRE(dm.has_value());
  CHECK(dm->q == 1);
  CHECK(as_psl2z(dm->mat).value() == m);

  ProjMat bad(f, TowerScalar::one(f), r2, zero, TowerScalar::one(f));
  CHECK(!sqrtq_membership(bad).has_value());
}

TEST_CASE("sqrtq membership is a decision procedure on random input") {
  for (int i = 0; i < 100; ++i) {
    // random squarefree q and rational a with det a = 1/q
    static const long squarefrees[] = {2, 3, 5, 6, 7, 10, 11, 13};
    Int q(squarefrees[testutil::rand_int(0, 7)]);
    QMat2 m(rand_rat(4), rand_rat(4), rand_rat(4), rand_rat(4));
    while (sgn(m.det()) == 0) m = QMat2(rand_rat(4), rand_rat(4), rand_rat(4), rand_rat(4));
    Rat d0 = m.det();
    QMat2 m2 = m * QMat2(Rat(1), Rat(0), Rat(0), Rat(q) * d0);  // det = q·d0²
    Rat scale = Rat(1) / (Rat(q) * d0);
    QMat2 a = scale * m2;  // det a = 1/q
    FieldDesc f = FieldDesc::quadratic(q);
    auto lift = [&](const Rat& r) {
      TowerScalar t(f, Rat(0));
      t.c[1] = r;
      return t;
    };
    ProjMat x(f, lift(a.a), lift(a.b), lift(a.c), lift(a.d));
    auto dec = sqrtq_membership(x);
    REQUIRE(dec.has_value());
    CHECK(dec->q == q);
    bool plus = dec->mat == a;
    bool minus = dec->mat == Rat(-1) * a;
    CHECK((plus || minus));
  }
  // matrices with an entry in Q(√2) outside √Q·Q are refused
  FieldDesc f = K2();
  TowerScalar r2 = TowerScalar::sqrt_d(f);
  TowerScalar a = TowerScalar::one(f) + r2;
  TowerScalar d = (TowerScalar::one(f) + TowerScalar::one(f)) * (r2 - TowerScalar::one(f));
  ProjMat g(f, a, TowerScalar::one(f), TowerScalar::one(f), d);
  CHECK(!sqrtq_membership(g).has_value());
}

TEST_CASE("rational conjugation") {
  FieldDesc f = K2();
  TowerScalar r2 = TowerScalar::sqrt_d(f), zero = TowerScalar::zero(f);
  ProjMat g(f, r2, zero, zero, TowerScalar(f, Rat(1, 2)) * r2);
  SqrtQDecomp d = *sqrtq_membership(g);

  QMat2 out = rational_conjugate(mat_T(), d);
  CHECK(out == QMat2(Rat(1), Rat(1, 2), Rat(0), Rat(1)));
  CHECK(rational_conjugate(IntMat(1, 0, 2, 1), d) == QMat2(Rat(1), Rat(0), Rat(4), Rat(1)));

  SqrtQDecomp id{1, QMat2(Rat(1), Rat(0), Rat(0), Rat(1))};
  IntMat a = testutil::rand_psl2z_word(5);
  CHECK(as_psl2z(rational_conjugate(a, id)).value() == a);

  // g·(A^g) = A·g entrywise over the tower
  for (int i = 0; i < 20; ++i) {
    IntMat m = testutil::rand_psl2z_word(5);
    QMat2 conj = rational_conjugate(m, d);
    CHECK(d.mat * conj == QMat2(m) * d.mat);
  }
}

TEST_CASE("trace classification") {
  CHECK(classify_by_trace(mat_S()) == TraceClass::elliptic);
  CHECK(classify_by_trace(mat_T()) == TraceClass::parabolic);
  CHECK(classify_by_trace(IntMat(2, 1, 1, 1)) == TraceClass::hyperbolic);
  // exactness at level K: trace 1+√2+√2−1 = 2√2, square 8 > 4
  FieldDesc f = K2();
  TowerScalar r2 = TowerScalar::sqrt_d(f), zero = TowerScalar::zero(f), one = TowerScalar::one(f);
  ProjMat m(f, one + r2, zero, zero, r2 - one);
  CHECK(classify_by_trace(m) == TraceClass::hyperbolic);
}

TEST_CASE("projective canonicalization identifies M and -M") {
  for (int i = 0; i < 50; ++i) {
    FieldDesc f = K2();
    TowerScalar a = rand_scalar(f, 3), b = rand_scalar(f, 3), c = rand_scalar(f, 3);
    // force det 1: d = (1 + bc)/a when a ≠ 0
    if (a.is_zero()) continue;
    TowerScalar d = (TowerScalar::one(f) + b * c) / a;
    ProjMat m(f, a, b, c, d);
    ProjMat neg(f, -a, -b, -c, -d);
    CHECK(m == neg);
  }
}

TEST_CASE("scalar and matrix serialization round trips") {
  FieldDesc L = FieldDesc::quartic(2, Rat(3), Rat(1));
  for (int i = 0; i < 30; ++i) {
    TowerScalar x = rand_scalar(L, 5);
    Cursor c(to_string(x));
    CHECK(parse_scalar(c, L) == x);
  }
  FieldDesc f = K2();
  TowerScalar r2 = TowerScalar::sqrt_d(f), zero = TowerScalar::zero(f);
  ProjMat g(f, r2, zero, zero, TowerScalar(f, Rat(1, 2)) * r2);
  CHECK(parse_projmat(projmat_text(g)) == g);
  ProjMat t(mat_T());
  CHECK(parse_projmat(projmat_text(t)) == t);
  CHECK_THROWS_AS(parse_projmat("Q{1,0,0,2}"), error);  // det 2
  CHECK_THROWS_AS(parse_projmat("Q{1,0.5,0,1}"), error);  // no floats anywhere
}

TEST_CASE("squarefree coset representative") {
  CHECK(squarefree_coset_rep(Rat(2)) == 2);
  CHECK(squarefree_coset_rep(Rat(8)) == 2);
  CHECK(squarefree_coset_rep(make_rat(2, 3)) == 6);   // 2/3 ~ 6 mod squares
  CHECK(squarefree_coset_rep(make_rat(1, 2)) == 2);
  CHECK(squarefree_coset_rep(make_rat(9, 4)) == 1);
  CHECK(squarefree_coset_rep(Rat(30)) == 30);
}
