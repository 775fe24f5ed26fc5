#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

using namespace modcomm;
using testutil::rand_int;
using testutil::rand_rat;

namespace {

ProjMat sqrt2_diag() {
  FieldDesc f = FieldDesc::quadratic(2);
  TowerScalar r2 = TowerScalar::sqrt_d(f), zero = TowerScalar::zero(f);
  return ProjMat(f, r2, zero, zero, TowerScalar(f, Rat(1, 2)) * r2);
}

struct Gamma2 {
  CosetTable tbl = principal_congruence(2);
  SchreierBasis basis = schreier_basis(tbl);
};

Gamma2& gamma2() {
  static Gamma2 g;
  return g;
}

} // namespace

TEST_CASE("quaternion span") {
  for (long k : {2L, 3L}) {
    CosetTable t = principal_congruence(k);
    SchreierBasis basis = schreier_basis(t);
    QuaternionSpan span = quaternion_span(basis);
    IMatrix rows;
    for (const auto& m : span.mats) {
      CHECK(t.contains(m));
      CHECK(!m.is_identity());
      rows.push_back({m.a, m.b, m.c, m.d});
    }
    CHECK(det(rows) != 0);  // independence by the 4×4 determinant oracle
    for (int i = 0; i < 4; ++i) {
      CHECK(span.words[i].size() >= 1);
      CHECK(span.words[i].size() <= 4);
      CHECK(evaluate_basis_word(basis, span.words[i]) == span.mats[i]);
    }
  }
  SchreierBasis rank1;
  rank1.rank = 1;
  CHECK_THROWS_AS(quaternion_span(rank1), error);
}

TEST_CASE("skolem-noether decomposition") {
  QuaternionSpan span = quaternion_span(gamma2().basis);
  // rational x: t² = 1 and a proportional to x
  ProjMat xr(IntMat(1, 1, 0, 1));
  SkolemNoether sn = skolem_noether_decompose(xr, span);
  CHECK(squarefree_coset_rep(sn.t_sq) == 1);
  CHECK(sgn(sn.a.b) != 0);
  CHECK(sn.a.a == sn.a.b);  // proportional to [[1,1],[0,1]]
  CHECK(sgn(sn.a.c) == 0);
  // diag(√2, 1/√2): t² ~ 2 mod squares, a proportional to diag(1, 1/2)
  SkolemNoether sd = skolem_noether_decompose(sqrt2_diag(), span);
  CHECK(squarefree_coset_rep(sd.t_sq) == 2);
  CHECK(sgn(sd.a.b) == 0);
  CHECK(sgn(sd.a.c) == 0);
  CHECK(sd.a.a == Rat(2) * sd.a.d);
  // x = [[1, √2],[0,1]] does not conjugate the span rationally
  FieldDesc f = FieldDesc::quadratic(2);
  ProjMat bad(f, TowerScalar::one(f), TowerScalar::sqrt_d(f), TowerScalar::zero(f),
              TowerScalar::one(f));
  CHECK_THROWS_AS(skolem_noether_decompose(bad, span), error);
}

TEST_CASE("skolem-noether round trips recover q and a") {
  QuaternionSpan span = quaternion_span(gamma2().basis);
  static const long squarefrees[] = {2, 3, 5, 7, 10};
  for (int i = 0; i < 40; ++i) {
    Int q(squarefrees[rand_int(0, 4)]);
    QMat2 m(rand_rat(3), rand_rat(3), rand_rat(3), rand_rat(3));
    while (sgn(m.det()) == 0) m = QMat2(rand_rat(3), rand_rat(3), rand_rat(3), rand_rat(3));
    QMat2 a = (Rat(1) / (Rat(q) * m.det())) * (m * QMat2(Rat(1), Rat(0), Rat(0), Rat(q) * m.det()));
    FieldDesc f = FieldDesc::quadratic(q);
    auto lift = [&](const Rat& r) {
      TowerScalar t(f, Rat(0));
      t.c[1] = r;
      return t;
    };
    ProjMat x(f, lift(a.a), lift(a.b), lift(a.c), lift(a.d));
    SkolemNoether sn = skolem_noether_decompose(x, span);
    CHECK(squarefree_coset_rep(sn.t_sq) == q);
    // recovered a agrees with the planted one up to a rational scalar
    Rat lambda;
    bool found = false;
    for (auto [p, pa] : {std::pair{sn.a.a, a.a}, {sn.a.b, a.b}, {sn.a.c, a.c}, {sn.a.d, a.d}}) {
      if (sgn(pa) != 0) { lambda = p / pa; found = true; break; }
    }
    REQUIRE(found);
    CHECK(sn.a == lambda * a);
  }
}

TEST_CASE("pseudo action") {
  const auto& g2 = gamma2();
  // y inside H itself: every delta is zero
  SqrtQDecomp id{1, QMat2(Rat(1), Rat(0), Rat(0), Rat(1))};
  QMat2 member(QMat2(g2.basis.gens[0].mat));
  PseudoActionResult pa = pseudo_action(g2.tbl, g2.basis, id, member, 100);
  CHECK(pa.trivial());
  for (const auto& d : pa.deltas) CHECK(d.defined);

  // y = T normalizes Γ(2) but moves homology: rewriting
  // T⁻¹·[[1,0],[2,1]]·T = [[−1,−2],[2,3]] over the basis gives a nonzero class
  SqrtQDecomp w{1, QMat2(Rat(2), Rat(0), Rat(0), Rat(1, 2))};  // w = diag(2,1/2)
  QMat2 y_t(Rat(1), Rat(1), Rat(0), Rat(1));
  PseudoActionResult pt = pseudo_action(g2.tbl, g2.basis, w, y_t, 100);
  CHECK(!pt.trivial());
  bool nonzero_seen = false;
  for (const auto& d : pt.deltas) {
    if (!d.defined || is_zero_vec(d.delta)) continue;
    nonzero_seen = true;
    // the commutator realizes the delta as an honest member class
    CHECK(g2.tbl.contains(d.commutator));
    CHECK(abelianize(d.commutator_word, g2.basis.rank) == d.delta);
  }
  CHECK(nonzero_seen);

  // deltas scale linearly in the admissible power: delta(2N) = 2·delta(N)
  for (const auto& d : pt.deltas) {
    if (!d.defined) continue;
    IntMat x = g2.basis.gens[d.gen - 1].mat;
    IntMat x2n = pow(x, Int(2 * d.n_used));
    QMat2 moved = inverse(y_t) * QMat2(x2n) * y_t;
    auto mm = as_psl2z(moved);
    REQUIRE(mm.has_value());
    IVec a = abelianize(rewrite_member(g2.tbl, g2.basis, *mm), g2.basis.rank);
    IVec b = abelianize(rewrite_member(g2.tbl, g2.basis, x2n), g2.basis.rank);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] - b[i] == Int(2) * d.delta[i]);
  }

  // y outside the conjugated subgroup is refused
  CHECK_THROWS_AS(pseudo_action(g2.tbl, g2.basis, id, y_t, 100), error);
}

TEST_CASE("parabolic normalization") {
  const auto& g2 = gamma2();
  SqrtQDecomp id{1, QMat2(Rat(1), Rat(0), Rat(0), Rat(1))};
  // y = identity: r = 1, t = 0, empty h
  QMat2 y_id(Rat(1), Rat(0), Rat(0), Rat(1));
  ParabolicResult pr = parabolic_normalize(g2.tbl, g2.basis, id, y_id, CuspPoint::infinity, 50);
  CHECK(pr.r == 1);
  CHECK(sgn(pr.t) == 0);
  CHECK(pr.h.is_identity());
  CHECK(pr.scaling_ok);
  // members of Γ(k) give r = 1 and t in kZ at both cusps
  for (const auto& gen : g2.basis.gens) {
    for (CuspPoint at : {CuspPoint::infinity, CuspPoint::zero}) {
      ParabolicResult p = parabolic_normalize(g2.tbl, g2.basis, id, QMat2(gen.mat), at, 50);
      CHECK(p.scaling_ok);
      CHECK(p.r == 1);
      CHECK(is_integer(p.t));
      CHECK(mod_floor(rat_num(p.t), 2) == 0);
    }
  }
}

TEST_CASE("parabolic scaling law") {
  // conjugating [[1,M],[0,1]] by [[r,t],[0,r⁻¹]] gives [[1, r⁻²M],[0,1]]
  for (int i = 0; i < 50; ++i) {
    Rat r = testutil::rand_rat_nonzero(9);
    Rat t = rand_rat(9);
    Rat m = rand_rat(9);
    QMat2 y(r, t, Rat(0), Rat(1) / r);
    QMat2 p(Rat(1), m, Rat(0), Rat(1));
    QMat2 conj = inverse(y) * p * y;
    CHECK(conj == QMat2(Rat(1), m / (r * r), Rat(0), Rat(1)));
  }
}

TEST_CASE("conjugates inside the congruence subgroup") {
  const auto& g2 = gamma2();
  SqrtQDecomp id{1, QMat2(Rat(1), Rat(0), Rat(0), Rat(1))};
  CHECK(conjugate_in_gamma_k(g2.basis, id, 2));
  SqrtQDecomp w{1, QMat2(Rat(2), Rat(0), Rat(0), Rat(1, 2))};
  int failing = 0;
  CHECK(!conjugate_in_gamma_k(g2.basis, w, 2, &failing));
  CHECK(failing >= 1);
  // Γ(4) under conjugation by T stays in Γ(2)
  CosetTable g4 = principal_congruence(4);
  SchreierBasis b4 = schreier_basis(g4);
  SqrtQDecomp wt{1, QMat2(Rat(1), Rat(1), Rat(0), Rat(1))};
  CHECK(conjugate_in_gamma_k(b4, wt, 2));
}

TEST_CASE("pipeline verdicts for the three reference candidates") {
  const auto& g2 = gamma2();
  SeriesSpec d2{SeriesKind::derived, 2};

  Verdict pass = main_pipeline(g2.tbl, g2.basis, 2, d2, ProjMat(mat_T()));
  CHECK(pass.status == VerdictStatus::pass_integral);

  Verdict rej = main_pipeline(g2.tbl, g2.basis, 2, d2, sqrt2_diag());
  CHECK(rej.status == VerdictStatus::reject);
  CHECK(rej.reason == "PseudoActionNontrivial");

  ProjMat half(QMat2(Rat(1), Rat(1, 2), Rat(0), Rat(1)));
  Verdict rej2 = main_pipeline(g2.tbl, g2.basis, 2, d2, half);
  CHECK(rej2.status == VerdictStatus::reject);

  ProjMat third(QMat2(Rat(1), Rat(1, 3), Rat(0), Rat(1)));
  Verdict rej3 = main_pipeline(g2.tbl, g2.basis, 2, SeriesSpec{SeriesKind::lower_central, 3},
                               third);
  CHECK(rej3.status == VerdictStatus::reject);
}

TEST_CASE("integral candidates always pass on normal subgroups") {
  const auto& g2 = gamma2();
  SeriesSpec d2{SeriesKind::derived, 2};
  for (int i = 0; i < 8; ++i) {
    IntMat m = testutil::rand_psl2z_word(6);
    Verdict v = main_pipeline(g2.tbl, g2.basis, 2, d2, ProjMat(m));
    CHECK(v.status == VerdictStatus::pass_integral);
  }
}

TEST_CASE("a reject never pairs with a pass for the inverse") {
  const auto& g2 = gamma2();
  SeriesSpec d2{SeriesKind::derived, 2};
  std::vector<ProjMat> candidates{sqrt2_diag(), ProjMat(QMat2(Rat(1), Rat(1, 2), Rat(0), Rat(1)))};
  for (const ProjMat& g : candidates) {
    Verdict v = main_pipeline(g2.tbl, g2.basis, 2, d2, g);
    if (v.status != VerdictStatus::reject) continue;
    Verdict vi = main_pipeline(g2.tbl, g2.basis, 2, d2, inverse(g));
    CHECK(vi.status != VerdictStatus::pass_integral);
  }
}

TEST_CASE("exhausted bounds report Inconclusive honestly") {
  const auto& g2 = gamma2();
  PipelineConfig config;
  config.n_max_fallback = 1;
  // [[1,1/2],[0,1]] conjugates the generators outside PSL2(Z), so the exact
  // index bound is unavailable and the tiny fallback is exhausted at once
  ProjMat half(QMat2(Rat(1), Rat(1, 2), Rat(0), Rat(1)));
  Verdict v = main_pipeline(g2.tbl, g2.basis, 2, SeriesSpec{SeriesKind::derived, 2}, half,
                            config);
  CHECK(v.status == VerdictStatus::inconclusive);
  CHECK(v.reason == "NBoundExceeded");
  CHECK(v.stage == 2);
  // the diag candidate has integral conjugated generators: the exact bound
  // [PSL2(Z) : H ∩ H^w]·k applies and the same tiny fallback is ignored
  Verdict vd = main_pipeline(g2.tbl, g2.basis, 2, SeriesSpec{SeriesKind::derived, 2},
                             sqrt2_diag(), config);
  CHECK(vd.status == VerdictStatus::reject);
  CHECK(vd.n_max >= 12);
}

TEST_CASE("stage-4 witness branch composes on explicit tables") {
  // The pipeline's SubgroupMoved branch is starved for H = Γ(k) (normality
  // forces H = H^w once stage 4 is reached); exercise the same composition
  // directly: two distinct normal subgroups of F = Γ(2) through stallings
  // folding and the witness machinery.
  const auto& g2 = gamma2();
  auto words_of = [&](const std::vector<IntMat>& gens) {
    std::vector<Word> out;
    for (const auto& m : gens) out.push_back(rewrite_member(g2.tbl, g2.basis, m));
    return out;
  };
  IntMat A(1, 2, 0, 1), C(1, 0, 2, 1);
  // K1 = <A², C, ACA⁻¹>, K2 = <C², A, CAC⁻¹>: the two parity kernels of F
  auto k1 = stallings_table(2, words_of({pow(A, 2), C, A * C * inverse(A)}));
  auto k2 = stallings_table(2, words_of({pow(C, 2), A, C * A * inverse(C)}));
  REQUIRE(k1.has_value());
  REQUIRE(k2.has_value());
  CHECK(k1->n == 2);
  CHECK(k2->n == 2);
  WitnessCert cert = gaschutz_witness(2, *k1, *k2);
  filtration_chain(cert, 3, cert.b);
  CHECK_NOTHROW(replay_witness(cert));
}
