#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

using namespace modcomm;
using testutil::rand_nonempty_word;
using testutil::rand_word;

TEST_CASE("free reduction") {
  CHECK(reduce(Word{1, 2, -2}) == Word{1});
  CHECK(reduce(Word{}).empty());
  CHECK(reduce(Word{1, 2, -1, 1, -2}) == Word{1});
  CHECK(inverse(Word{1, 2}) == Word{-2, -1});
  CHECK(commutator(Word{1}, Word{2}) == Word{1, 2, -1, -2});
}

TEST_CASE("abelianization") {
  CHECK(is_zero_vec(abelianize(commutator(Word{1}, Word{2}), 2)));
  CHECK(abelianize(Word{1, 1, 2}, 2) == IVec{2, 1});
  CHECK(abelianize(Word{1, 2, -1}, 2) == IVec{0, 1});
}

TEST_CASE("lower central depth by Magnus expansion") {
  CHECK(lcs_depth(Word{1}, 6).depth == 1);
  Word c = commutator(Word{1}, Word{2});
  CHECK(lcs_depth(c, 6).depth == 2);
  CHECK(lcs_depth(commutator(c, Word{2}), 6).depth == 3);
  CHECK_THROWS_AS(lcs_depth(Word{}, 6), error);
  CHECK_THROWS_AS(lcs_depth(Word{1, -1}, 6), error);
  // the degree-2 term of [x,y] is XY − YX
  PowerSeries s = magnus_expansion(c, 2);
  CHECK(s.terms.at(Monomial{0, 1}) == 1);
  CHECK(s.terms.at(Monomial{1, 0}) == -1);
}

TEST_CASE("fox derivative defining rules") {
  GroupRingElem one(2);
  one.add_term(ExpVec{0, 0}, 1);
  CHECK(fox_derivative(Word{1, 2}, 1, 2) == one);
  GroupRingElem abx(2);
  abx.add_term(ExpVec{1, 0}, 1);
  CHECK(fox_derivative(Word{1, 2}, 2, 2) == abx);
  GroupRingElem minv(2);
  minv.add_term(ExpVec{-1, 0}, -1);
  CHECK(fox_derivative(Word{-1}, 1, 2) == minv);
  // ∂[x,y]/∂x = 1 − ab(y)
  GroupRingElem d = fox_derivative(commutator(Word{1}, Word{2}), 1, 2);
  GroupRingElem expect(2);
  expect.add_term(ExpVec{0, 0}, 1);
  expect.add_term(ExpVec{0, 1}, -1);
  CHECK(d == expect);
}

TEST_CASE("fox fundamental identity on 500 random pairs") {
  for (int i = 0; i < 500; ++i) {
    Word u = rand_word(3, 8), v = rand_word(3, 8);
    Word uv = concat(u, v);
    IVec abu = abelianize(u, 3);
    ExpVec shift_by(3);
    for (int j = 0; j < 3; ++j) shift_by[j] = (long)abu[j].get_si();
    for (int g = 1; g <= 3; ++g) {
      GroupRingElem lhs = fox_derivative(uv, g, 3);
      GroupRingElem rhs = fox_derivative(u, g, 3) + shift(fox_derivative(v, g, 3), shift_by);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("abelianization equals the degree-1 Magnus truncation") {
  for (int i = 0; i < 200; ++i) {
    Word w = rand_word(3, 10);
    PowerSeries s = magnus_expansion(w, 1);
    IVec ab = abelianize(w, 3);
    for (int g = 0; g < 3; ++g) {
      auto it = s.terms.find(Monomial{g});
      Int coeff = it == s.terms.end() ? Int(0) : it->second;
      CHECK(coeff == ab[g]);
    }
  }
}

TEST_CASE("depth of a commutator dominates the sum of depths") {
  for (int i = 0; i < 100; ++i) {
    Word u = rand_nonempty_word(2, 6), v = rand_nonempty_word(2, 6);
    Word c = commutator(u, v);
    if (c.empty()) continue;
    LcsDepth du = lcs_depth(u, 6), dv = lcs_depth(v, 6), dc = lcs_depth(c, 6);
    if (du.more_than || dv.more_than) continue;
    CHECK(dc.at_least(std::min(du.depth + dv.depth, 6)));
  }
}

TEST_CASE("series membership") {
  Word c = commutator(Word{1}, Word{2});
  CHECK(in_series(c, SeriesSpec{SeriesKind::derived, 2}, 2) == SeriesVerdict::in);
  CHECK(in_series(c, SeriesSpec{SeriesKind::derived, 3}, 2) == SeriesVerdict::not_in);
  CHECK(in_series(commutator(c, Word{2}), SeriesSpec{SeriesKind::lower_central, 4}, 2) ==
        SeriesVerdict::not_in);
  CHECK(in_series(commutator(c, Word{2}), SeriesSpec{SeriesKind::lower_central, 3}, 2) ==
        SeriesVerdict::in);
  CHECK(in_series(Word{}, SeriesSpec{SeriesKind::lower_central, 4}, 2) == SeriesVerdict::in);
  CHECK(in_series(Word{1}, SeriesSpec{SeriesKind::derived, 4}, 2) ==
        SeriesVerdict::undecidable);
}

TEST_CASE("sampled second derived words lie in gamma_3") {
  for (int i = 0; i < 60; ++i) {
    Word c1 = commutator(rand_nonempty_word(2, 4), rand_nonempty_word(2, 4));
    Word c2 = commutator(rand_nonempty_word(2, 4), rand_nonempty_word(2, 4));
    Word w = commutator(c1, c2);  // element of F''
    if (reduce(w).empty()) continue;
    CHECK(in_series(w, SeriesSpec{SeriesKind::derived, 3}, 2) == SeriesVerdict::in);
    CHECK(in_series(w, SeriesSpec{SeriesKind::lower_central, 3}, 2) == SeriesVerdict::in);
  }
}

TEST_CASE("series membership is conjugation invariant") {
  for (int i = 0; i < 80; ++i) {
    Word w = rand_nonempty_word(2, 6);
    Word g = rand_word(2, 5);
    Word conj = concat(concat(inverse(g), w), g);
    for (SeriesSpec spec : {SeriesSpec{SeriesKind::lower_central, 2},
                            SeriesSpec{SeriesKind::lower_central, 3},
                            SeriesSpec{SeriesKind::derived, 2},
                            SeriesSpec{SeriesKind::derived, 3}}) {
      CHECK(in_series(w, spec, 2) == in_series(conj, spec, 2));
    }
  }
}

TEST_CASE("normal kernels of finite quotients") {
  auto nk2 = normal_kernel(2, {Perm{1, 0}, Perm{0, 1}});
  CHECK(nk2.tbl.n == 2);
  auto nk3 = normal_kernel(2, {Perm{1, 2, 0}, Perm{0, 1, 2}});
  CHECK(nk3.tbl.n == 3);
  auto nks3 = normal_kernel(2, {Perm{1, 0, 2}, Perm{1, 2, 0}});
  CHECK(nks3.tbl.n == 6);
  CHECK(free_schreier(nks3.tbl).rank == 7);  // 1 + 6·(2−1)
  // the kernel table contains exactly the kernel
  CHECK(nk2.tbl.contains(Word{1, 1}));
  CHECK(!nk2.tbl.contains(Word{1}));
  CHECK(nk2.tbl.contains(Word{2}));
}

TEST_CASE("free rewriting round trips") {
  auto nk = normal_kernel(2, {Perm{1, 0}, Perm{0, 1}});
  FreeSchreierBasis basis = free_schreier(nk.tbl);
  CHECK(basis.rank == 3);
  Word w = rewrite_free(nk.tbl, basis, Word{1, 1});
  CHECK(w.size() == 1);
  CHECK(expand_basis_word(basis, w) == Word{1, 1});
  CHECK_THROWS_AS(rewrite_free(nk.tbl, basis, Word{1}), error);
  for (int i = 0; i < 100; ++i) {
    Word cand = rand_word(2, 10);
    if (!nk.tbl.contains(cand)) continue;
    Word rw = rewrite_free(nk.tbl, basis, cand);
    CHECK(expand_basis_word(basis, rw) == reduce(cand));
  }
}

TEST_CASE("stallings folding") {
  auto nk = normal_kernel(2, {Perm{1, 0}, Perm{0, 1}});
  auto folded = stallings_table(2, {Word{1, 1}, Word{2}, Word{1, 2, -1}});
  REQUIRE(folded.has_value());
  CHECK(*folded == canonical_form(nk.tbl));
  CHECK(!stallings_table(2, {Word{1}}).has_value());  // infinite index
  // folding the generators of a Schreier basis reproduces the table
  auto nks3 = normal_kernel(2, {Perm{1, 0, 2}, Perm{1, 2, 0}});
  FreeSchreierBasis basis = free_schreier(nks3.tbl);
  auto refolded = stallings_table(2, basis.gens);
  REQUIRE(refolded.has_value());
  CHECK(*refolded == canonical_form(nks3.tbl));
}

TEST_CASE("free intersections") {
  auto a = normal_kernel(2, {Perm{1, 0}, Perm{0, 1}});
  auto b = normal_kernel(2, {Perm{0, 1}, Perm{1, 0}});
  FreeCosetTable meet = intersect_free(a.tbl, b.tbl);
  CHECK(meet.n == 4);
  CHECK(free_schreier(meet).rank == 5);  // Nielsen-Schreier at index 4
  CHECK(intersect_free(a.tbl, a.tbl) == canonical_form(a.tbl));
}

TEST_CASE("word enumerator order") {
  WordEnumerator en(2);
  CHECK(en.next() == Word{1});
  CHECK(en.next() == Word{-1});
  CHECK(en.next() == Word{2});
  CHECK(en.next() == Word{-2});
  CHECK(en.next() == Word{1, 1});
  CHECK(en.next() == Word{1, 2});
  CHECK(en.next() == Word{1, -2});
  CHECK(en.next() == Word{-1, -1});
}
