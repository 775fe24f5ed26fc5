#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "modcomm/mat2.hpp"
#include "modcomm/word.hpp"

// Finite index subgroups of PSL2(Z) = <S, U | S² = U³ = 1> as coset tables,
// with S = [[0,-1],[1,0]], U = S·T, T = [[1,1],[0,1]].  Congruence kernels,
// cusp data, and Reidemeister–Schreier free bases for torsion-free tables.

namespace modcomm {

// SU alphabet: +1 = S (self-inverse), +2 = U, -2 = U⁻¹.
using SuWord = std::vector<int>;

inline SuWord su_inverse(const SuWord& w) {
  SuWord out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(*it == 1 ? 1 : -*it);
  return out;
}

// Normal form in Z/2 * Z/3: alternating S and U^{±1}.
inline SuWord su_reduce(const SuWord& w) {
  std::vector<std::pair<char, int>> blocks;  // ('S', exp mod 2) or ('U', exp mod 3)
  auto push = [&](char kind, int exp) {
    if (!blocks.empty() && blocks.back().first == kind) {
      int mod = kind == 'S' ? 2 : 3;
      blocks.back().second = (blocks.back().second + exp) % mod;
      if (blocks.back().second == 0) blocks.pop_back();
      return true;
    }
    blocks.emplace_back(kind, exp);
    return false;
  };
  for (int letter : w) {
    bool merged;
    if (letter == 1 || letter == -1)
      merged = push('S', 1);
    else if (letter == 2)
      merged = push('U', 1);
    else if (letter == -2)
      merged = push('U', 2);
    else
      fail(errc::internal, "bad SU letter");
    // a merge can expose a new adjacent pair
    while (merged && blocks.size() >= 2) {
      auto last = blocks.back();
      if (blocks[blocks.size() - 2].first != last.first) break;
      blocks.pop_back();
      merged = push(last.first, last.second);
    }
  }
  SuWord out;
  for (const auto& [kind, exp] : blocks) {
    if (kind == 'S')
      out.push_back(1);
    else
      out.push_back(exp == 1 ? 2 : -2);
  }
  return out;
}

inline SuWord su_concat(const SuWord& a, const SuWord& b) {
  SuWord out = a;
  out.insert(out.end(), b.begin(), b.end());
  return su_reduce(out);
}

inline IntMat su_eval(const SuWord& w) {
  IntMat m;
  for (int letter : w) {
    if (letter == 1 || letter == -1)
      m = m * mat_S();
    else if (letter == 2)
      m = m * mat_U();
    else
      m = m * inverse(mat_U());
  }
  return m;
}

// T^m as SU letters: T = S·U, T⁻¹ = U⁻¹·S.
inline void append_T_power(SuWord& w, const Int& m) {
  if (sgn(m) >= 0) {
    for (Int i = 0; i < m; ++i) { w.push_back(1); w.push_back(2); }
  } else {
    for (Int i = 0; i < -m; ++i) { w.push_back(-2); w.push_back(1); }
  }
}

// Continued-fraction rewriting of an integral det-1 matrix over {S, U}.
inline SuWord word_in_SU(const IntMat& m0) {
  SuWord w;
  Int a = m0.a, b = m0.b, c = m0.c, d = m0.d;
  while (sgn(c) != 0) {
    Int q = div_floor(a, c);
    append_T_power(w, q);  // M = T^q · (reduced)
    a -= q * c;
    b -= q * d;
    // M = S · (S·M); S⁻¹ = S in PSL2(Z)
    w.push_back(1);
    std::swap(a, c);
    std::swap(b, d);
    a = -a;
    b = -b;
  }
  // now ±[[1, b'],[0, 1]]
  if (a < 0) { b = -b; }
  append_T_power(w, b);
  w = su_reduce(w);
  require(su_eval(w) == m0, errc::internal, "word_in_SU round trip failed");
  return w;
}

// Right cosets of a finite index subgroup; stabilizer of coset 0 is the group.
struct CosetTable {
  int n = 1;
  std::vector<int> perm_S, perm_U, perm_U_inv;

  CosetTable() : perm_S{0}, perm_U{0}, perm_U_inv{0} {}

  void finish() {
    perm_U_inv.assign(n, 0);
    for (int i = 0; i < n; ++i) perm_U_inv[perm_U[i]] = i;
  }

  int step(int c, int letter) const {
    if (letter == 1 || letter == -1) return perm_S[c];
    if (letter == 2) return perm_U[c];
    if (letter == -2) return perm_U_inv[c];
    fail(errc::internal, "bad SU letter");
  }

  int trace(const SuWord& w, int from = 0) const {
    int c = from;
    for (int letter : w) c = step(c, letter);
    return c;
  }

  bool contains(const SuWord& w) const { return trace(w) == 0; }
  bool contains(const IntMat& m) const { return contains(word_in_SU(m)); }

  bool torsion_free() const {
    for (int i = 0; i < n; ++i)
      if (perm_S[i] == i || perm_U[i] == i) return false;
    return true;
  }

  bool valid() const {
    if ((int)perm_S.size() != n || (int)perm_U.size() != n) return false;
    for (int i = 0; i < n; ++i) {
      if (perm_S[perm_S[i]] != i) return false;
      if (perm_U[perm_U[perm_U[i]]] != i) return false;
    }
    std::vector<char> seen(n, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int reached = 0;
    while (!queue.empty()) {
      int c = queue.front();
      queue.pop_front();
      ++reached;
      for (int x : {perm_S[c], perm_U[c]})
        if (!seen[x]) { seen[x] = 1; queue.push_back(x); }
    }
    return reached == n;
  }

  bool operator==(const CosetTable& o) const {
    return n == o.n && perm_S == o.perm_S && perm_U == o.perm_U;
  }
};

// BFS renumbering with letter order S, U, U⁻¹; canonical representative of the
// base-point-preserving isomorphism class.
inline CosetTable canonical_form(const CosetTable& t) {
  std::vector<int> newi(t.n, -1);
  std::vector<int> order;
  order.reserve(t.n);
  newi[0] = 0;
  order.push_back(0);
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    for (int letter : {1, 2, -2}) {
      int x = t.step(c, letter);
      if (newi[x] < 0) {
        newi[x] = (int)order.size();
        order.push_back(x);
        queue.push_back(x);
      }
    }
  }
  CosetTable out;
  out.n = t.n;
  out.perm_S.assign(t.n, 0);
  out.perm_U.assign(t.n, 0);
  for (int i = 0; i < t.n; ++i) {
    out.perm_S[newi[order[i]] ] = newi[t.perm_S[order[i]]];
    out.perm_U[newi[order[i]] ] = newi[t.perm_U[order[i]]];
  }
  out.finish();
  return out;
}

namespace detail {

// canonical ± representative of a matrix mod k
inline std::array<long, 4> psl_mod_rep(std::array<long, 4> v, long k) {
  for (auto& x : v) x = ((x % k) + k) % k;
  std::array<long, 4> w;
  for (int i = 0; i < 4; ++i) w[i] = (k - v[i]) % k;
  return std::min(v, w);
}

inline std::array<long, 4> mod_mul(const std::array<long, 4>& x, const std::array<long, 4>& y,
                                   long k) {
  return psl_mod_rep({x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
                      x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]},
                     k);
}

} // namespace detail

// Kernel of PSL2(Z) -> PSL2(Z/k); cosets are the quotient elements, BFS order.
inline CosetTable principal_congruence(long k) {
  require(k >= 1, errc::parse_error, "congruence level must be >= 1");
  if (k == 1) return CosetTable();
  using detail::mod_mul;
  using detail::psl_mod_rep;
  std::array<long, 4> id = psl_mod_rep({1, 0, 0, 1}, k);
  std::array<long, 4> s = psl_mod_rep({0, -1, 1, 0}, k);
  std::array<long, 4> u = psl_mod_rep({0, -1, 1, 1}, k);
  std::array<long, 4> uinv = psl_mod_rep({1, 1, -1, 0}, k);
  std::map<std::array<long, 4>, int> index;
  std::vector<std::array<long, 4>> elems;
  index[id] = 0;
  elems.push_back(id);
  std::deque<int> queue{0};
  std::vector<std::array<int, 3>> images;  // S, U, U⁻¹
  images.push_back({-1, -1, -1});
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    const std::array<long, 4> gens[3] = {s, u, uinv};
    for (int gi = 0; gi < 3; ++gi) {
      auto next = mod_mul(elems[c], gens[gi], k);
      auto it = index.find(next);
      int j;
      if (it == index.end()) {
        j = (int)elems.size();
        index[next] = j;
        elems.push_back(next);
        images.push_back({-1, -1, -1});
        queue.push_back(j);
      } else {
        j = it->second;
      }
      images[c][gi] = j;
    }
  }
  CosetTable t;
  t.n = (int)elems.size();
  t.perm_S.resize(t.n);
  t.perm_U.resize(t.n);
  for (int i = 0; i < t.n; ++i) {
    t.perm_S[i] = images[i][0];
    t.perm_U[i] = images[i][1];
  }
  t.finish();
  require(t.valid(), errc::internal, "congruence table invalid");
  return t;
}

// Kernel of PSL2(Z) -> Z/n, S ↦ s, U ↦ u (relations 2s ≡ 3u ≡ 0 required).
inline CosetTable abelian_quotient_kernel(long n, long s, long u) {
  require(n >= 1, errc::parse_error, "modulus must be >= 1");
  s = ((s % n) + n) % n;
  u = ((u % n) + n) % n;
  require((2 * s) % n == 0, errc::parse_error, "image of S must satisfy S^2 = 1");
  require((3 * u) % n == 0, errc::parse_error, "image of U must satisfy U^3 = 1");
  std::vector<int> idx(n, -1);
  std::vector<long> elems;
  idx[0] = 0;
  elems.push_back(0);
  std::deque<long> queue{0};
  while (!queue.empty()) {
    long c = queue.front();
    queue.pop_front();
    for (long g : {s, u, (n - u) % n}) {
      long next = (c + g) % n;
      if (idx[next] < 0) {
        idx[next] = (int)elems.size();
        elems.push_back(next);
        queue.push_back(next);
      }
    }
  }
  CosetTable t;
  t.n = (int)elems.size();
  t.perm_S.resize(t.n);
  t.perm_U.resize(t.n);
  for (int i = 0; i < t.n; ++i) {
    t.perm_S[i] = idx[(elems[i] + s) % n];
    t.perm_U[i] = idx[(elems[i] + u) % n];
  }
  t.finish();
  return t;
}

// A ∩ B: diagonal action on coset pairs, orbit of (0,0).
inline CosetTable intersect(const CosetTable& a, const CosetTable& b) {
  std::map<std::pair<int, int>, int> index;
  std::vector<std::pair<int, int>> pairs;
  index[{0, 0}] = 0;
  pairs.push_back({0, 0});
  std::deque<int> queue{0};
  std::vector<std::array<int, 2>> images;
  images.push_back({-1, -1});
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    auto [ca, cb] = pairs[c];
    const int steps[2][2] = {{a.perm_S[ca], b.perm_S[cb]}, {a.perm_U[ca], b.perm_U[cb]}};
    for (int gi = 0; gi < 2; ++gi) {
      std::pair<int, int> next{steps[gi][0], steps[gi][1]};
      auto it = index.find(next);
      int j;
      if (it == index.end()) {
        j = (int)pairs.size();
        index[next] = j;
        pairs.push_back(next);
        images.push_back({-1, -1});
        queue.push_back(j);
      } else {
        j = it->second;
      }
      images[c][gi] = j;
    }
  }
  CosetTable t;
  t.n = (int)pairs.size();
  t.perm_S.resize(t.n);
  t.perm_U.resize(t.n);
  for (int i = 0; i < t.n; ++i) {
    t.perm_S[i] = images[i][0];
    t.perm_U[i] = images[i][1];
  }
  t.finish();
  return canonical_form(t);
}

// BFS Schreier transversal, letter order S < U < U⁻¹, queue order breaking ties.
inline std::vector<SuWord> schreier_transversal(const CosetTable& t) {
  std::vector<SuWord> rep(t.n);
  std::vector<char> seen(t.n, 0);
  seen[0] = 1;
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    for (int letter : {1, 2, -2}) {
      int x = t.step(c, letter);
      if (!seen[x]) {
        seen[x] = 1;
        rep[x] = rep[c];
        rep[x].push_back(letter);
        queue.push_back(x);
      }
    }
  }
  return rep;
}

struct SchreierGen {
  SuWord word;
  IntMat mat;
};

struct SchreierBasis {
  int n = 1;
  int rank = 0;
  std::vector<SuWord> transversal;
  std::vector<SchreierGen> gens;
  // rewriting data: word over the basis for each S-edge / U-edge
  std::vector<Word> s_expr, u_expr;
};

// Reidemeister–Schreier for a torsion-free table: free basis of rank 1 + n/6.
inline SchreierBasis schreier_basis(const CosetTable& t) {
  require(t.torsion_free(), errc::not_torsion_free, "subgroup has torsion");
  SchreierBasis out;
  out.n = t.n;
  out.transversal = schreier_transversal(t);

  // replay the BFS to mark tree edges
  std::set<std::pair<int, int>> tree_S;  // unordered {c, cS}
  std::vector<char> tree_U(t.n, 0);      // U-edge at coset c
  {
    std::vector<char> seen(t.n, 0);
    seen[0] = 1;
    std::deque<int> queue{0};
    while (!queue.empty()) {
      int c = queue.front();
      queue.pop_front();
      for (int letter : {1, 2, -2}) {
        int x = t.step(c, letter);
        if (seen[x]) continue;
        seen[x] = 1;
        if (letter == 1)
          tree_S.insert({std::min(c, x), std::max(c, x)});
        else if (letter == 2)
          tree_U[c] = 1;
        else
          tree_U[x] = 1;  // (x, U) edge runs x -> c
        queue.push_back(x);
      }
    }
  }

  auto edge_word = [&](int c, int letter, int target) {
    SuWord w = out.transversal[c];
    w.push_back(letter);
    return su_concat(w, su_inverse(out.transversal[target]));
  };

  out.s_expr.assign(t.n, {});
  out.u_expr.assign(t.n, {});

  for (int c = 0; c < t.n; ++c) {
    int c2 = t.perm_S[c];
    if (c >= c2) continue;  // torsion-free: c != c2; one generator per S-pair
    if (tree_S.count({c, c2})) continue;
    SuWord w = edge_word(c, 1, c2);
    IntMat m = su_eval(w);
    if (m.is_identity()) continue;
    out.gens.push_back({w, m});
    int idx = (int)out.gens.size();
    out.s_expr[c] = {idx};
    out.s_expr[c2] = {-idx};
  }

  std::vector<char> done(t.n, 0);
  for (int c0 = 0; c0 < t.n; ++c0) {
    if (done[c0]) continue;
    int cyc[3] = {c0, t.perm_U[c0], t.perm_U[t.perm_U[c0]]};
    for (int c : cyc) done[c] = 1;
    // one relation s0·s1·s2 = 1 per U-cycle eliminates the last non-tree edge
    int elim = -1;
    for (int i = 0; i < 3; ++i)
      if (!tree_U[cyc[i]]) elim = i;
    std::array<SuWord, 3> words;
    std::array<bool, 3> trivial{};
    for (int i = 0; i < 3; ++i) {
      if (tree_U[cyc[i]]) { trivial[i] = true; continue; }
      words[i] = edge_word(cyc[i], 2, cyc[(i + 1) % 3]);
      trivial[i] = su_eval(words[i]).is_identity();
    }
    for (int i = 0; i < 3; ++i) {
      if (trivial[i] || i == elim) continue;
      out.gens.push_back({words[i], su_eval(words[i])});
      out.u_expr[cyc[i]] = {(int)out.gens.size()};
    }
    if (elim >= 0 && !trivial[elim]) {
      Word expr = concat(inverse(out.u_expr[cyc[(elim + 2) % 3]]),
                         inverse(out.u_expr[cyc[(elim + 1) % 3]]));
      out.u_expr[cyc[elim]] = expr;
    }
  }

  out.rank = (int)out.gens.size();
  require(out.rank == 1 + t.n / 6, errc::internal, "Schreier rank disagrees with 1 + n/6");
  return out;
}

// Rewrite a member over the Schreier basis; its evaluation reproduces the input.
inline Word rewrite_member(const CosetTable& t, const SchreierBasis& basis, const SuWord& w) {
  Word out;
  int c = 0;
  for (int letter : w) {
    if (letter == 1 || letter == -1) {
      const Word& e = basis.s_expr[c];
      out.insert(out.end(), e.begin(), e.end());
      c = t.perm_S[c];
    } else if (letter == 2) {
      const Word& e = basis.u_expr[c];
      out.insert(out.end(), e.begin(), e.end());
      c = t.perm_U[c];
    } else {
      int c2 = t.perm_U_inv[c];
      Word e = inverse(basis.u_expr[c2]);
      out.insert(out.end(), e.begin(), e.end());
      c = c2;
    }
  }
  require(c == 0, errc::not_a_member, "word does not stabilize the base coset");
  return reduce(out);
}

inline Word rewrite_member(const CosetTable& t, const SchreierBasis& basis, const IntMat& m) {
  return rewrite_member(t, basis, word_in_SU(m));
}

inline IntMat evaluate_basis_word(const SchreierBasis& basis, const Word& w) {
  IntMat m;
  for (int letter : w) {
    require(std::abs(letter) >= 1 && std::abs(letter) <= basis.rank, errc::parse_error,
            "letter outside the basis");
    const IntMat& g = basis.gens[std::abs(letter) - 1].mat;
    m = m * (letter > 0 ? g : inverse(g));
  }
  return m;
}

struct CuspData {
  std::vector<std::vector<int>> orbits;  // cycles of perm_T, each starting at its min coset
  std::vector<int> widths;
  std::vector<IntMat> representatives;  // g_c · T^w · g_c⁻¹, parabolic members
  std::vector<SuWord> rep_words;
};

// One orbit of T = S·U per cusp of H²/H.
inline CuspData cusps(const CosetTable& t) {
  auto perm_T = [&](int c) { return t.perm_U[t.perm_S[c]]; };
  std::vector<SuWord> transversal = schreier_transversal(t);
  CuspData out;
  std::vector<char> done(t.n, 0);
  for (int c0 = 0; c0 < t.n; ++c0) {
    if (done[c0]) continue;
    std::vector<int> orbit;
    int c = c0;
    do {
      orbit.push_back(c);
      done[c] = 1;
      c = perm_T(c);
    } while (c != c0);
    int w = (int)orbit.size();
    SuWord rep = transversal[c0];
    append_T_power(rep, w);
    rep = su_concat(rep, su_inverse(transversal[c0]));
    out.orbits.push_back(orbit);
    out.widths.push_back(w);
    out.rep_words.push_back(rep);
    out.representatives.push_back(su_eval(rep));
  }
  return out;
}

// Smallest N >= 1 with m^N in the subgroup: the orbit length of coset 0.
inline int smallest_power_in(const CosetTable& t, const IntMat& m) {
  SuWord w = word_in_SU(m);
  int c = t.trace(w);
  int n = 1;
  while (c != 0) {
    c = t.trace(w, c);
    ++n;
    require(n <= t.n, errc::internal, "power orbit exceeded table size");
  }
  return n;
}

// Conjugating every basis generator by S and U stays inside: with equal
// indices this pins H^g = H for all g in PSL2(Z).
inline bool normal_in_psl2z(const CosetTable& t, const SchreierBasis& basis) {
  for (const auto& g : basis.gens) {
    for (const IntMat& c : {mat_S(), mat_U()}) {
      IntMat conj = inverse(c) * g.mat * c;
      if (!t.contains(conj)) return false;
    }
  }
  return true;
}

// Coset table from a membership oracle (finite index assumed <= max_index).
template <typename Oracle>
inline std::optional<CosetTable> table_from_membership(Oracle&& member, int max_index) {
  std::vector<IntMat> reps{IntMat()};
  std::vector<std::array<int, 3>> images{{-1, -1, -1}};
  std::deque<int> queue{0};
  const IntMat gens[3] = {mat_S(), mat_U(), inverse(mat_U())};
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    for (int gi = 0; gi < 3; ++gi) {
      if (images[c][gi] >= 0) continue;
      IntMat r2 = reps[c] * gens[gi];
      int found = -1;
      for (int j = 0; j < (int)reps.size(); ++j) {
        if (member(r2 * inverse(reps[j]))) { found = j; break; }
      }
      if (found < 0) {
        found = (int)reps.size();
        if (found >= max_index) return std::nullopt;
        reps.push_back(r2);
        images.push_back({-1, -1, -1});
        queue.push_back(found);
      }
      images[c][gi] = found;
    }
  }
  CosetTable t;
  t.n = (int)reps.size();
  t.perm_S.resize(t.n);
  t.perm_U.resize(t.n);
  for (int i = 0; i < t.n; ++i) {
    t.perm_S[i] = images[i][0];
    t.perm_U[i] = images[i][1];
  }
  t.finish();
  if (!t.valid()) return std::nullopt;
  return t;
}

} // namespace modcomm
