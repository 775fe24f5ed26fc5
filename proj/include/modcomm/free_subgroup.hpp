#pragma once

#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "modcomm/word.hpp"

// Finite index subgroups of an abstract free group F_r: coset tables with
// alphabet x_1, x_1⁻¹, ..., normal kernels of maps onto finite permutation
// groups, Stallings folding for generator-defined subgroups, and free
// Reidemeister–Schreier bases.

namespace modcomm {

using Perm = std::vector<int>;

inline Perm perm_mul(const Perm& a, const Perm& b) {  // apply a, then b
  Perm r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = b[a[i]];
  return r;
}

inline Perm perm_inverse(const Perm& a) {
  Perm r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[a[i]] = (int)i;
  return r;
}

inline bool is_perm(const Perm& p) {
  std::vector<char> seen(p.size(), 0);
  for (int x : p) {
    if (x < 0 || x >= (int)p.size() || seen[x]) return false;
    seen[x] = 1;
  }
  return true;
}

struct FreeCosetTable {
  int rank = 0;
  int n = 1;
  std::vector<Perm> fwd;  // one permutation per generator
  std::vector<Perm> inv;

  FreeCosetTable() = default;
  FreeCosetTable(int rank_, int n_) : rank(rank_), n(n_), fwd(rank_, Perm(n_)), inv(rank_) {}

  void finish() {
    inv.resize(rank);
    for (int i = 0; i < rank; ++i) inv[i] = perm_inverse(fwd[i]);
  }

  int step(int c, int letter) const {
    int i = std::abs(letter) - 1;
    require(i >= 0 && i < rank, errc::parse_error, "letter outside the table's alphabet");
    return letter > 0 ? fwd[i][c] : inv[i][c];
  }

  int trace(const Word& w, int from = 0) const {
    int c = from;
    for (int letter : w) c = step(c, letter);
    return c;
  }

  bool contains(const Word& w) const { return trace(w) == 0; }

  bool valid() const {
    for (int i = 0; i < rank; ++i)
      if ((int)fwd[i].size() != n || !is_perm(fwd[i])) return false;
    std::vector<char> seen(n, 0);
    std::deque<int> q{0};
    seen[0] = 1;
    int reached = 0;
    while (!q.empty()) {
      int c = q.front();
      q.pop_front();
      ++reached;
      for (int i = 0; i < rank; ++i)
        for (int x : {fwd[i][c], inv[i][c]})
          if (!seen[x]) { seen[x] = 1; q.push_back(x); }
    }
    return reached == n;
  }

  bool operator==(const FreeCosetTable& o) const {
    return rank == o.rank && n == o.n && fwd == o.fwd;
  }
};

// BFS renumber, letter order x1 < x1⁻¹ < x2 < x2⁻¹ < ...
inline FreeCosetTable canonical_form(const FreeCosetTable& t) {
  std::vector<int> newi(t.n, -1);
  std::vector<int> order;
  newi[0] = 0;
  order.push_back(0);
  std::deque<int> q{0};
  while (!q.empty()) {
    int c = q.front();
    q.pop_front();
    for (int i = 1; i <= t.rank; ++i)
      for (int letter : {i, -i}) {
        int x = t.step(c, letter);
        if (newi[x] < 0) {
          newi[x] = (int)order.size();
          order.push_back(x);
          q.push_back(x);
        }
      }
  }
  FreeCosetTable out(t.rank, t.n);
  for (int i = 0; i < t.rank; ++i)
    for (int c = 0; c < t.n; ++c) out.fwd[i][newi[order[c]]] = newi[t.fwd[i][order[c]]];
  out.finish();
  return out;
}

// Finite quotient group presented by its multiplication table.
struct QuotientGroup {
  int size = 1;
  std::vector<std::vector<int>> mult;  // mult[a][b] = a·b, identity = 0
  std::vector<int> gen_image;          // image of each free generator

  int inverse_of(int a) const {
    for (int b = 0; b < size; ++b)
      if (mult[a][b] == 0) return b;
    fail(errc::internal, "group element without inverse");
  }
};

struct NormalKernel {
  FreeCosetTable tbl;   // cosets of ker(F -> Q) indexed by the elements of Q
  QuotientGroup q;
};

// ker(F -> Q) where Q is the closure of the generator images; the table is
// the right regular action, so the point stabilizer is exactly the kernel.
inline NormalKernel normal_kernel(int rank, const std::vector<Perm>& images) {
  require((int)images.size() == rank, errc::parse_error, "one image per generator required");
  size_t deg = images.empty() ? 1 : images[0].size();
  for (const auto& p : images)
    require(p.size() == deg && is_perm(p), errc::parse_error, "generator images must be permutations of equal degree");
  Perm id(deg);
  std::iota(id.begin(), id.end(), 0);
  std::map<Perm, int> index;
  std::vector<Perm> elems{id};
  index[id] = 0;
  std::deque<int> q{0};
  while (!q.empty()) {
    int c = q.front();
    q.pop_front();
    for (const auto& g : images) {
      Perm next = perm_mul(elems[c], g);
      if (!index.count(next)) {
        index[next] = (int)elems.size();
        elems.push_back(next);
        q.push_back((int)elems.size() - 1);
      }
    }
  }
  NormalKernel out;
  out.q.size = (int)elems.size();
  out.q.mult.assign(out.q.size, std::vector<int>(out.q.size));
  for (int a = 0; a < out.q.size; ++a)
    for (int b = 0; b < out.q.size; ++b) out.q.mult[a][b] = index.at(perm_mul(elems[a], elems[b]));
  out.q.gen_image.resize(rank);
  for (int i = 0; i < rank; ++i) out.q.gen_image[i] = index.at(images[i]);

  out.tbl = FreeCosetTable(rank, out.q.size);
  for (int i = 0; i < rank; ++i)
    for (int c = 0; c < out.q.size; ++c) out.tbl.fwd[i][c] = out.q.mult[c][out.q.gen_image[i]];
  out.tbl.finish();
  require(out.tbl.valid(), errc::not_transitive, "regular action must be transitive");
  return out;
}

// Stallings folding: coset table of the subgroup generated by `gens`,
// nullopt when the subgroup has infinite index.
inline std::optional<FreeCosetTable> stallings_table(int rank, const std::vector<Word>& gens) {
  std::vector<std::vector<int>> edge;  // edge[v][dir], dir = 2i (x_{i+1}) / 2i+1 (inverse)
  std::vector<int> parent;
  auto new_vertex = [&]() {
    edge.emplace_back(2 * rank, -1);
    parent.push_back((int)edge.size() - 1);
    return (int)edge.size() - 1;
  };
  auto find = [&](int v) {
    while (parent[v] != v) { parent[v] = parent[parent[v]]; v = parent[v]; }
    return v;
  };
  auto dir_of = [&](int letter) { return letter > 0 ? 2 * (letter - 1) : 2 * (-letter - 1) + 1; };
  auto flip = [&](int dir) { return dir ^ 1; };

  std::deque<std::pair<int, int>> to_merge;
  // record v --d--> t; same-label clashes schedule a vertex identification
  auto add_edge = [&](int v, int d, int t) {
    v = find(v);
    t = find(t);
    int u = edge[v][d];
    if (u >= 0) {
      if (find(u) != t) to_merge.push_back({find(u), t});
      return;
    }
    edge[v][d] = t;
    int back = edge[t][flip(d)];
    if (back < 0)
      edge[t][flip(d)] = v;
    else if (find(back) != v)
      to_merge.push_back({find(back), v});
  };

  new_vertex();  // base = 0
  for (const Word& g : gens) {
    Word w = reduce(g);
    if (w.empty()) continue;
    int v = 0;
    for (size_t i = 0; i < w.size(); ++i) {
      int target = (i + 1 == w.size()) ? 0 : new_vertex();
      add_edge(find(v), dir_of(w[i]), find(target));
      v = find(target);
    }
  }

  while (!to_merge.empty()) {
    auto [a, b] = to_merge.front();
    to_merge.pop_front();
    a = find(a);
    b = find(b);
    if (a == b) continue;
    if (a > b) std::swap(a, b);  // the base vertex survives
    parent[b] = a;
    for (int d = 0; d < 2 * rank; ++d)
      if (edge[b][d] >= 0) add_edge(a, d, find(edge[b][d]));
  }

  // surviving vertices; the folded graph is complete iff the index is finite
  std::vector<int> live;
  std::vector<int> idx(edge.size(), -1);
  for (int v = 0; v < (int)edge.size(); ++v)
    if (find(v) == v) {
      idx[v] = (int)live.size();
      live.push_back(v);
    }
  FreeCosetTable t(rank, (int)live.size());
  for (int i = 0; i < rank; ++i)
    for (int k = 0; k < (int)live.size(); ++k) {
      int u = edge[live[k]][2 * i];
      if (u < 0) return std::nullopt;
      t.fwd[i][k] = idx[find(u)];
    }
  t.finish();
  if (!t.valid()) return std::nullopt;
  return canonical_form(t);
}

inline FreeCosetTable intersect_free(const FreeCosetTable& a, const FreeCosetTable& b) {
  require(a.rank == b.rank, errc::field_mismatch, "tables over different free groups");
  std::map<std::pair<int, int>, int> index;
  std::vector<std::pair<int, int>> pairs{{0, 0}};
  index[{0, 0}] = 0;
  std::deque<int> q{0};
  std::vector<std::vector<int>> images{std::vector<int>(a.rank, -1)};
  while (!q.empty()) {
    int c = q.front();
    q.pop_front();
    auto [ca, cb] = pairs[c];
    for (int i = 0; i < a.rank; ++i) {
      std::pair<int, int> next{a.fwd[i][ca], b.fwd[i][cb]};
      auto it = index.find(next);
      int j;
      if (it == index.end()) {
        j = (int)pairs.size();
        index[next] = j;
        pairs.push_back(next);
        images.push_back(std::vector<int>(a.rank, -1));
        q.push_back(j);
      } else {
        j = it->second;
      }
      images[c][i] = j;
    }
  }
  FreeCosetTable t(a.rank, (int)pairs.size());
  for (int i = 0; i < a.rank; ++i)
    for (int c = 0; c < t.n; ++c) t.fwd[i][c] = images[c][i];
  t.finish();
  return canonical_form(t);
}

struct FreeSchreierBasis {
  int ambient_rank = 0;
  int rank = 0;
  std::vector<Word> transversal;       // words over F
  std::vector<Word> gens;              // words over F, one per non-tree positive edge
  std::vector<std::vector<int>> expr;  // expr[i][c]: 0 = tree, else ±(basis index)
};

// Nielsen–Schreier basis: rank 1 + n·(r−1), one generator per non-tree edge.
inline FreeSchreierBasis free_schreier(const FreeCosetTable& t) {
  FreeSchreierBasis out;
  out.ambient_rank = t.rank;
  out.transversal.assign(t.n, {});
  out.expr.assign(t.rank, std::vector<int>(t.n, 0));
  std::vector<char> seen(t.n, 0);
  std::vector<std::pair<int, int>> tree;  // (coset, ±gen) used to discover
  seen[0] = 1;
  std::deque<int> q{0};
  std::set<std::pair<int, int>> tree_edges;  // (coset, gen 0-based) positive edges
  while (!q.empty()) {
    int c = q.front();
    q.pop_front();
    for (int i = 1; i <= t.rank; ++i)
      for (int letter : {i, -i}) {
        int x = t.step(c, letter);
        if (seen[x]) continue;
        seen[x] = 1;
        out.transversal[x] = out.transversal[c];
        out.transversal[x].push_back(letter);
        if (letter > 0)
          tree_edges.insert({c, i - 1});
        else
          tree_edges.insert({x, i - 1});
        q.push_back(x);
      }
  }
  for (int c = 0; c < t.n; ++c)
    for (int i = 0; i < t.rank; ++i) {
      if (tree_edges.count({c, i})) continue;
      int c2 = t.fwd[i][c];
      Word w = out.transversal[c];
      w.push_back(i + 1);
      Word g = concat(w, inverse(out.transversal[c2]));
      out.gens.push_back(g);
      out.expr[i][c] = (int)out.gens.size();
    }
  out.rank = (int)out.gens.size();
  require(out.rank == 1 + t.n * (t.rank - 1), errc::internal,
          "free Schreier rank disagrees with Nielsen-Schreier");
  return out;
}

// Rewrite a member of the subgroup over its Schreier basis.
inline Word rewrite_free(const FreeCosetTable& t, const FreeSchreierBasis& basis, const Word& w) {
  Word out;
  int c = 0;
  for (int letter : w) {
    int i = std::abs(letter) - 1;
    if (letter > 0) {
      int e = basis.expr[i][c];
      if (e != 0) out.push_back(e);
      c = t.fwd[i][c];
    } else {
      int c2 = t.inv[i][c];
      int e = basis.expr[i][c2];
      if (e != 0) out.push_back(-e);
      c = c2;
    }
  }
  require(c == 0, errc::not_a_member, "word does not stabilize the base coset");
  return reduce(out);
}

// Expand a word over the basis back to a word over F (evaluation oracle).
inline Word expand_basis_word(const FreeSchreierBasis& basis, const Word& w) {
  Word out;
  for (int letter : w) {
    require(std::abs(letter) >= 1 && std::abs(letter) <= basis.rank, errc::parse_error,
            "letter outside the basis");
    const Word& g = basis.gens[std::abs(letter) - 1];
    Word piece = letter > 0 ? g : inverse(g);
    out.insert(out.end(), piece.begin(), piece.end());
  }
  return reduce(out);
}

// Abelianized class in H1(subgroup) of a member word given over F.
inline IVec subgroup_class(const FreeCosetTable& t, const FreeSchreierBasis& basis,
                           const Word& w_over_F) {
  return abelianize(rewrite_free(t, basis, w_over_F), basis.rank);
}

} // namespace modcomm
