#pragma once

#include <vector>

#include "modcomm/free_subgroup.hpp"
#include "modcomm/linalg.hpp"

// The Q-module structure of H1(N, Q) for N = ker(F_k -> Q): integral action
// matrices [w] ↦ [t_q · w · t_q⁻¹] on the Schreier basis of N, checked
// against the character of τ^k ⊕ ρ^{k−1}.

namespace modcomm {

struct HomologyAction {
  QuotientGroup q;
  int rank_f = 0;
  int rank_n = 0;
  std::vector<IMatrix> mats;  // one invertible integer matrix per element of Q
  FreeCosetTable tbl;
  FreeSchreierBasis basis;
};

// Verify normality: conjugates of N's generators by F's generators stay in N.
inline bool kernel_is_normal(const FreeCosetTable& tbl, const FreeSchreierBasis& basis) {
  for (const Word& g : basis.gens)
    for (int i = 1; i <= tbl.rank; ++i) {
      Word conj = concat(concat(Word{i}, g), Word{-i});
      if (!tbl.contains(conj)) return false;
      conj = concat(concat(Word{-i}, g), Word{i});
      if (!tbl.contains(conj)) return false;
    }
  return true;
}

// For a normal table the cosets form the quotient group: multiply cosets by
// tracing transversal representatives.
inline QuotientGroup quotient_of_normal(const FreeCosetTable& tbl,
                                        const FreeSchreierBasis& basis) {
  QuotientGroup q;
  q.size = tbl.n;
  q.mult.assign(tbl.n, std::vector<int>(tbl.n));
  for (int a = 0; a < tbl.n; ++a)
    for (int b = 0; b < tbl.n; ++b) q.mult[a][b] = tbl.trace(basis.transversal[b], a);
  q.gen_image.resize(tbl.rank);
  for (int i = 0; i < tbl.rank; ++i) q.gen_image[i] = tbl.fwd[i][0];
  return q;
}

inline HomologyAction homology_action(int rank_f, const FreeCosetTable& tbl) {
  HomologyAction act;
  act.rank_f = rank_f;
  act.tbl = tbl;
  act.basis = free_schreier(tbl);
  act.rank_n = act.basis.rank;
  require(kernel_is_normal(act.tbl, act.basis), errc::not_normal, "kernel is not normal");
  act.q = quotient_of_normal(act.tbl, act.basis);
  act.mats.reserve(act.q.size);
  for (int q = 0; q < act.q.size; ++q) {
    // cosets are the elements of Q; the transversal word of coset q lifts q
    const Word& t_q = act.basis.transversal[q];
    Word t_q_inv = inverse(t_q);
    IMatrix m(act.rank_n, IVec(act.rank_n, 0));
    for (int j = 0; j < act.rank_n; ++j) {
      Word w = concat(concat(t_q, act.basis.gens[j]), t_q_inv);
      IVec cls = subgroup_class(act.tbl, act.basis, w);
      for (int i = 0; i < act.rank_n; ++i) m[i][j] = cls[i];
    }
    act.mats.push_back(std::move(m));
  }
  return act;
}

struct ChevalleyWeilReport {
  bool dim_ok = false;
  bool char_ok = false;
  bool fixed_dim_ok = false;
  int fixed_dim = 0;

  bool all_ok() const { return dim_ok && char_ok && fixed_dim_ok; }
};

inline std::vector<IVec> fixed_subspace(const HomologyAction& act) {
  IMatrix stacked;
  for (int q = 1; q < act.q.size; ++q) {
    for (int i = 0; i < act.rank_n; ++i) {
      IVec row = act.mats[q][i];
      row[i] -= 1;
      stacked.push_back(std::move(row));
    }
  }
  return kernel_basis(stacked, act.rank_n);
}

// H1(N, Q) ≅ τ^k ⊕ ρ^{k−1}: dimension k + (k−1)(|Q|−1), trace 1 off the
// identity, fixed space of dimension k (the transfer image).
inline ChevalleyWeilReport chevalley_weil_check(const HomologyAction& act) {
  ChevalleyWeilReport rep;
  int k = act.rank_f, n = act.q.size;
  rep.dim_ok = act.rank_n == k + (k - 1) * (n - 1);
  rep.char_ok = true;
  for (int q = 0; q < n; ++q) {
    Int tr = 0;
    for (int i = 0; i < act.rank_n; ++i) tr += act.mats[q][i][i];
    Int expect = q == 0 ? Int(act.rank_n) : Int(1);
    if (tr != expect) rep.char_ok = false;
  }
  rep.fixed_dim = (int)fixed_subspace(act).size();
  rep.fixed_dim_ok = rep.fixed_dim == k;
  return rep;
}

// Deterministic witness that q moves homology: the first standard basis
// vector not fixed by mats[q].
inline IVec find_moved_class(const HomologyAction& act, int q) {
  require(q != 0, errc::identity_element, "the identity fixes every class");
  require(q > 0 && q < act.q.size, errc::internal, "group element out of range");
  const IMatrix& m = act.mats[q];
  for (int j = 0; j < act.rank_n; ++j) {
    bool fixed = true;
    for (int i = 0; i < act.rank_n; ++i) {
      Int want = i == j ? 1 : 0;
      if (m[i][j] != want) { fixed = false; break; }
    }
    if (!fixed) {
      IVec z(act.rank_n, 0);
      z[j] = 1;
      return z;
    }
  }
  fail(errc::internal, "nontrivial element acting trivially on homology");
}

inline IVec apply_action(const HomologyAction& act, int q, const IVec& z) {
  return mat_apply(act.mats[q], z);
}

} // namespace modcomm
