#pragma once

#include <string>
#include <vector>

#include "modcomm/chevweil.hpp"
#include "modcomm/fox.hpp"

// Constructive non-commensurability witnesses: an element x_b = [a, b] lying
// in K1' ∩ K2 whose homology class in H1(K2) is nonzero, so that no power of
// x_b lies in K2', together with the lower-central / derived chains that push
// the obstruction into deeper terms.

namespace modcomm {

struct ChainEntry {
  SeriesKind kind = SeriesKind::lower_central;
  int level = 2;
  Word y;        // over F
  long aux_n = 1;  // power of x_b used on the derived branch
  SeriesVerdict in_k1 = SeriesVerdict::undecidable;
  SeriesVerdict in_k2 = SeriesVerdict::undecidable;
};

struct WitnessCert {
  int rank_f = 0;
  // subgroup data; K2 normal in F
  FreeCosetTable k1, k2;
  Word a;            // in K1 \ K2
  Word b;            // in K1 ∩ K2 with [b] = n·z in H1(K2)
  Word x_b;          // [a, b]
  Int n = 1;
  IVec z;            // moved class, act(q_a)·z ≠ z
  IVec hom_class;    // [x_b] in H1(K2) = act(q_a)·[b] − [b]
  Word derived_aux;  // x' = [b1^{n1}, b2^{n2}] for the derived chain
  long aux_n1 = 1, aux_n2 = 1;
  std::vector<ChainEntry> chain;
};

// Shortest word of K1 \ K2 in the deterministic (length, lex) order.
inline Word separating_element(const FreeCosetTable& k1, const FreeCosetTable& k2) {
  require(k1.rank == k2.rank, errc::field_mismatch, "tables over different free groups");
  // K1 ⊆ K2 exactly when every K1 Schreier generator lies in K2
  FreeSchreierBasis b1 = free_schreier(k1);
  bool contained = true;
  size_t longest = 1;
  for (const Word& g : b1.gens) {
    longest = std::max(longest, g.size());
    if (!k2.contains(g)) contained = false;
  }
  require(!contained, errc::no_separator, "K1 is contained in K2");
  WordEnumerator en(k1.rank);
  while (true) {
    Word w = en.next();
    require(w.size() <= longest, errc::internal, "separator search passed its bound");
    if (k1.contains(w) && !k2.contains(w)) return w;
  }
}

// Realize [b] = n·z with b ∈ K1 ∩ K2 and n >= 1 minimal: lattice membership
// against the classes of the K1∩K2 Schreier generators, by Hermite form.
struct Realization {
  Int n = 1;
  Word b;
};

inline Realization realize_multiple(const FreeCosetTable& k2,
                                    const FreeSchreierBasis& meet_basis,
                                    const FreeSchreierBasis& k2_basis, const IVec& z) {
  IMatrix gen_classes;  // one row per K1∩K2 generator: its class in H1(K2)
  for (const Word& g : meet_basis.gens)
    gen_classes.push_back(subgroup_class(k2, k2_basis, g));
  Hnf hnf = hermite_normal_form(gen_classes);
  // n·z lands in the class lattice for some n dividing its exponent; search upward
  Int bound = 1;
  for (size_t i = 0; i < hnf.h.size(); ++i) bound *= hnf.h[i][hnf.pivots[i]];
  bound = abs(bound);
  for (Int n = 1; n <= bound; ++n) {
    IVec target(z.size());
    for (size_t i = 0; i < z.size(); ++i) target[i] = n * z[i];
    auto coords = lattice_coordinates(hnf, target, (int)meet_basis.gens.size());
    if (!coords) continue;
    Word b;
    for (size_t j = 0; j < coords->size(); ++j) {
      if (sgn((*coords)[j]) == 0) continue;
      require((*coords)[j].fits_slong_p(), errc::search_exhausted, "lattice coordinate overflow");
      Word piece = word_pow(meet_basis.gens[j], (*coords)[j].get_si());
      b.insert(b.end(), piece.begin(), piece.end());
    }
    Realization out;
    out.n = n;
    out.b = reduce(b);
    require(!out.b.empty(), errc::internal, "realized b must be nontrivial");
    return out;
  }
  fail(errc::search_exhausted, "no integral multiple of z realized in the class lattice");
}

// Witness for distinct finite index K1, K2 < F with K2 normal.
inline WitnessCert gaschutz_witness(int rank_f, const FreeCosetTable& k1,
                                    const FreeCosetTable& k2) {
  require(canonical_form(k1) != canonical_form(k2), errc::no_separator,
          "subgroups must be distinct");
  WitnessCert cert;
  cert.rank_f = rank_f;
  cert.k1 = k1;
  cert.k2 = k2;
  cert.a = separating_element(k1, k2);

  HomologyAction act = homology_action(rank_f, k2);
  int q_a = act.tbl.trace(cert.a);  // cosets of the regular table are Q elements
  require(q_a != 0, errc::internal, "separator lies in K2");
  cert.z = find_moved_class(act, q_a);

  FreeCosetTable meet = intersect_free(k1, k2);
  FreeSchreierBasis meet_basis = free_schreier(meet);
  Realization real = realize_multiple(k2, meet_basis, act.basis, cert.z);
  cert.n = real.n;
  cert.b = real.b;
  cert.x_b = commutator(cert.a, cert.b);

  // [x_b] = a·[b] − [b], and directly by rewriting; both must agree.
  IVec cls_b = subgroup_class(k2, act.basis, cert.b);
  IVec moved = apply_action(act, q_a, cls_b);
  IVec expect(cls_b.size());
  for (size_t i = 0; i < cls_b.size(); ++i) expect[i] = moved[i] - cls_b[i];
  cert.hom_class = subgroup_class(k2, act.basis, cert.x_b);
  require(cert.hom_class == expect, errc::internal,
          "homology class disagrees with the action formula");
  require(!is_zero_vec(cert.hom_class), errc::internal, "witness class must be nonzero");

  // x' = [b1^{n1}, b2^{n2}] with b_i^{n_i} ∈ K1, nontrivial in H1(K2'):
  // the auxiliary element that drives the derived chain
  {
    Word b1 = act.basis.gens[0], b2 = act.basis.gens[1];
    long n1 = 1, n2 = 1;
    while (!k1.contains(word_pow(b1, n1))) {
      ++n1;
      require(n1 <= k1.n, errc::internal, "power search exceeded the index");
    }
    while (!k1.contains(word_pow(b2, n2))) {
      ++n2;
      require(n2 <= k1.n, errc::internal, "power search exceeded the index");
    }
    cert.derived_aux = commutator(word_pow(b1, n1), word_pow(b2, n2));
    cert.aux_n1 = n1;
    cert.aux_n2 = n2;
  }
  return cert;
}

// Independent replay of a witness certificate from its raw words and tables.
// Uses only table tracing, rewriting, abelianization and the series tests.
inline void replay_witness(const WitnessCert& cert) {
  require(cert.k1.contains(cert.a), errc::replay_failure, "a must lie in K1");
  require(!cert.k2.contains(cert.a), errc::replay_failure, "a must avoid K2");
  require(cert.k1.contains(cert.b) && cert.k2.contains(cert.b), errc::replay_failure,
          "b must lie in K1 ∩ K2");
  require(reduce(cert.x_b) == commutator(cert.a, cert.b), errc::replay_failure,
          "x_b must be the commutator [a, b]");
  FreeSchreierBasis b2 = free_schreier(cert.k2);
  require(subgroup_class(cert.k2, b2, cert.x_b) == cert.hom_class, errc::replay_failure,
          "stored homology class does not replay");
  require(!is_zero_vec(cert.hom_class), errc::replay_failure, "homology class must be nonzero");
  FreeSchreierBasis b1 = free_schreier(cert.k1);
  require(is_zero_vec(subgroup_class(cert.k1, b1, cert.x_b)), errc::replay_failure,
          "x_b must lie in K1'");
  // no power of x_b lies in K2'
  for (long n = 1; n <= 5; ++n) {
    IVec cls = subgroup_class(cert.k2, b2, word_pow(cert.x_b, n));
    for (size_t i = 0; i < cls.size(); ++i)
      require(cls[i] == Int(n) * cert.hom_class[i], errc::replay_failure,
              "power class must scale linearly");
    require(!is_zero_vec(cls), errc::replay_failure, "a power of x_b fell into K2'");
  }
  for (const ChainEntry& e : cert.chain) {
    SeriesSpec spec{e.kind, e.level};
    Word w1 = rewrite_free(cert.k1, b1, e.y);
    Word w2 = rewrite_free(cert.k2, b2, e.y);
    require(in_series(w1, spec, b1.rank) == e.in_k1, errc::replay_failure,
            "chain verdict on the K1 side does not replay");
    require(in_series(w2, spec, b2.rank) == e.in_k2, errc::replay_failure,
            "chain verdict on the K2 side does not replay");
  }
}

// Lower-central chain y_2 = x_b, y_{ℓ+1} = [y_ℓ, xclass], verdicts at each
// level; the derived chain runs to D3 only.
inline void filtration_chain(WitnessCert& cert, int depth, const Word& xclass, int cmax = 6) {
  require(depth >= 2, errc::parse_error, "chain depth starts at 2");
  require(depth <= cmax, errc::depth_beyond_decidable,
          "chain depth exceeds the Magnus truncation");
  require(cert.k1.contains(xclass) && cert.k2.contains(xclass), errc::not_a_member,
          "xclass must lie in K1 ∩ K2");
  FreeSchreierBasis b1 = free_schreier(cert.k1);
  FreeSchreierBasis b2 = free_schreier(cert.k2);
  require(!is_zero_vec(subgroup_class(cert.k2, b2, xclass)), errc::internal,
          "xclass must have nonzero class in K2");
  cert.chain.clear();

  Word y = cert.x_b;
  for (int level = 2; level <= depth; ++level) {
    ChainEntry e;
    e.kind = SeriesKind::lower_central;
    e.level = level;
    e.y = y;
    SeriesSpec spec{SeriesKind::lower_central, level};
    e.in_k1 = in_series(rewrite_free(cert.k1, b1, y), spec, b1.rank);
    e.in_k2 = in_series(rewrite_free(cert.k2, b2, y), spec, b2.rank);
    cert.chain.push_back(e);
    y = commutator(y, xclass);
  }

  // derived: level 2 is the base certificate; level 3 via y = [x_b^N, x']
  {
    ChainEntry e;
    e.kind = SeriesKind::derived;
    e.level = 2;
    e.y = cert.x_b;
    e.in_k1 = in_series(rewrite_free(cert.k1, b1, cert.x_b), SeriesSpec{SeriesKind::derived, 2},
                        b1.rank);
    e.in_k2 = in_series(rewrite_free(cert.k2, b2, cert.x_b), SeriesSpec{SeriesKind::derived, 2},
                        b2.rank);
    cert.chain.push_back(e);
  }
  for (long n = 1; n <= 8; ++n) {
    Word y3 = commutator(word_pow(cert.x_b, n), cert.derived_aux);
    SeriesSpec d3{SeriesKind::derived, 3};
    SeriesVerdict v1 = in_series(rewrite_free(cert.k1, b1, y3), d3, b1.rank);
    SeriesVerdict v2 = in_series(rewrite_free(cert.k2, b2, y3), d3, b2.rank);
    if (v1 == SeriesVerdict::in && v2 == SeriesVerdict::not_in) {
      ChainEntry e;
      e.kind = SeriesKind::derived;
      e.level = 3;
      e.y = y3;
      e.aux_n = n;
      e.in_k1 = v1;
      e.in_k2 = v2;
      cert.chain.push_back(e);
      return;
    }
  }
  fail(errc::search_exhausted, "no power of x_b separated the third derived terms");
}

} // namespace modcomm
