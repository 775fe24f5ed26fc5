#pragma once

#include <map>
#include <string>
#include <vector>

#include "modcomm/magnus.hpp"
#include "modcomm/word.hpp"

// Free differential calculus with coefficients abelianized to Z[Z^r], and the
// effective series-membership tests: Magnus for the lower central series,
// abelianization and Fox derivatives for the derived series through D3.

namespace modcomm {

using ExpVec = std::vector<long>;  // Z^r exponent vector of a monomial

struct GroupRingElem {
  int rank = 0;
  std::map<ExpVec, Int> terms;  // no zero coefficients stored

  explicit GroupRingElem(int rank_) : rank(rank_) {}

  void add_term(const ExpVec& m, const Int& coeff) {
    if (sgn(coeff) == 0) return;
    auto it = terms.find(m);
    if (it == terms.end()) {
      terms.emplace(m, coeff);
    } else {
      it->second += coeff;
      if (sgn(it->second) == 0) terms.erase(it);
    }
  }

  bool is_zero() const { return terms.empty(); }

  bool operator==(const GroupRingElem& o) const { return rank == o.rank && terms == o.terms; }
};

inline GroupRingElem operator+(const GroupRingElem& a, const GroupRingElem& b) {
  GroupRingElem r = a;
  for (const auto& [m, c] : b.terms) r.add_term(m, c);
  return r;
}

inline GroupRingElem operator-(const GroupRingElem& a, const GroupRingElem& b) {
  GroupRingElem r = a;
  for (const auto& [m, c] : b.terms) r.add_term(m, Int(-c));
  return r;
}

// multiply by the monomial ab(u)
inline GroupRingElem shift(const GroupRingElem& a, const ExpVec& by) {
  GroupRingElem r(a.rank);
  for (const auto& [m, c] : a.terms) {
    ExpVec s = m;
    for (int i = 0; i < a.rank; ++i) s[i] += by[i];
    r.add_term(s, c);
  }
  return r;
}

// ∂w/∂x_i with the rules ∂(uv) = ∂u + ab(u)·∂v, ∂x_i/∂x_i = 1,
// ∂x_j/∂x_i = 0, ∂x_i⁻¹/∂x_i = −ab(x_i)⁻¹.
inline GroupRingElem fox_derivative(const Word& w, int gen, int rank) {
  require(gen >= 1 && gen <= rank, errc::internal, "fox generator index out of range");
  GroupRingElem out(rank);
  ExpVec prefix(rank, 0);
  for (int letter : w) {
    int i = std::abs(letter) - 1;
    require(i < rank, errc::internal, "letter outside basis");
    if (letter == gen) {
      out.add_term(prefix, 1);
    } else if (letter == -gen) {
      ExpVec m = prefix;
      m[i] -= 1;
      out.add_term(m, -1);
    }
    prefix[i] += letter > 0 ? 1 : -1;
  }
  return out;
}

enum class SeriesKind { lower_central, derived };

struct SeriesSpec {
  SeriesKind kind = SeriesKind::lower_central;
  int index = 2;  // proper terms only
};

enum class SeriesVerdict { in, not_in, undecidable };

inline const char* to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::in: return "In";
    case SeriesVerdict::not_in: return "NotIn";
    case SeriesVerdict::undecidable: return "Undecidable";
  }
  return "";
}

inline std::string to_string(const SeriesSpec& s) {
  return (s.kind == SeriesKind::lower_central ? std::string("lcs:") : std::string("derived:")) +
         std::to_string(s.index);
}

// Membership in γ_index (Magnus) or D_index (abelianization / Fox metabelian
// test); D_i with i ≥ 4 has no effective test here and reports Undecidable.
inline SeriesVerdict in_series(const Word& w, const SeriesSpec& spec, int rank) {
  require(spec.index >= 2, errc::internal, "series membership asks for a proper term");
  Word r = reduce(w);
  if (r.empty()) return SeriesVerdict::in;
  if (spec.kind == SeriesKind::lower_central) {
    LcsDepth d = lcs_depth(r, spec.index - 1);
    return d.more_than ? SeriesVerdict::in : SeriesVerdict::not_in;
  }
  if (spec.index == 2)
    return is_zero_vec(abelianize(r, rank)) ? SeriesVerdict::in : SeriesVerdict::not_in;
  if (spec.index == 3) {
    if (!is_zero_vec(abelianize(r, rank))) return SeriesVerdict::not_in;
    for (int i = 1; i <= rank; ++i)
      if (!fox_derivative(r, i, rank).is_zero()) return SeriesVerdict::not_in;
    return SeriesVerdict::in;
  }
  return SeriesVerdict::undecidable;
}

} // namespace modcomm
