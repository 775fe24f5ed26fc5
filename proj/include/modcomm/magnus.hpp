#pragma once

#include <map>
#include <vector>

#include "modcomm/word.hpp"

// Magnus expansion into truncated noncommutative integer power series:
// x_i ↦ 1 + X_i. The lowest degree of (expansion − 1) is the lower-central
// depth of the word.

namespace modcomm {

using Monomial = std::vector<int>;  // generator indices, 0-based

struct PowerSeries {
  int cmax;
  std::map<Monomial, Int> terms;

  explicit PowerSeries(int cmax_) : cmax(cmax_) {}

  static PowerSeries one(int cmax) {
    PowerSeries s(cmax);
    s.terms[Monomial{}] = 1;
    return s;
  }

  void add_term(const Monomial& m, const Int& coeff) {
    if ((int)m.size() > cmax || sgn(coeff) == 0) return;
    auto it = terms.find(m);
    if (it == terms.end()) {
      terms.emplace(m, coeff);
    } else {
      it->second += coeff;
      if (sgn(it->second) == 0) terms.erase(it);
    }
  }
};

inline PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
  PowerSeries r(a.cmax);
  for (const auto& [ma, ca] : a.terms) {
    for (const auto& [mb, cb] : b.terms) {
      if ((int)(ma.size() + mb.size()) > r.cmax) continue;
      Monomial m = ma;
      m.insert(m.end(), mb.begin(), mb.end());
      r.add_term(m, ca * cb);
    }
  }
  return r;
}

// x_i ↦ 1 + X_i,  x_i⁻¹ ↦ 1 − X_i + X_i² − ...
inline PowerSeries letter_expansion(int letter, int cmax) {
  int gen = std::abs(letter) - 1;
  PowerSeries s = PowerSeries::one(cmax);
  Monomial m;
  Int coeff = 1;
  for (int deg = 1; deg <= cmax; ++deg) {
    m.push_back(gen);
    if (letter < 0) coeff = -coeff;
    s.add_term(m, coeff);
    if (letter > 0) break;  // positive letters stop at degree 1
  }
  return s;
}

inline PowerSeries magnus_expansion(const Word& w, int cmax) {
  PowerSeries s = PowerSeries::one(cmax);
  for (int letter : w) s = s * letter_expansion(letter, cmax);
  return s;
}

struct LcsDepth {
  int depth = 0;        // meaningful when !more_than
  bool more_than = false;  // trivial up to degree cmax

  bool at_least(int c) const { return more_than || depth >= c; }
};

// Smallest c with w ∉ γ_{c+1}: the lowest degree of a nonzero term of
// (Magnus expansion − 1). MoreThan(cmax) when the expansion is 1 through cmax.
inline LcsDepth lcs_depth(const Word& w, int cmax) {
  Word r = reduce(w);
  require(!r.empty(), errc::empty_word, "lcs_depth of the trivial word");
  require(cmax >= 1, errc::internal, "lcs_depth needs cmax >= 1");
  PowerSeries s = magnus_expansion(r, cmax);
  int lowest = cmax + 1;
  for (const auto& [m, coeff] : s.terms) {
    if (m.empty()) continue;  // the constant term 1
    if ((int)m.size() < lowest) lowest = (int)m.size();
  }
  LcsDepth out;
  if (lowest > cmax) {
    out.more_than = true;
    out.depth = cmax;
  } else {
    out.depth = lowest;
  }
  return out;
}

} // namespace modcomm
