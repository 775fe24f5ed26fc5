#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modcomm/errors.hpp"

// Exact base arithmetic: arbitrary-precision integers and canonical
// rationals (gcd-reduced, positive denominator), plus the little number
// theory the square-root bookkeeping needs.

namespace modcomm {

using Int = mpz_class;
using Rat = mpq_class;

inline int sgn(const Int& x) { return mpz_sgn(x.get_mpz_t()); }
inline int sgn(const Rat& x) { return mpq_sgn(x.get_mpq_t()); }

inline Rat make_rat(const Int& num, const Int& den) {
  require(den != 0, errc::division_by_zero, "rational with zero denominator");
  Rat q(num, den);
  q.canonicalize();
  return q;
}

inline Int rat_num(const Rat& q) { return Int(q.get_num()); }
inline Int rat_den(const Rat& q) { return Int(q.get_den()); }

inline bool is_integer(const Rat& q) { return q.get_den() == 1; }

inline bool is_probable_prime(const Int& n) {
  return mpz_probab_prime_p(n.get_mpz_t(), 30) != 0;
}

namespace detail {

inline Int pollard_rho(const Int& n) {
  // Brent's variant; n odd composite, no small factors left.
  Int c = 1;
  while (true) {
    Int x = 2, y = 2, d = 1, diff;
    while (d == 1) {
      x = (x * x + c) % n;
      y = (y * y + c) % n;
      y = (y * y + c) % n;
      diff = x - y;
      if (diff < 0) diff = -diff;
      if (diff == 0) break;
      mpz_gcd(d.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
    }
    if (d != 0 && d != 1 && d != n) return d;
    c += 1;
  }
}

inline void factor_into(Int n, std::vector<std::pair<Int, int>>& out) {
  if (n <= 1) return;
  if (is_probable_prime(n)) {
    for (auto& [p, e] : out)
      if (p == n) { ++e; return; }
    out.emplace_back(n, 1);
    return;
  }
  Int d = pollard_rho(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

} // namespace detail

// Prime factorization, suited to the entry sizes this tool sees.
inline std::vector<std::pair<Int, int>> factorize(Int n) {
  require(n >= 1, errc::internal, "factorize expects a positive integer");
  std::vector<std::pair<Int, int>> out;
  for (Int p : {Int(2), Int(3), Int(5)}) {
    int e = 0;
    while (n % p == 0) { n /= p; ++e; }
    if (e) out.emplace_back(p, e);
  }
  Int p = 7;
  while (p * p <= n && p < 100000) {
    int e = 0;
    while (n % p == 0) { n /= p; ++e; }
    if (e) out.emplace_back(p, e);
    p += 2;
  }
  detail::factor_into(n, out);
  std::sort(out.begin(), out.end());
  return out;
}

// n = square * squarefree; returns {squarefree part, sqrt of the square part}.
inline std::pair<Int, Int> squarefree_split(const Int& n) {
  require(n >= 1, errc::internal, "squarefree_split expects n >= 1");
  Int sf = 1, rt = 1;
  for (const auto& [p, e] : factorize(n)) {
    if (e % 2) sf *= p;
    for (int i = 0; i < e / 2; ++i) rt *= p;
  }
  return {sf, rt};
}

inline bool is_squarefree(const Int& n) { return n >= 1 && squarefree_split(n).first == n; }

// Unique positive squarefree integer representing the coset q·(Q*)^2.
// q = a/b ~ a·b mod squares.
inline Int squarefree_coset_rep(const Rat& q) {
  require(sgn(q) > 0, errc::internal, "coset representative of a non-positive rational");
  return squarefree_split(rat_num(q) * rat_den(q)).first;
}

inline std::optional<Int> exact_sqrt(const Int& n) {
  if (n < 0) return std::nullopt;
  if (mpz_perfect_square_p(n.get_mpz_t()) == 0) return std::nullopt;
  Int r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

inline std::optional<Rat> exact_sqrt(const Rat& q) {
  if (sgn(q) < 0) return std::nullopt;
  auto n = exact_sqrt(rat_num(q));
  auto d = exact_sqrt(rat_den(q));
  if (!n || !d) return std::nullopt;
  return make_rat(*n, *d);
}

inline bool is_rational_square(const Rat& q) { return exact_sqrt(q).has_value(); }

inline Int gcd(const Int& a, const Int& b) {
  Int g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline Int lcm(const Int& a, const Int& b) {
  Int l;
  mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return l;
}

inline Int mod_floor(const Int& a, const Int& m) {
  Int r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline Int div_floor(const Int& a, const Int& m) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return q;
}

} // namespace modcomm
