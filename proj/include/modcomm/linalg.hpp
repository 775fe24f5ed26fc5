#pragma once

#include <optional>
#include <vector>

#include "modcomm/rational.hpp"

// Exact linear algebra over Z and Q: fraction-free elimination, kernels,
// determinants, and a row-style Hermite normal form with transformation
// tracking for lattice membership.

namespace modcomm {

using IVec = std::vector<Int>;
using IMatrix = std::vector<IVec>;
using QVec = std::vector<Rat>;
using QMatrix = std::vector<QVec>;

inline IMatrix identity_matrix(int n) {
  IMatrix m(n, IVec(n, 0));
  for (int i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

inline IMatrix mat_mul(const IMatrix& a, const IMatrix& b) {
  int n = (int)a.size(), k = (int)b.size(), m = (int)b[0].size();
  IMatrix r(n, IVec(m, 0));
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < k; ++t) {
      if (sgn(a[i][t]) == 0) continue;
      for (int j = 0; j < m; ++j) r[i][j] += a[i][t] * b[t][j];
    }
  return r;
}

inline IVec mat_apply(const IMatrix& a, const IVec& v) {
  IVec r(a.size(), 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < v.size(); ++j) r[i] += a[i][j] * v[j];
  return r;
}

inline bool is_zero_vec(const IVec& v) {
  for (const auto& x : v)
    if (sgn(x) != 0) return false;
  return true;
}

// gcd-normalized, first nonzero entry positive
inline IVec primitive_vector(const QVec& v) {
  Int l = 1;
  for (const auto& q : v) l = lcm(l, rat_den(q));
  IVec w(v.size());
  Int g = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    Rat s = v[i] * Rat(l);
    w[i] = rat_num(s);
    g = gcd(g, w[i]);
  }
  if (g > 1)
    for (auto& x : w) x /= g;
  for (const auto& x : w) {
    if (sgn(x) == 0) continue;
    if (sgn(x) < 0)
      for (auto& y : w) y = -y;
    break;
  }
  return w;
}

struct Elimination {
  QMatrix rref;             // reduced row echelon form over Q
  std::vector<int> pivots;  // pivot column per pivot row
  int rank = 0;
};

// Deterministic Gauss-Jordan over Q: first nonzero entry in column order pivots.
inline Elimination rref(QMatrix m) {
  Elimination e;
  if (m.empty()) return e;
  int rows = (int)m.size(), cols = (int)m[0].size();
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int piv = -1;
    for (int i = r; i < rows; ++i)
      if (sgn(m[i][c]) != 0) { piv = i; break; }
    if (piv < 0) continue;
    std::swap(m[r], m[piv]);
    Rat inv = Rat(1) / m[r][c];
    for (int j = c; j < cols; ++j) m[r][j] *= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || sgn(m[i][c]) == 0) continue;
      Rat f = m[i][c];
      for (int j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    e.pivots.push_back(c);
    ++r;
  }
  e.rank = r;
  e.rref = std::move(m);
  return e;
}

inline QMatrix to_qmatrix(const IMatrix& m) {
  QMatrix q(m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    q[i].reserve(m[i].size());
    for (const auto& x : m[i]) q[i].emplace_back(x);
  }
  return q;
}

inline int rank(const IMatrix& m) { return m.empty() ? 0 : rref(to_qmatrix(m)).rank; }

// Primitive integer kernel basis of M x = 0, one vector per free column,
// in increasing free-column order.
inline std::vector<IVec> kernel_basis(const IMatrix& m, int cols) {
  std::vector<IVec> out;
  if (m.empty()) {
    for (int j = 0; j < cols; ++j) {
      IVec v(cols, 0);
      v[j] = 1;
      out.push_back(v);
    }
    return out;
  }
  Elimination e = rref(to_qmatrix(m));
  std::vector<int> pivot_of_col(cols, -1);
  for (int i = 0; i < (int)e.pivots.size(); ++i) pivot_of_col[e.pivots[i]] = i;
  for (int j = 0; j < cols; ++j) {
    if (pivot_of_col[j] >= 0) continue;
    QVec v(cols, Rat(0));
    v[j] = 1;
    for (int i = 0; i < (int)e.pivots.size(); ++i) v[e.pivots[i]] = -e.rref[i][j];
    out.push_back(primitive_vector(v));
  }
  return out;
}

// Bareiss fraction-free determinant.
inline Int det(IMatrix m) {
  int n = (int)m.size();
  if (n == 0) return 1;
  Int prev = 1;
  int sign_flips = 0;
  for (int k = 0; k < n - 1; ++k) {
    if (sgn(m[k][k]) == 0) {
      int piv = -1;
      for (int i = k + 1; i < n; ++i)
        if (sgn(m[i][k]) != 0) { piv = i; break; }
      if (piv < 0) return 0;
      std::swap(m[k], m[piv]);
      ++sign_flips;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) {
        m[i][j] = m[k][k] * m[i][j] - m[i][k] * m[k][j];
        mpz_divexact(m[i][j].get_mpz_t(), m[i][j].get_mpz_t(), prev.get_mpz_t());
      }
    prev = m[k][k];
  }
  Int d = m[n - 1][n - 1];
  return sign_flips % 2 ? Int(-d) : d;
}

// Unique rational solution of M x = b when rank is full; nullopt when the
// system is inconsistent, first solution under the rref convention otherwise.
inline std::optional<QVec> solve(const IMatrix& m, const IVec& b) {
  int rows = (int)m.size();
  int cols = rows ? (int)m[0].size() : 0;
  QMatrix aug(rows, QVec(cols + 1));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) aug[i][j] = Rat(m[i][j]);
    aug[i][cols] = Rat(b[i]);
  }
  Elimination e = rref(std::move(aug));
  for (int i = 0; i < (int)e.pivots.size(); ++i)
    if (e.pivots[i] == cols) return std::nullopt;  // pivot in augmented column
  QVec x(cols, Rat(0));
  for (int i = 0; i < (int)e.pivots.size(); ++i) x[e.pivots[i]] = e.rref[i][cols];
  return x;
}

struct Hnf {
  IMatrix h;       // row HNF, zero rows removed
  IMatrix u;       // h = u · rows(original)
  std::vector<int> pivots;
};

// Row-style Hermite normal form with transformation tracking.
inline Hnf hermite_normal_form(IMatrix rows) {
  int n = (int)rows.size();
  int cols = n ? (int)rows[0].size() : 0;
  IMatrix u = identity_matrix(n);
  int r = 0;
  std::vector<int> pivots;
  for (int c = 0; c < cols && r < n; ++c) {
    // euclidean reduction in column c among rows r..n-1
    while (true) {
      int piv = -1;
      for (int i = r; i < n; ++i)
        if (sgn(rows[i][c]) != 0) {
          if (piv < 0 || cmp(abs(rows[i][c]), abs(rows[piv][c])) < 0) piv = i;
        }
      if (piv < 0) break;
      std::swap(rows[r], rows[piv]);
      std::swap(u[r], u[piv]);
      if (sgn(rows[r][c]) < 0) {
        for (auto& x : rows[r]) x = -x;
        for (auto& x : u[r]) x = -x;
      }
      bool again = false;
      for (int i = r + 1; i < n; ++i) {
        if (sgn(rows[i][c]) == 0) continue;
        Int q = div_floor(rows[i][c], rows[r][c]);
        for (int j = 0; j < cols; ++j) rows[i][j] -= q * rows[r][j];
        for (int j = 0; j < n; ++j) u[i][j] -= q * u[r][j];
        if (sgn(rows[i][c]) != 0) again = true;
      }
      if (!again) break;
    }
    if (sgn(rows[r][c]) == 0) continue;
    // reduce entries above the pivot into [0, pivot)
    for (int i = 0; i < r; ++i) {
      Int q = div_floor(rows[i][c], rows[r][c]);
      if (sgn(q) == 0) continue;
      for (int j = 0; j < cols; ++j) rows[i][j] -= q * rows[r][j];
      for (int j = 0; j < n; ++j) u[i][j] -= q * u[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  Hnf out;
  out.h.assign(rows.begin(), rows.begin() + r);
  out.u.assign(u.begin(), u.begin() + r);
  out.pivots = pivots;
  return out;
}

// Is v in the Z-row-span? If so returns coefficients w.r.t. the original rows.
inline std::optional<IVec> lattice_coordinates(const Hnf& hnf, IVec v, int ngens) {
  IVec coeff_h(hnf.h.size(), 0);
  for (size_t i = 0; i < hnf.h.size(); ++i) {
    int p = hnf.pivots[i];
    if (sgn(v[p]) == 0) continue;
    if (v[p] % hnf.h[i][p] != 0) return std::nullopt;
    Int q = v[p] / hnf.h[i][p];
    coeff_h[i] = q;
    for (size_t j = 0; j < v.size(); ++j) v[j] -= q * hnf.h[i][j];
  }
  if (!is_zero_vec(v)) return std::nullopt;
  IVec coeffs(ngens, 0);
  for (size_t i = 0; i < hnf.h.size(); ++i) {
    if (sgn(coeff_h[i]) == 0) continue;
    for (int j = 0; j < ngens; ++j) coeffs[j] += coeff_h[i] * hnf.u[i][j];
  }
  return coeffs;
}

} // namespace modcomm
