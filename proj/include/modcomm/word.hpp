#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "modcomm/linalg.hpp"

// Words over a free basis: nonzero signed generator indices, 1-based,
// kept freely reduced.

namespace modcomm {

using Word = std::vector<int>;

inline Word reduce(const Word& w) {
  Word out;
  for (int x : w) {
    require(x != 0, errc::internal, "zero letter in word");
    if (!out.empty() && out.back() == -x)
      out.pop_back();
    else
      out.push_back(x);
  }
  return out;
}

inline Word inverse(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(-*it);
  return out;
}

inline Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return reduce(out);
}

// [u, v] = u·v·u⁻¹·v⁻¹
inline Word commutator(const Word& u, const Word& v) {
  Word out = u;
  out.insert(out.end(), v.begin(), v.end());
  Word ui = inverse(u), vi = inverse(v);
  out.insert(out.end(), ui.begin(), ui.end());
  out.insert(out.end(), vi.begin(), vi.end());
  return reduce(out);
}

inline Word word_pow(const Word& w, long n) {
  Word base = n < 0 ? inverse(w) : w;
  long k = std::labs(n);
  Word out;
  for (long i = 0; i < k; ++i) out.insert(out.end(), base.begin(), base.end());
  return reduce(out);
}

inline IVec abelianize(const Word& w, int rank) {
  IVec v(rank, 0);
  for (int x : w) {
    int i = std::abs(x) - 1;
    require(i < rank, errc::internal, "letter outside basis");
    v[i] += x > 0 ? 1 : -1;
  }
  return v;
}

inline std::string to_string(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(w[i]);
  }
  return s;
}

// Reduced words in the deterministic order: by length, then lexicographically
// with letters ordered x1 < x1⁻¹ < x2 < x2⁻¹ < ...
class WordEnumerator {
 public:
  explicit WordEnumerator(int rank) : rank_(rank) {}

  Word next() {
    while (true) {
      if (state_.empty()) {
        ++length_;
        state_.assign(length_, 0);
        if (!roll(0)) continue;
        return current();
      }
      int pos = length_ - 1;
      while (pos >= 0 && !advance(pos)) --pos;
      if (pos < 0) {
        state_.clear();
        continue;
      }
      bool ok = true;
      for (int p = pos + 1; p < length_; ++p)
        if (!roll(p)) { ok = false; break; }
      if (ok) return current();
    }
  }

 private:
  // letters in enumeration order: index 0..2r-1 -> +1,-1,+2,-2,...
  int letter(int idx) const { return (idx % 2 == 0) ? idx / 2 + 1 : -(idx / 2 + 1); }

  bool allowed(int pos, int idx) const {
    if (pos == 0) return true;
    return letter(idx) != -letter_at(pos - 1);
  }

  int letter_at(int pos) const { return letter(state_[pos]); }

  bool roll(int pos) {
    for (int idx = 0; idx < 2 * rank_; ++idx)
      if (allowed(pos, idx)) { state_[pos] = idx; return true; }
    return false;
  }

  bool advance(int pos) {
    for (int idx = state_[pos] + 1; idx < 2 * rank_; ++idx)
      if (allowed(pos, idx)) { state_[pos] = idx; return true; }
    return false;
  }

  Word current() const {
    Word w(length_);
    for (int i = 0; i < length_; ++i) w[i] = letter_at(i);
    return w;
  }

  int rank_;
  int length_ = 0;
  std::vector<int> state_;
};

} // namespace modcomm
