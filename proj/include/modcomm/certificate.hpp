#pragma once

#include <ctime>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "modcomm/chevweil.hpp"
#include "modcomm/commens.hpp"
#include "modcomm/galois.hpp"
#include "modcomm/sha256.hpp"
#include "modcomm/textio.hpp"
#include "modcomm/witness.hpp"

// Certificate files: a versioned text record with a command echo, embedded
// inputs, a payload, and a replay section whose every line is an identity the
// verifier re-checks.  The hash covers every line except the timestamp; two
// runs of the same command differ at most in that line.
//
// Integrity design: a value that matters appears once — either declared by
// name in [inputs] or as a payload key — and every occurrence inside a check
// is tied back to it by an exact recomputation, so a certificate with any
// single integer changed (and its hash repaired) still fails replay.
//
// The verifier never runs the constructions it certifies (no pipeline, no
// witness search, no intertwiner solve): it rebuilds tables, rewrites words,
// abelianizes, expands series, and redoes exact matrix arithmetic.

namespace modcomm {

inline const char* cert_magic() { return "MODCOMM-CERT v1"; }

class CertBuilder {
 public:
  explicit CertBuilder(const std::string& command) : command_(command) {
    lines_.push_back(cert_magic());
    lines_.push_back("command: " + command);
    lines_.push_back("timestamp: " + std::to_string(std::time(nullptr)));
  }

  void section(const std::string& name) {
    lines_.push_back("[" + name + "]");
    // the command echo is always tied into the replay section
    if (name == "replay") lines_.push_back("check command " + command_);
  }
  void line(const std::string& text) { lines_.push_back(text); }
  void kv(const std::string& key, const std::string& value) {
    lines_.push_back(key + ": " + value);
  }
  void check(const std::string& text) { lines_.push_back("check " + text); }

  std::string finish() const {
    Sha256 h;
    std::string out;
    for (const auto& l : lines_) {
      out += l;
      out += "\n";
      if (l.rfind("timestamp:", 0) != 0) h.update(l + "\n");
    }
    out += "sha256: " + h.hex_digest() + "\n";
    return out;
  }

 private:
  std::string command_;
  std::vector<std::string> lines_;
};

struct ParsedCert {
  std::string command;
  std::map<std::string, std::string> scalars;
  std::vector<std::pair<std::string, std::string>> context;
  std::vector<std::string> checks;
  std::string hash;

  const std::string& payload(const std::string& key) const {
    auto it = scalars.find(key);
    require(it != scalars.end(), errc::replay_failure, "missing payload field: " + key);
    return it->second;
  }
};

inline ParsedCert parse_certificate(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  require(!lines.empty() && lines[0] == cert_magic(), errc::parse_error,
          "missing certificate magic line");
  require(lines.size() >= 2 && lines.back().rfind("sha256: ", 0) == 0, errc::hash_mismatch,
          "missing trailing hash");
  ParsedCert cert;
  cert.hash = lines.back().substr(8);
  Sha256 h;
  for (size_t i = 0; i + 1 < lines.size(); ++i)
    if (lines[i].rfind("timestamp:", 0) != 0) h.update(lines[i] + "\n");
  require(h.hex_digest() == cert.hash, errc::hash_mismatch,
          "certificate content does not match its hash");

  for (size_t i = 1; i + 1 < lines.size(); ++i) {
    const std::string& l = lines[i];
    if (l.empty() || l[0] == '[') continue;
    if (l.rfind("check ", 0) == 0) {
      cert.checks.push_back(l.substr(6));
      continue;
    }
    if (l.rfind("declare ", 0) == 0) {
      std::string value = l.substr(8);
      auto sp = value.find(' ');
      require(sp != std::string::npos, errc::parse_error, "malformed declaration: " + l);
      cert.context.emplace_back(value.substr(0, sp), value.substr(sp + 1));
      continue;
    }
    auto colon = l.find(": ");
    if (colon == std::string::npos) continue;
    std::string key = l.substr(0, colon);
    std::string value = l.substr(colon + 2);
    if (key == "command")
      cert.command = value;
    else
      cert.scalars[key] = value;
  }
  return cert;
}

struct ReplayContext {
  std::map<std::string, CosetTable> mod_tables;
  std::map<std::string, SchreierBasis> mod_bases;
  std::map<std::string, FreeCosetTable> free_tables;
  std::map<std::string, FreeSchreierBasis> free_bases;
  std::map<std::string, ProjMat> matrices;
  std::map<std::string, QMat2> qmats;
  std::map<std::string, Word> words;

  const CosetTable& mod(const std::string& name) const {
    auto it = mod_tables.find(name);
    require(it != mod_tables.end(), errc::replay_failure, "unknown table: " + name);
    return it->second;
  }
  const SchreierBasis& mod_basis(const std::string& name) const {
    auto it = mod_bases.find(name);
    require(it != mod_bases.end(), errc::replay_failure, "table has no basis: " + name);
    return it->second;
  }
  const FreeCosetTable& free_tbl(const std::string& name) const {
    auto it = free_tables.find(name);
    require(it != free_tables.end(), errc::replay_failure, "unknown free table: " + name);
    return it->second;
  }
  const FreeSchreierBasis& free_basis(const std::string& name) const {
    auto it = free_bases.find(name);
    require(it != free_bases.end(), errc::replay_failure, "free table has no basis: " + name);
    return it->second;
  }
  const ProjMat& matrix(const std::string& name) const {
    auto it = matrices.find(name);
    require(it != matrices.end(), errc::replay_failure, "unknown matrix: " + name);
    return it->second;
  }
  const QMat2& qmat(const std::string& name) const {
    auto it = qmats.find(name);
    require(it != qmats.end(), errc::replay_failure, "unknown rational matrix: " + name);
    return it->second;
  }
  const Word& word(const std::string& name) const {
    auto it = words.find(name);
    require(it != words.end(), errc::replay_failure, "unknown word: " + name);
    return it->second;
  }

  // decomposition of a declared matrix, used to rebuild conjugated data
  SqrtQDecomp decomp_of(const std::string& name) const {
    auto d = sqrtq_membership(matrix(name));
    require(d.has_value(), errc::replay_failure, name + " is not in PSL2(Q)sqrtQ");
    return *d;
  }
};

inline void declare_in_context(ReplayContext& ctx, const std::string& kind,
                               const std::string& body) {
  Cursor c(body);
  std::string name = c.token();
  std::string rest = c.rest();
  if (kind == "gamma") {
    Int k = parse_rat(rest).get_num();
    require(k >= 1 && k.fits_sint_p(), errc::parse_error, "bad congruence level");
    CosetTable t = principal_congruence(k.get_si());
    if (t.torsion_free()) ctx.mod_bases[name] = schreier_basis(t);
    ctx.mod_tables[name] = std::move(t);
  } else if (kind == "modtable") {
    CosetTable t = parse_modtable(rest);
    if (t.torsion_free()) ctx.mod_bases[name] = schreier_basis(t);
    ctx.mod_tables[name] = std::move(t);
  } else if (kind == "freetable") {
    FreeCosetTable t = parse_freetable(rest);
    ctx.free_bases[name] = free_schreier(t);
    ctx.free_tables[name] = std::move(t);
  } else if (kind == "matrix") {
    ctx.matrices.emplace(name, parse_projmat(rest));
  } else if (kind == "qmat") {
    ctx.qmats.emplace(name, parse_qmat(rest));
  } else if (kind == "word") {
    Word w = parse_word(rest == "e" ? "e" : rest);
    require(reduce(w) == w, errc::parse_error, "declared word is not reduced");
    ctx.words.emplace(name, std::move(w));
  } else {
    fail(errc::parse_error, "unknown declaration kind: " + kind);
  }
}

namespace replay {

inline void check_fail(const std::string& check, const std::string& why) {
  fail(errc::replay_failure, "check `" + check + "`: " + why);
}

// words in checks are referenced as @name; short literals stay inline
inline Word word_arg(const ReplayContext& ctx, const std::string& token) {
  if (!token.empty() && token[0] == '@') return ctx.word(token.substr(1));
  return parse_word(token);
}

inline long small_int(const std::string& token) {
  Int v = parse_rat(token).get_num();
  require(v.fits_slong_p(), errc::parse_error, "integer out of range: " + token);
  return v.get_si();
}

inline void run_check(const ReplayContext& ctx, const ParsedCert& cert,
                      const std::string& text) {
  Cursor c(text);
  std::string kind = c.token();

  if (kind == "payload") {
    // ties a payload line to a copy inside the hashed replay section
    std::string key = c.token();
    if (cert.payload(key) != c.rest()) check_fail(text, "payload line disagrees");
    return;
  }
  if (kind == "command") {
    if (c.rest() != cert.command) check_fail(text, "command echo disagrees");
    return;
  }

  if (kind == "member" || kind == "not-member") {
    const CosetTable& t = ctx.mod(c.token());
    IntMat m = parse_intmat(c.token());
    if (t.contains(m) != (kind == "member")) check_fail(text, "membership disagrees");
  } else if (kind == "member-q") {
    const CosetTable& t = ctx.mod(c.token());
    auto m = as_psl2z(ctx.qmat(c.token()));
    if (!m || !t.contains(*m)) check_fail(text, "matrix is not a member");
  } else if (kind == "free-member" || kind == "free-not-member") {
    const FreeCosetTable& t = ctx.free_tbl(c.token());
    Word w = word_arg(ctx, c.token());
    if (t.contains(w) != (kind == "free-member")) check_fail(text, "membership disagrees");
  } else if (kind == "commutator") {
    Word w = word_arg(ctx, c.token());
    Word u = word_arg(ctx, c.token());
    Word v = word_arg(ctx, c.token());
    if (reduce(w) != commutator(u, v)) check_fail(text, "not the commutator");
  } else if (kind == "pow-commutator") {
    // w = [u^n, v]
    Word w = word_arg(ctx, c.token());
    Word u = word_arg(ctx, c.token());
    long n = small_int(c.token());
    Word v = word_arg(ctx, c.token());
    if (reduce(w) != commutator(word_pow(u, n), v)) check_fail(text, "not the power commutator");
  } else if (kind == "basis-commutator") {
    // w = [g1^{n1}, g2^{n2}] over the subgroup's first two Schreier generators
    std::string name = c.token();
    const FreeSchreierBasis& basis = ctx.free_basis(name);
    Word w = word_arg(ctx, c.token());
    long n1 = small_int(c.token()), n2 = small_int(c.token());
    require(basis.rank >= 2, errc::replay_failure, "basis too small");
    Word expect = commutator(word_pow(basis.gens[0], n1), word_pow(basis.gens[1], n2));
    if (reduce(w) != expect) check_fail(text, "auxiliary commutator disagrees");
  } else if (kind == "free-class") {
    std::string name = c.token();
    Word w = word_arg(ctx, c.token());
    c.expect('=');
    IVec expect = parse_ivec(c.token());
    if (subgroup_class(ctx.free_tbl(name), ctx.free_basis(name), w) != expect)
      check_fail(text, "subgroup homology class disagrees");
  } else if (kind == "class-equals-payload") {
    // class over the named table equals the vector stored under a payload key
    std::string name = c.token();
    Word w = word_arg(ctx, c.token());
    std::string key = c.token();
    IVec expect = parse_ivec(cert.payload(key));
    IVec cls = subgroup_class(ctx.free_tbl(name), ctx.free_basis(name), w);
    if (cls != expect) check_fail(text, "class does not match the payload");
    if (is_zero_vec(cls)) check_fail(text, "class is zero");
  } else if (kind == "class-multiple") {
    // [w] = n·z with n and z taken from the payload, z nonzero, n >= 1
    std::string name = c.token();
    Word w = word_arg(ctx, c.token());
    Int n(cert.payload("n"));
    IVec z = parse_ivec(cert.payload("z"));
    require(n >= 1, errc::replay_failure, "multiplier must be positive");
    if (is_zero_vec(z)) check_fail(text, "moved class is zero");
    IVec expect(z.size());
    for (size_t i = 0; i < z.size(); ++i) expect[i] = n * z[i];
    if (subgroup_class(ctx.free_tbl(name), ctx.free_basis(name), w) != expect)
      check_fail(text, "class is not the stated multiple");
  } else if (kind == "power-classes") {
    // x^N has class N·hom for 1 <= N <= 5, never zero (the bound is fixed)
    std::string name = c.token();
    Word w = word_arg(ctx, c.token());
    IVec hom = parse_ivec(cert.payload("hom-class"));
    for (long n = 1; n <= 5; ++n) {
      IVec cls = subgroup_class(ctx.free_tbl(name), ctx.free_basis(name), word_pow(w, n));
      if (is_zero_vec(cls)) check_fail(text, "a power class vanished");
      for (size_t i = 0; i < cls.size(); ++i)
        if (cls[i] != Int(n) * hom[i]) check_fail(text, "power classes do not scale");
    }
  } else if (kind == "series") {
    std::string name = c.token();
    const FreeCosetTable& t = ctx.free_tbl(name);
    const FreeSchreierBasis& basis = ctx.free_basis(name);
    Word w = word_arg(ctx, c.token());
    SeriesSpec spec = parse_series(c.token());
    std::string want = c.token();
    SeriesVerdict v = in_series(rewrite_free(t, basis, w), spec, basis.rank);
    if (std::string(to_string(v)) != want) check_fail(text, "series verdict disagrees");
  } else if (kind == "square") {
    const ProjMat& g = ctx.matrix(c.token());
    const ProjMat& g2 = ctx.matrix(c.token());
    if (!(g * g == g2)) check_fail(text, "square disagrees");
  } else if (kind == "sqrtq") {
    const ProjMat& g = ctx.matrix(c.token());
    std::string qtok = c.token();
    require(qtok.rfind("q=", 0) == 0, errc::parse_error, "expected q= in: " + text);
    Int q = parse_rat(qtok.substr(2)).get_num();
    std::string btok = c.token();
    require(btok.rfind("B=", 0) == 0, errc::parse_error, "expected B= in: " + text);
    QMat2 b = parse_qmat(btok.substr(2));
    auto d = sqrtq_membership(g);
    if (!d) check_fail(text, "matrix is not in PSL2(Q)sqrtQ");
    if (d->q != q || !(d->mat == b)) check_fail(text, "decomposition disagrees");
  } else if (kind == "sqrtq-none") {
    if (sqrtq_membership(ctx.matrix(c.token()))) check_fail(text, "matrix is in PSL2(Q)sqrtQ");
  } else if (kind == "sqrtq-not-integral") {
    auto d = sqrtq_membership(ctx.matrix(c.token()));
    if (d && d->q == 1 && is_integral(d->mat)) check_fail(text, "matrix is integral");
  } else if (kind == "prod-irrational") {
    // (i, j) must be the first entry pair with an irrational product
    const ProjMat& g = ctx.matrix(c.token());
    long i = small_int(c.token()), j = small_int(c.token());
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        if ((g.e[a] * g.e[b]).is_rational()) continue;
        if (a != i || b != j) check_fail(text, "not the first irrational pair");
        return;
      }
    check_fail(text, "every pairwise product is rational");
  } else if (kind == "span") {
    // the four words must be exactly the deterministic greedy span
    std::string name = c.token();
    const SchreierBasis& basis = ctx.mod_basis(name);
    QuaternionSpan span = quaternion_span(basis);
    for (int t = 0; t < 4; ++t)
      if (word_arg(ctx, c.token()) != span.words[t]) check_fail(text, "span words disagree");
  } else if (kind == "conj-irrational") {
    // the named span word is the first whose conjugate leaves the rationals
    std::string name = c.token();
    const SchreierBasis& basis = ctx.mod_basis(name);
    const ProjMat& g = ctx.matrix(c.token());
    Word w = word_arg(ctx, c.token());
    QuaternionSpan span = quaternion_span(basis);
    for (const Word& cand : span.words) {
      ProjMat m = promote_mat(ProjMat(evaluate_basis_word(basis, cand)), g.field);
      ProjMat conj = g * m * inverse(g);
      if (conj.all_rational()) continue;
      if (cand != w) check_fail(text, "not the first irrational conjugate");
      return;
    }
    check_fail(text, "every span conjugate is rational");
  } else if (kind == "pseudo-delta") {
    // y = B⁻¹·x_j·B moves [x_gen^N]: recompute the commutator class exactly
    std::string name = c.token();
    const CosetTable& t = ctx.mod(name);
    const SchreierBasis& basis = ctx.mod_basis(name);
    SqrtQDecomp w = ctx.decomp_of(c.token());
    long j = small_int(c.token());
    long gen = small_int(c.token());
    long n = small_int(c.token());
    c.expect('=');
    IVec expect = parse_ivec(c.token());
    require(j >= 1 && j <= basis.rank && gen >= 1 && gen <= basis.rank && n >= 1,
            errc::replay_failure, "pseudo-delta indices out of range");
    QMat2 y = inverse(w.mat) * QMat2(basis.gens[j - 1].mat) * w.mat;
    IntMat x = basis.gens[gen - 1].mat;
    IntMat xn = pow(x, Int(n));
    auto in_conj = as_psl2z(w.mat * QMat2(xn) * inverse(w.mat));
    if (!in_conj || !t.contains(*in_conj)) check_fail(text, "x^N misses the conjugate subgroup");
    auto moved = as_psl2z(inverse(y) * QMat2(xn) * y);
    if (!moved || !t.contains(*moved)) check_fail(text, "(x^N)^y misses the subgroup");
    IVec a = abelianize(rewrite_member(t, basis, *moved), basis.rank);
    IVec b = abelianize(rewrite_member(t, basis, xn), basis.rank);
    for (size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    if (a != expect) check_fail(text, "pseudo-action delta disagrees");
    if (is_zero_vec(a)) check_fail(text, "delta is zero: no obstruction");
  } else if (kind == "cusp-power") {
    // gn = γ^N with γ the minimal member parabolic at the stated cusp
    std::string name = c.token();
    const CosetTable& t = ctx.mod(name);
    std::string at = c.token();
    long n = small_int(c.token());
    const QMat2& gn_q = ctx.qmat(c.token());
    require(n >= 1, errc::replay_failure, "cusp power must be positive");
    IntMat gamma = at == "inf" ? pow(mat_T(), Int(smallest_power_in(t, mat_T())))
                               : pow(IntMat(1, 0, 1, 1),
                                     Int(smallest_power_in(t, IntMat(1, 0, 1, 1))));
    auto gn = as_psl2z(gn_q);
    if (!gn || !(pow(gamma, Int(n)) == *gn)) check_fail(text, "gamma power disagrees");
  } else if (kind == "yh-product") {
    // yh = (B⁻¹·x_j·B)·h exactly
    std::string name = c.token();
    const SchreierBasis& basis = ctx.mod_basis(name);
    SqrtQDecomp w = ctx.decomp_of(c.token());
    long j = small_int(c.token());
    const QMat2& h = ctx.qmat(c.token());
    const QMat2& yh = ctx.qmat(c.token());
    require(j >= 1 && j <= basis.rank, errc::replay_failure, "generator index out of range");
    QMat2 y = inverse(w.mat) * QMat2(basis.gens[j - 1].mat) * w.mat;
    if (!(y * h == yh)) check_fail(text, "yh is not the stated product");
  } else if (kind == "parabolic-moved") {
    // (γ^N)^{yh} stays in H but lands in a different homology class
    std::string name = c.token();
    const CosetTable& t = ctx.mod(name);
    const SchreierBasis& basis = ctx.mod_basis(name);
    auto gn = as_psl2z(ctx.qmat(c.token()));
    const QMat2& yh = ctx.qmat(c.token());
    if (!gn || !t.contains(*gn)) check_fail(text, "gamma power is not a member");
    if (classify_by_trace(*gn) != TraceClass::parabolic)
      check_fail(text, "gamma power is not parabolic");
    auto conj = as_psl2z(inverse(yh) * QMat2(*gn) * yh);
    if (!conj || !t.contains(*conj)) check_fail(text, "conjugate left the subgroup");
    IVec c1 = abelianize(rewrite_member(t, basis, *gn), basis.rank);
    IVec c2 = abelianize(rewrite_member(t, basis, *conj), basis.rank);
    if (c1 == c2) check_fail(text, "homology classes agree: no obstruction");
  } else if (kind == "conj-gen-outside") {
    // the stated generator is the first whose conjugate leaves Γ(k)
    std::string name = c.token();
    const SchreierBasis& basis = ctx.mod_basis(name);
    SqrtQDecomp w = ctx.decomp_of(c.token());
    long gen = small_int(c.token());
    Int k(cert.payload("level"));
    require(gen >= 1 && gen <= basis.rank, errc::replay_failure, "generator index out of range");
    for (long i = 1; i <= basis.rank; ++i) {
      QMat2 conj = inverse(w.mat) * QMat2(basis.gens[i - 1].mat) * w.mat;
      auto m = as_psl2z(conj);
      bool in = m.has_value() && congruent_identity_mod(*m, k);
      if (in) continue;
      if (i != gen) check_fail(text, "not the first generator outside");
      return;
    }
    check_fail(text, "every conjugated generator stays inside");
  } else if (kind == "conj-gens-inside") {
    // every conjugated generator lies in Γ(k), k from the payload
    std::string name = c.token();
    const SchreierBasis& basis = ctx.mod_basis(name);
    SqrtQDecomp w = ctx.decomp_of(c.token());
    Int k(cert.payload("level"));
    for (long i = 1; i <= basis.rank; ++i) {
      QMat2 conj = inverse(w.mat) * QMat2(basis.gens[i - 1].mat) * w.mat;
      auto m = as_psl2z(conj);
      if (!m || !congruent_identity_mod(*m, k))
        check_fail(text, "a conjugated generator leaves the congruence subgroup");
    }
  } else if (kind == "subgroups-equal") {
    std::string name = c.token();
    const CosetTable& t = ctx.mod(name);
    const SchreierBasis& basis = ctx.mod_basis(name);
    SqrtQDecomp w = ctx.decomp_of(c.token());
    QMat2 binv = inverse(w.mat);
    for (const auto& gen : basis.gens) {
      for (const QMat2& conj : {w.mat * QMat2(gen.mat) * binv, binv * QMat2(gen.mat) * w.mat}) {
        auto m = as_psl2z(conj);
        if (!m || !t.contains(*m)) check_fail(text, "conjugation moves the subgroup");
      }
    }
  } else if (kind == "normal-in-psl2z") {
    std::string name = c.token();
    if (!normal_in_psl2z(ctx.mod(name), ctx.mod_basis(name)))
      check_fail(text, "subgroup is not normal");
  } else if (kind == "hgen-word") {
    // the j-th generator of H rewrites over F's basis to the named word
    std::string fname = c.token();
    std::string hname = c.token();
    long j = small_int(c.token());
    Word w = word_arg(ctx, c.token());
    const SchreierBasis& hb = ctx.mod_basis(hname);
    require(j >= 1 && j <= hb.rank, errc::replay_failure, "generator index out of range");
    if (rewrite_member(ctx.mod(fname), ctx.mod_basis(fname), hb.gens[j - 1].mat) != w)
      check_fail(text, "rewriting disagrees");
  } else if (kind == "conj-word") {
    // B⁻¹·x_j·B rewrites over F's basis to the named word
    std::string fname = c.token();
    std::string hname = c.token();
    SqrtQDecomp w = ctx.decomp_of(c.token());
    long j = small_int(c.token());
    Word expect = word_arg(ctx, c.token());
    const SchreierBasis& hb = ctx.mod_basis(hname);
    require(j >= 1 && j <= hb.rank, errc::replay_failure, "generator index out of range");
    auto m = as_psl2z(inverse(w.mat) * QMat2(hb.gens[j - 1].mat) * w.mat);
    if (!m) check_fail(text, "conjugated generator is not integral");
    if (rewrite_member(ctx.mod(fname), ctx.mod_basis(fname), *m) != expect)
      check_fail(text, "rewriting disagrees");
  } else if (kind == "fold") {
    std::string name = c.token();
    const FreeCosetTable& t = ctx.free_tbl(name);
    std::vector<Word> gens;
    while (!c.at_end()) gens.push_back(word_arg(ctx, c.token()));
    auto folded = stallings_table(t.rank, gens);
    if (!folded || !(*folded == canonical_form(t))) check_fail(text, "fold disagrees");
  } else if (kind == "index") {
    std::string name = c.token();
    if (Int(ctx.mod(name).n) != parse_rat(c.token()).get_num())
      check_fail(text, "index disagrees");
  } else if (kind == "rank") {
    std::string name = c.token();
    if (Int(ctx.mod_basis(name).rank) != parse_rat(c.token()).get_num())
      check_fail(text, "rank disagrees");
  } else if (kind == "torsion-free") {
    std::string name = c.token();
    std::string want = c.token();
    if (ctx.mod(name).torsion_free() != (want == "yes"))
      check_fail(text, "torsion-freeness disagrees");
  } else if (kind == "cusps") {
    std::string name = c.token();
    const CosetTable& t = ctx.mod(name);
    Int count = parse_rat(c.token()).get_num();
    c.expect('=');
    IVec widths = parse_ivec(c.token());
    CuspData cd = cusps(t);
    if (Int((long)cd.widths.size()) != count) check_fail(text, "cusp count disagrees");
    IVec got;
    for (int w : cd.widths) got.push_back(w);
    if (got != widths) check_fail(text, "cusp widths disagree");
    for (size_t i = 0; i < cd.representatives.size(); ++i) {
      if (classify_by_trace(cd.representatives[i]) != TraceClass::parabolic)
        check_fail(text, "cusp representative is not parabolic");
      if (!t.contains(cd.representatives[i]))
        check_fail(text, "cusp representative is not a member");
    }
  } else if (kind == "cusp-classes-distinct") {
    std::string name = c.token();
    const CosetTable& t = ctx.mod(name);
    const SchreierBasis& basis = ctx.mod_basis(name);
    CuspData cd = cusps(t);
    std::vector<IVec> classes;
    for (const auto& rep : cd.representatives)
      classes.push_back(abelianize(rewrite_member(t, basis, rep), basis.rank));
    for (size_t i = 0; i < classes.size(); ++i) {
      if (is_zero_vec(classes[i])) check_fail(text, "a cusp class vanished");
      for (size_t j = i + 1; j < classes.size(); ++j)
        if (classes[i] == classes[j]) check_fail(text, "two cusp classes coincide");
    }
  } else if (kind == "chevweil") {
    Int rank_f = parse_rat(c.token()).get_num();
    Int deg = parse_rat(c.token()).get_num();
    require(rank_f.fits_sint_p() && deg.fits_sint_p() && rank_f >= 2 && deg >= 1,
            errc::parse_error, "bad chevweil parameters");
    std::vector<Perm> images;
    for (long i = 0; i < rank_f.get_si(); ++i) {
      IVec v = parse_ivec(c.token());
      Perm p;
      for (const Int& x : v) {
        require(x >= 0 && x < deg, errc::replay_failure, "image entry out of range");
        p.push_back((int)x.get_si());
      }
      require((int)p.size() == deg.get_si(), errc::parse_error, "image degree mismatch");
      images.push_back(p);
    }
    std::string otok = c.token();
    require(otok.rfind("order=", 0) == 0, errc::parse_error, "expected order= in: " + text);
    Int order = parse_rat(otok.substr(6)).get_num();
    std::string dtok = c.token();
    require(dtok.rfind("dim=", 0) == 0, errc::parse_error, "expected dim= in: " + text);
    Int dim = parse_rat(dtok.substr(4)).get_num();
    NormalKernel nk = normal_kernel((int)rank_f.get_si(), images);
    HomologyAction act = homology_action((int)rank_f.get_si(), nk.tbl);
    ChevalleyWeilReport rep = chevalley_weil_check(act);
    if (!rep.all_ok()) check_fail(text, "a Chevalley-Weil flag failed");
    if (Int(act.q.size) != order) check_fail(text, "quotient order disagrees");
    if (Int(act.rank_n) != dim) check_fail(text, "dimension disagrees");
    for (int a = 0; a < act.q.size; ++a)
      for (int b = 0; b < act.q.size; ++b)
        if (mat_mul(act.mats[a], act.mats[b]) != act.mats[act.q.mult[a][b]])
          check_fail(text, "action is not a homomorphism");
  } else if (kind == "field-class") {
    const ProjMat& x = ctx.matrix(c.token());
    if (classify_field(x).str() != c.rest()) check_fail(text, "field class disagrees");
  } else if (kind == "conjugates") {
    const ProjMat& x = ctx.matrix(c.token());
    IntMat a = parse_intmat(c.token());
    IntMat b = parse_intmat(c.token());
    ProjMat lhs = inverse(x) * promote_mat(ProjMat(a), x.field) * x;
    if (!(lhs == promote_mat(ProjMat(b), x.field))) check_fail(text, "conjugation identity fails");
  } else if (kind == "eta-root") {
    const ProjMat& x = ctx.matrix(c.token());
    IntMat a = parse_intmat(c.token());
    IntMat b = parse_intmat(c.token());
    require(sgn(a.b) != 0, errc::replay_failure, "eta equation needs b != 0");
    if (a.a + a.d != b.a + b.d || sgn(a.a + a.d) == 0)
      check_fail(text, "lifts do not have matching traces");
    for (const auto& e : x.e)
      if (e.is_zero()) check_fail(text, "conjugator has zero entries; eta does not apply");
    if (!(x.e[1] * x.e[1] == TowerScalar::one(x.field)))
      check_fail(text, "normalization does not preserve the determinant");
    TowerScalar eta = x.e[3] / x.e[1];
    const FieldDesc& f = eta.field;
    TowerScalar lhs = TowerScalar(f, Rat(a.b)) * eta * eta +
                      TowerScalar(f, Rat(a.a - a.d)) * eta - TowerScalar(f, Rat(a.c + b.b));
    if (!lhs.is_zero()) check_fail(text, "eta does not solve the quadratic");
  } else {
    fail(errc::parse_error, "unknown check kind: " + kind);
  }
}

} // namespace replay

// The verdict and the chain structure must be justified by the matching
// check kinds; edited status or chain levels fail here before replay.
inline void validate_structure(const ParsedCert& cert) {
  auto has_kind = [&](const std::string& prefix) {
    for (const auto& c : cert.checks)
      if (c.rfind(prefix, 0) == 0) return true;
    return false;
  };
  auto status = cert.scalars.find("status");
  if (status != cert.scalars.end()) {
    if (status->second == "PassIntegral") {
      require(has_kind("subgroups-equal") && has_kind("sqrtq gsq q=1"), errc::replay_failure,
              "PassIntegral without the equality and integrality checks");
    } else if (status->second == "Reject") {
      auto reason = cert.scalars.find("reason");
      require(reason != cert.scalars.end(), errc::replay_failure, "Reject without a reason");
      const std::string& r = reason->second;
      bool ok = (r == "NotInSqrtQ" && has_kind("sqrtq-none gsq")) ||
                (r == "PseudoActionNontrivial" && has_kind("pseudo-delta")) ||
                (r == "ParabolicScaling" && has_kind("parabolic-moved")) ||
                (r == "ConjugateOutsideGamma" && has_kind("conj-gen-outside")) ||
                (r == "SquareNotIntegral" && has_kind("sqrtq-not-integral")) ||
                (r == "SubgroupMoved" && has_kind("class-equals-payload"));
      require(ok, errc::replay_failure, "Reject reason lacks its obstruction check");
    }
  }
  // chain series levels must be consecutive from 2 on each side of each kind
  std::map<std::string, std::set<int>> levels;
  for (const auto& check : cert.checks) {
    if (check.rfind("series ", 0) != 0) continue;
    Cursor c(check);
    c.token();  // "series"
    std::string tbl = c.token();
    c.token();  // word
    SeriesSpec spec = parse_series(c.token());
    std::string key = tbl + "/" + (spec.kind == SeriesKind::lower_central ? "lcs" : "derived");
    auto [it, fresh] = levels[key].insert(spec.index);
    require(fresh, errc::replay_failure, "duplicate chain level for " + key);
  }
  for (const auto& [key, set] : levels) {
    int expect = 2;
    for (int level : set)
      require(level == expect++, errc::replay_failure, "chain levels not consecutive for " + key);
  }
}

// Parse, verify the hash, rebuild the context, and replay every check.
inline void verify_certificate(const std::string& text) {
  ParsedCert cert = parse_certificate(text);
  validate_structure(cert);
  ReplayContext ctx;
  for (const auto& [kind, body] : cert.context) declare_in_context(ctx, kind, body);
  require(!cert.checks.empty(), errc::replay_failure, "certificate carries no checks");
  for (const auto& check : cert.checks) replay::run_check(ctx, cert, check);
}

} // namespace modcomm
