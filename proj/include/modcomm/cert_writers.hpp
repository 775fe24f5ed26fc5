#pragma once

#include <string>

#include "modcomm/certificate.hpp"

// Writers that flatten results into certificate text.  Shared values are
// declared once and referenced by @name; the replay section pins each of
// them with an exact recomputation, so any single-integer edit (with the
// hash repaired) still fails verification.

namespace modcomm {

// declared names stay digit-free so no integer mutation can rename one
// object into another
inline std::string chain_word_name(int level) {
  static const char* names[] = {"", "", "ytwo", "ythree", "yfour", "yfive", "ysix", "yseven"};
  require(level >= 2 && level < 8, errc::internal, "chain level out of naming range");
  return names[level];
}

inline void emit_witness_body(CertBuilder& b, const WitnessCert& cert) {
  b.kv("rank-f", std::to_string(cert.rank_f));
  b.line("declare freetable ka " + freetable_text(cert.k1));
  b.line("declare freetable kb " + freetable_text(cert.k2));
  b.line("declare word a " + word_text(cert.a));
  b.line("declare word bb " + word_text(cert.b));
  b.line("declare word xb " + word_text(cert.x_b));
  long daux_pow = 1;
  for (const ChainEntry& e : cert.chain) {
    if (e.kind == SeriesKind::lower_central && e.level >= 3)
      b.line("declare word " + chain_word_name(e.level) + " " + word_text(e.y));
    if (e.kind == SeriesKind::derived && e.level == 3) {
      b.line("declare word daux " + word_text(cert.derived_aux));
      b.line("declare word dthree " + word_text(e.y));
      daux_pow = e.aux_n;
    }
  }
  b.section("payload");
  b.kv("a", word_text(cert.a));
  b.kv("b", word_text(cert.b));
  b.kv("x_b", word_text(cert.x_b));
  b.kv("n", cert.n.get_str());
  b.kv("z", vec_text(cert.z));
  b.kv("hom-class", vec_text(cert.hom_class));
  b.section("replay");
  b.check("payload rank-f " + std::to_string(cert.rank_f));
  b.check("payload a " + word_text(cert.a));
  b.check("payload b " + word_text(cert.b));
  b.check("payload x_b " + word_text(cert.x_b));
  b.check("free-member ka @a");
  b.check("free-not-member kb @a");
  b.check("free-member ka @bb");
  b.check("free-member kb @bb");
  b.check("commutator @xb @a @bb");
  b.check("class-multiple kb @bb");  // [b] = n·z, z nonzero
  b.check("class-equals-payload kb @xb hom-class");
  {
    IVec zero(cert.hom_class.size(), 0);
    b.check("free-class ka @xb = " + vec_text(zero));
  }
  b.check("power-classes kb @xb");  // powers 1..5 scale and stay nonzero
  bool daux_declared = false;
  for (const ChainEntry& e : cert.chain) {
    std::string spec = (e.kind == SeriesKind::lower_central ? "lcs:" : "derived:") +
                       std::to_string(e.level);
    std::string name;
    if (e.kind == SeriesKind::lower_central) {
      name = e.level == 2 ? "@xb" : "@" + chain_word_name(e.level);
      if (e.level == 3) b.check("commutator @ythree @xb @bb");
      if (e.level >= 4)
        b.check("commutator @" + chain_word_name(e.level) + " @" +
                chain_word_name(e.level - 1) + " @bb");
    } else {
      name = e.level == 2 ? "@xb" : "@dthree";
      if (e.level == 3 && !daux_declared) {
        b.check("basis-commutator kb @daux " + std::to_string(cert.aux_n1) + " " +
                std::to_string(cert.aux_n2));
        b.check("pow-commutator @dthree @xb " + std::to_string(daux_pow) + " @daux");
        daux_declared = true;
      }
    }
    b.check("series ka " + name + " " + spec + " " + to_string(e.in_k1));
    b.check("series kb " + name + " " + spec + " " + to_string(e.in_k2));
  }
}

inline std::string witness_certificate(const std::string& command, const WitnessCert& cert) {
  CertBuilder b(command);
  b.section("inputs");
  emit_witness_body(b, cert);
  return b.finish();
}

inline std::string subgroup_certificate(const std::string& command, const std::string& declare,
                                        const CosetTable& tbl) {
  CertBuilder b(command);
  b.section("inputs");
  b.line("declare " + declare);
  b.section("payload");
  b.kv("index", std::to_string(tbl.n));
  bool tf = tbl.torsion_free();
  b.kv("torsion-free", tf ? "yes" : "no");
  CuspData cd = cusps(tbl);
  b.kv("cusps", std::to_string(cd.widths.size()));
  if (tf) b.kv("rank", std::to_string(schreier_basis(tbl).rank));
  b.section("replay");
  b.check("payload index " + std::to_string(tbl.n));
  b.check("payload cusps " + std::to_string(cd.widths.size()));
  b.check("payload torsion-free " + std::string(tf ? "yes" : "no"));
  b.check("index H " + std::to_string(tbl.n));
  b.check("torsion-free H " + std::string(tf ? "yes" : "no"));
  IVec widths;
  for (int w : cd.widths) widths.push_back(w);
  b.check("cusps H " + std::to_string(cd.widths.size()) + " = " + vec_text(widths));
  if (tf) {
    b.check("payload rank " + std::to_string(schreier_basis(tbl).rank));
    b.check("rank H " + std::to_string(schreier_basis(tbl).rank));
    b.check("cusp-classes-distinct H");
  }
  return b.finish();
}

inline std::string chevweil_certificate(const std::string& command, int rank_f,
                                        const std::vector<Perm>& images,
                                        const HomologyAction& act) {
  CertBuilder b(command);
  b.section("inputs");
  b.kv("rank-f", std::to_string(rank_f));
  b.section("payload");
  b.kv("quotient-order", std::to_string(act.q.size));
  b.kv("dimension", std::to_string(act.rank_n));
  b.section("replay");
  b.check("payload rank-f " + std::to_string(rank_f));
  b.check("payload quotient-order " + std::to_string(act.q.size));
  b.check("payload dimension " + std::to_string(act.rank_n));
  std::string line = "chevweil " + std::to_string(rank_f) + " " +
                     std::to_string(images.empty() ? 1 : (int)images[0].size());
  for (const Perm& p : images) {
    IVec v;
    for (int x : p) v.push_back(x);
    line += " " + vec_text(v);
  }
  line += " order=" + std::to_string(act.q.size) + " dim=" + std::to_string(act.rank_n);
  b.check(line);
  return b.finish();
}

inline std::string conjugator_certificate(const std::string& command, const IntMat& A,
                                          const IntMat& B, const ProjMat& x) {
  CertBuilder b(command);
  b.section("inputs");
  b.line("declare matrix x " + projmat_text(x));
  b.kv("A", intmat_text(A));
  b.kv("B", intmat_text(B));
  b.section("payload");
  b.kv("field-class", classify_field(x).str());
  b.section("replay");
  b.check("payload A " + intmat_text(A));
  b.check("payload B " + intmat_text(B));
  b.check("payload field-class " + classify_field(x).str());
  b.check("field-class x " + classify_field(x).str());
  b.check("conjugates x " + intmat_text(A) + " " + intmat_text(B));
  // the eta branch applies to all-nonzero conjugators with matched SL2 lifts
  // whose normalization to upper-right 1 keeps determinant one
  bool eta_branch = sgn(A.b) != 0 && A.a + A.d == B.a + B.d && sgn(A.a + A.d) != 0 &&
                    x.e[1] * x.e[1] == TowerScalar::one(x.field);
  for (const auto& e : x.e)
    if (e.is_zero()) eta_branch = false;
  if (eta_branch) b.check("eta-root x " + intmat_text(A) + " " + intmat_text(B));
  return b.finish();
}

// The commensuration verdict: stages echoed, each claim replayable from H,
// g, and the decompositions alone.
inline std::string pipeline_certificate(const std::string& command, long k,
                                        const SeriesSpec& series, const ProjMat& g,
                                        const SchreierBasis& basis, const Verdict& v) {
  CertBuilder b(command);
  ProjMat g2 = g * g;
  b.section("inputs");
  b.kv("level", std::to_string(k));
  b.kv("series", to_string(series));
  b.line("declare gamma H " + std::to_string(k));
  b.line("declare matrix g " + projmat_text(g));
  b.line("declare matrix gsq " + projmat_text(g2));
  if (v.status == VerdictStatus::reject && v.reason == "ParabolicScaling") {
    const ParabolicResult& pr = *v.parabolic_witness;
    b.line("declare qmat gn " + qmat_text(QMat2(pr.gamma_n)));
    b.line("declare qmat h " + qmat_text(QMat2(pr.h)));
    b.line("declare qmat yh " + qmat_text(pr.yh));
  }
  b.section("payload");
  b.kv("status", to_string(v.status));
  if (!v.reason.empty()) b.kv("reason", v.reason);
  b.kv("stage", std::to_string(v.stage));
  if (!v.assumption.empty()) b.kv("assumption", v.assumption);
  b.section("replay");
  b.check("payload status " + std::string(to_string(v.status)));
  if (!v.reason.empty()) b.check("payload reason " + v.reason);
  if (!v.assumption.empty()) b.check("payload assumption " + v.assumption);
  b.check("payload stage " + std::to_string(v.stage));
  b.check("payload level " + std::to_string(k));
  b.check("payload series " + to_string(series));
  b.check("index H " + std::to_string(basis.n));
  b.check("normal-in-psl2z H");
  b.check("square g gsq");

  // stage-2..4 claims are tied to the decomposition of w = g or g²
  std::string wname = v.used_square ? "gsq" : "g";
  auto w_tie = [&]() {
    const SqrtQDecomp& d = *v.w_decomp;
    b.check("sqrtq " + wname + " q=" + d.q.get_str() + " B=" + qmat_text(d.mat));
  };

  switch (v.status) {
    case VerdictStatus::pass_integral: {
      w_tie();
      b.check("sqrtq gsq q=1 B=" + qmat_text(v.g2_decomp->mat));
      b.check("subgroups-equal H " + wname);
      break;
    }
    case VerdictStatus::inconclusive: {
      if (v.w_decomp) w_tie();
      break;
    }
    case VerdictStatus::reject: {
      if (v.reason == "NotInSqrtQ") {
        b.check("sqrtq-none g");
        b.check("sqrtq-none gsq");
        if (v.irrational_pair)
          b.check("prod-irrational gsq " + std::to_string(v.irrational_pair->first) + " " +
                  std::to_string(v.irrational_pair->second));
        if (v.span) {
          std::string line = "span H";
          for (const auto& w : v.span->words) line += " " + word_text(w);
          b.check(line);
          for (const auto& w : v.span->words) {
            IntMat m = evaluate_basis_word(basis, w);
            ProjMat conj = g2 * promote_mat(ProjMat(m), g2.field) * inverse(g2);
            if (!conj.all_rational()) {
              b.check("conj-irrational H gsq " + word_text(w));
              break;
            }
          }
        }
        break;
      }
      w_tie();
      if (v.reason == "PseudoActionNontrivial") {
        const PseudoActionResult& pa = *v.pseudo_witness;
        for (const PseudoDelta& d : pa.deltas) {
          if (!d.defined || is_zero_vec(d.delta)) continue;
          b.check("pseudo-delta H " + wname + " " + std::to_string(v.pseudo_y_gen) + " " +
                  std::to_string(d.gen) + " " + std::to_string(d.n_used) + " = " +
                  vec_text(d.delta));
          break;
        }
      } else if (v.reason == "ParabolicScaling") {
        const ParabolicResult& pr = *v.parabolic_witness;
        b.check("cusp-power H " + std::string(pr.at == CuspPoint::infinity ? "inf" : "zero") +
                " " + std::to_string(pr.n_used) + " gn");
        b.check("member-q H h");
        b.check("yh-product H " + wname + " " + std::to_string(v.parabolic_y_gen) + " h yh");
        b.check("parabolic-moved H gn yh");
      } else if (v.reason == "ConjugateOutsideGamma") {
        b.check("conj-gen-outside H " + wname + " " + std::to_string(v.gamma_k_failing_gen));
      } else if (v.reason == "SquareNotIntegral") {
        b.check("sqrtq-not-integral gsq");
        b.check("subgroups-equal H " + wname);
      } else if (v.reason == "SubgroupMoved") {
        const WitnessCert& cert = *v.moved_witness;
        b.check("conj-gens-inside H " + wname);
        // tie the witness tables back to H and its conjugate over F = Γ(k)
        b.line("declare gamma F " + std::to_string(k));
        CosetTable f_tbl = principal_congruence(k);
        SchreierBasis f_basis = schreier_basis(f_tbl);
        std::string fold_k1 = "fold ka", fold_k2 = "fold kb";
        auto index_name = [](const char* prefix, int i) {
          return std::string(prefix) + char('a' + i - 1);
        };
        for (int i = 1; i <= basis.rank; ++i) {
          Word hw = rewrite_member(f_tbl, f_basis, basis.gens[i - 1].mat);
          b.line("declare word " + index_name("hg", i) + " " + word_text(hw));
          b.check("hgen-word F H " + std::to_string(i) + " @" + index_name("hg", i));
          fold_k2 += " @" + index_name("hg", i);
          auto m = as_psl2z(inverse(v.w_decomp->mat) * QMat2(basis.gens[i - 1].mat) *
                            v.w_decomp->mat);
          require(m.has_value(), errc::internal, "stage-4 generators must be integral");
          Word cw = rewrite_member(f_tbl, f_basis, *m);
          b.line("declare word " + index_name("cg", i) + " " + word_text(cw));
          b.check("conj-word F H " + wname + " " + std::to_string(i) + " @" +
                  index_name("cg", i));
          fold_k1 += " @" + index_name("cg", i);
        }
        b.check(fold_k1);
        b.check(fold_k2);
        emit_witness_body(b, cert);
      }
      break;
    }
  }
  return b.finish();
}

} // namespace modcomm
