// modcomm — exact-arithmetic toolkit for congruence subgroups of PSL2(Z),
// Chevalley-Weil homology actions, non-commensurability witnesses, and
// commensuration verdicts with replayable certificates.
//
// Exit codes: commensurate answers 0 = PassIntegral, 1 = Reject,
// 2 = Inconclusive; parse failures exit 3; other errors exit 4.

#include <CLI11.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

#include "modcomm/cache.hpp"
#include "modcomm/cert_writers.hpp"

namespace mc = modcomm;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) mc::fail(mc::errc::parse_error, "cannot open file: " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) mc::fail(mc::errc::parse_error, "cannot open file for writing: " + path);
  out << text;
}

// z2 | z3 | z4 | z6 | v4 | s3 | cyclic:n:e1,..,er | perm:deg:p1;p2;...
std::vector<mc::Perm> parse_quotient_spec(const std::string& spec, int rank) {
  auto cyc = [&](int n) {
    mc::Perm p(n);
    for (int i = 0; i < n; ++i) p[i] = (i + 1) % n;
    return p;
  };
  auto idp = [&](int n) {
    mc::Perm p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    return p;
  };
  std::vector<mc::Perm> images;
  if (spec == "z2" || spec == "z3" || spec == "z4" || spec == "z6") {
    int n = spec[1] - '0';
    images.assign(rank, idp(n));
    images[0] = cyc(n);
    return images;
  }
  if (spec == "v4") {
    mc::require(rank >= 2, mc::errc::parse_error, "v4 needs rank >= 2");
    images.assign(rank, idp(4));
    images[0] = {1, 0, 3, 2};
    images[1] = {2, 3, 0, 1};
    return images;
  }
  if (spec == "s3") {
    mc::require(rank >= 2, mc::errc::parse_error, "s3 needs rank >= 2");
    images.assign(rank, idp(3));
    images[0] = {1, 0, 2};
    images[1] = {1, 2, 0};
    return images;
  }
  if (spec.rfind("cyclic:", 0) == 0) {
    auto rest = spec.substr(7);
    auto colon = rest.find(':');
    mc::require(colon != std::string::npos, mc::errc::parse_error,
                "cyclic spec is cyclic:n:e1,..,er");
    int n = std::stoi(rest.substr(0, colon));
    mc::require(n >= 1, mc::errc::parse_error, "cyclic modulus must be >= 1");
    mc::IVec exps = mc::parse_ivec(rest.substr(colon + 1));
    mc::require((int)exps.size() == rank, mc::errc::parse_error,
                "one exponent per generator required");
    for (const mc::Int& e : exps) {
      long exp = (long)mc::mod_floor(e, n).get_si();
      mc::Perm p(n);
      for (int i = 0; i < n; ++i) p[i] = (int)((i + exp) % n);
      images.push_back(p);
    }
    return images;
  }
  if (spec.rfind("perm:", 0) == 0) {
    auto rest = spec.substr(5);
    auto colon = rest.find(':');
    mc::require(colon != std::string::npos, mc::errc::parse_error,
                "perm spec is perm:deg:p1;p2;...");
    int deg = std::stoi(rest.substr(0, colon));
    std::string body = rest.substr(colon + 1);
    size_t pos = 0;
    while (pos <= body.size()) {
      auto semi = body.find(';', pos);
      std::string one = body.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos);
      mc::IVec v = mc::parse_ivec(one);
      mc::Perm p;
      for (const mc::Int& x : v) p.push_back((int)x.get_si());
      mc::require((int)p.size() == deg && mc::is_perm(p), mc::errc::parse_error,
                  "bad permutation in spec: " + one);
      images.push_back(p);
      if (semi == std::string::npos) break;
      pos = semi + 1;
    }
    mc::require((int)images.size() == rank, mc::errc::parse_error,
                "one permutation per generator required");
    return images;
  }
  mc::fail(mc::errc::parse_error, "unknown quotient spec: " + spec);
}

struct SubgroupArgs {
  long gamma = 0;
  std::string hom;
  std::string cert_path;
};

int cmd_subgroup(const SubgroupArgs& args) {
  mc::CosetTable tbl;
  std::string declare, request;
  if (args.gamma >= 1) {
    request = "gamma k=" + std::to_string(args.gamma);
    tbl = mc::cached_table(request, [&] { return mc::principal_congruence(args.gamma); });
    declare = "gamma H " + std::to_string(args.gamma);
  } else {
    // kernel of S ↦ s, U ↦ u in Z/n, spec "n,s,u"
    mc::IVec v = mc::parse_ivec(args.hom);
    mc::require(v.size() == 3, mc::errc::parse_error, "--hom wants n,s,u");
    request = "hom " + args.hom;
    tbl = mc::cached_table(request, [&] {
      return mc::abelian_quotient_kernel(v[0].get_si(), v[1].get_si(), v[2].get_si());
    });
    declare = "modtable H " + mc::modtable_text(tbl);
  }
  std::cout << "index: " << tbl.n << "\n";
  bool tf = tbl.torsion_free();
  std::cout << "torsion-free: " << (tf ? "yes" : "no") << "\n";
  if (tf) {
    mc::SchreierBasis basis = mc::schreier_basis(tbl);
    std::cout << "rank: " << basis.rank << "\n";
  }
  mc::CuspData cd = mc::cusps(tbl);
  std::cout << "cusps: " << cd.widths.size() << " widths:";
  for (int w : cd.widths) std::cout << " " << w;
  std::cout << "\n";
  if (!args.cert_path.empty()) {
    std::string cmd = args.gamma >= 1 ? "subgroup --gamma " + std::to_string(args.gamma)
                                      : "subgroup --hom " + args.hom;
    write_file(args.cert_path, mc::subgroup_certificate(cmd, declare, tbl));
  }
  return 0;
}

struct ChevweilArgs {
  int rank = 2;
  std::string quotient;
  std::string quotient_file;
  std::string cert_path;
};

int cmd_chevweil(const ChevweilArgs& args) {
  std::vector<mc::Perm> images;
  if (!args.quotient_file.empty()) {
    std::string text = read_file(args.quotient_file);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    images = parse_quotient_spec(text, args.rank);
  } else {
    images = parse_quotient_spec(args.quotient, args.rank);
  }
  mc::NormalKernel nk = mc::normal_kernel(args.rank, images);
  mc::HomologyAction act = mc::homology_action(args.rank, nk.tbl);
  mc::ChevalleyWeilReport rep = mc::chevalley_weil_check(act);
  std::cout << "|Q|: " << act.q.size << "\n";
  std::cout << "dim H1(N): " << act.rank_n << " (expected "
            << act.rank_f + (act.rank_f - 1) * (act.q.size - 1) << ") -> "
            << (rep.dim_ok ? "ok" : "FAIL") << "\n";
  std::cout << "character: " << (rep.char_ok ? "ok" : "FAIL") << "\n";
  std::cout << "fixed subspace dim: " << rep.fixed_dim << " -> "
            << (rep.fixed_dim_ok ? "ok" : "FAIL") << "\n";
  if (!args.cert_path.empty()) {
    std::string cmd = "chevweil --rank " + std::to_string(args.rank) + " --quotient " +
                      (args.quotient_file.empty() ? args.quotient : "@file");
    write_file(args.cert_path, mc::chevweil_certificate(cmd, args.rank, images, act));
  }
  return rep.all_ok() ? 0 : 1;
}

struct WitnessArgs {
  int rank = 2;
  std::string k1, k2;
  int chain_depth = 4;
  std::string cert_path;
};

int cmd_witness(const WitnessArgs& args) {
  auto nk1 = mc::normal_kernel(args.rank, parse_quotient_spec(args.k1, args.rank));
  auto nk2 = mc::normal_kernel(args.rank, parse_quotient_spec(args.k2, args.rank));
  mc::WitnessCert cert = mc::gaschutz_witness(args.rank, nk1.tbl, nk2.tbl);
  mc::filtration_chain(cert, args.chain_depth, cert.b);
  mc::replay_witness(cert);
  std::cout << "a: " << mc::word_text(cert.a) << "\n";
  std::cout << "b: " << mc::word_text(cert.b) << " ([b] = " << cert.n.get_str() << "·z)\n";
  std::cout << "x_b: " << mc::word_text(cert.x_b) << "\n";
  std::cout << "[x_b] in H1(K2): " << mc::vec_text(cert.hom_class) << "\n";
  for (const auto& e : cert.chain)
    std::cout << "chain " << (e.kind == mc::SeriesKind::lower_central ? "lcs:" : "derived:")
              << e.level << "  K1 " << mc::to_string(e.in_k1) << "  K2 " << mc::to_string(e.in_k2)
              << "\n";
  std::string cmd = "witness --rank " + std::to_string(args.rank) + " --k1 " + args.k1 +
                    " --k2 " + args.k2 + " --chain-depth " + std::to_string(args.chain_depth);
  if (!args.cert_path.empty()) write_file(args.cert_path, mc::witness_certificate(cmd, cert));
  return 0;
}

struct CommensurateArgs {
  long gamma = 2;
  std::string series = "derived:2";
  std::string candidate;
  std::string candidate_file;
  std::string batch_file;
  std::string cert_path;
  int jobs = 1;
};

int verdict_code(mc::VerdictStatus s) {
  switch (s) {
    case mc::VerdictStatus::pass_integral: return 0;
    case mc::VerdictStatus::reject: return 1;
    case mc::VerdictStatus::inconclusive: return 2;
  }
  return 4;
}

int cmd_commensurate(const CommensurateArgs& args) {
  mc::SeriesSpec series = mc::parse_series(args.series);
  mc::CosetTable tbl = mc::cached_table("gamma k=" + std::to_string(args.gamma),
                                        [&] { return mc::principal_congruence(args.gamma); });
  mc::SchreierBasis basis = mc::schreier_basis(tbl);

  auto run_one = [&](const std::string& mat_text) {
    mc::ProjMat g = mc::parse_projmat(mat_text);
    mc::Verdict v = mc::main_pipeline(tbl, basis, args.gamma, series, g);
    return v;
  };

  if (!args.batch_file.empty()) {
    std::istringstream in(read_file(args.batch_file));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) lines.push_back(line);
    std::vector<int> codes(lines.size(), 4);
    std::vector<std::string> outputs(lines.size());
    std::atomic<size_t> next{0};
    int jobs = std::max(1, args.jobs);
    auto worker = [&] {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= lines.size()) return;
        try {
          mc::Verdict v = run_one(lines[i]);
          codes[i] = verdict_code(v.status);
          outputs[i] = std::string(mc::to_string(v.status)) +
                       (v.reason.empty() ? "" : " " + v.reason);
        } catch (const mc::error& e) {
          codes[i] = 3;
          outputs[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    int worst = 0;
    for (size_t i = 0; i < lines.size(); ++i) {
      std::cout << "candidate " << i + 1 << ": " << outputs[i] << "\n";
      worst = std::max(worst, codes[i]);
    }
    return worst;
  }

  std::string mat_text = args.candidate;
  if (!args.candidate_file.empty()) {
    mat_text = read_file(args.candidate_file);
    while (!mat_text.empty() && (mat_text.back() == '\n' || mat_text.back() == '\r'))
      mat_text.pop_back();
  }
  mc::require(!mat_text.empty(), mc::errc::parse_error, "no candidate matrix given");
  mc::ProjMat g = mc::parse_projmat(mat_text);
  mc::Verdict v = mc::main_pipeline(tbl, basis, args.gamma, series, g);
  std::cout << "verdict: " << mc::to_string(v.status);
  if (!v.reason.empty()) std::cout << " (" << v.reason << ", stage " << v.stage << ")";
  std::cout << "\n";
  if (!args.cert_path.empty()) {
    std::string cmd = "commensurate --gamma " + std::to_string(args.gamma) + " --series " +
                      args.series + " --candidate " + mat_text;
    write_file(args.cert_path, mc::pipeline_certificate(cmd, args.gamma, series, g, basis, v));
  }
  return verdict_code(v.status);
}

struct ConjugatorArgs {
  std::string a, b;
  std::string cert_path;
};

int cmd_conjugator(const ConjugatorArgs& args) {
  mc::IntMat A = mc::parse_intmat(args.a);
  mc::IntMat B = mc::parse_intmat(args.b);
  mc::ProjMat x = mc::conjugator_between(A, B);
  std::cout << "x = " << mc::projmat_text(x) << "\n";
  std::cout << "class: " << mc::classify_field(x).str() << "\n";
  if (!args.cert_path.empty()) {
    std::string cmd = "conjugator --A " + args.a + " --B " + args.b;
    write_file(args.cert_path, mc::conjugator_certificate(cmd, A, B, x));
  }
  return 0;
}

struct SeriesArgs {
  int rank = 2;
  std::string word;
  std::string series;
  int cmax = 6;
};

int cmd_series(const SeriesArgs& args) {
  mc::Word w = mc::parse_word(args.word);
  mc::SeriesSpec spec = mc::parse_series(args.series);
  mc::SeriesVerdict v = mc::in_series(w, spec, args.rank);
  std::cout << "verdict: " << mc::to_string(v) << "\n";
  mc::Word r = mc::reduce(w);
  if (!r.empty()) {
    mc::LcsDepth d = mc::lcs_depth(r, args.cmax);
    if (d.more_than)
      std::cout << "lcs depth: > " << args.cmax << "\n";
    else
      std::cout << "lcs depth: " << d.depth << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact commensurator toolkit for subgroups of PSL2(Z)"};
  app.require_subcommand(1);

  SubgroupArgs sub;
  auto* c_sub = app.add_subcommand("subgroup", "congruence subgroup report");
  c_sub->add_option("--gamma", sub.gamma, "principal congruence level k");
  c_sub->add_option("--hom", sub.hom, "abelian quotient kernel n,s,u");
  c_sub->add_option("--cert", sub.cert_path, "write a certificate file");

  ChevweilArgs cw;
  auto* c_cw = app.add_subcommand("chevweil", "Chevalley-Weil homology action checks");
  c_cw->add_option("--rank", cw.rank, "rank of the ambient free group")->required();
  c_cw->add_option("--quotient", cw.quotient, "quotient spec (z2|z3|z4|z6|v4|s3|cyclic:..|perm:..)");
  c_cw->add_option("--quotient-file", cw.quotient_file, "file holding a quotient spec");
  c_cw->add_option("--cert", cw.cert_path, "write a certificate file");

  WitnessArgs wit;
  auto* c_wit = app.add_subcommand("witness", "Gaschutz non-commensurability witness");
  c_wit->add_option("--rank", wit.rank, "rank of the ambient free group")->required();
  c_wit->add_option("--k1", wit.k1, "kernel spec for K1")->required();
  c_wit->add_option("--k2", wit.k2, "kernel spec for K2 (normal)")->required();
  c_wit->add_option("--chain-depth", wit.chain_depth, "lower-central chain depth");
  c_wit->add_option("--cert", wit.cert_path, "write a certificate file");

  CommensurateArgs com;
  auto* c_com = app.add_subcommand("commensurate", "candidate commensurator verdict");
  c_com->add_option("--gamma", com.gamma, "congruence level of H")->required();
  c_com->add_option("--series", com.series, "series term lcs:i|derived:i");
  c_com->add_option("--candidate", com.candidate, "candidate matrix text");
  c_com->add_option("--candidate-file", com.candidate_file, "file with the candidate matrix");
  c_com->add_option("--batch", com.batch_file, "file with one candidate per line");
  c_com->add_option("--jobs", com.jobs, "parallel candidates in batch mode");
  c_com->add_option("--cert", com.cert_path, "write a certificate file");

  ConjugatorArgs conj;
  auto* c_conj = app.add_subcommand("conjugator", "reconstruct x with x^-1 A x = B");
  c_conj->add_option("--A", conj.a, "integral matrix [a,b,c,d]")->required();
  c_conj->add_option("--B", conj.b, "integral matrix [a,b,c,d]")->required();
  c_conj->add_option("--cert", conj.cert_path, "write a certificate file");

  SeriesArgs ser;
  auto* c_ser = app.add_subcommand("series", "lower-central / derived membership");
  c_ser->add_option("--rank", ser.rank, "free basis rank")->required();
  c_ser->add_option("--word", ser.word, "word as signed indices")->required();
  c_ser->add_option("--series", ser.series, "series term lcs:i|derived:i")->required();
  c_ser->add_option("--cmax", ser.cmax, "Magnus truncation degree");

  std::string verify_path;
  auto* c_ver = app.add_subcommand("verify", "replay a certificate file");
  c_ver->add_option("file", verify_path, "certificate path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_sub) return cmd_subgroup(sub);
    if (*c_cw) return cmd_chevweil(cw);
    if (*c_wit) return cmd_witness(wit);
    if (*c_com) return cmd_commensurate(com);
    if (*c_conj) return cmd_conjugator(conj);
    if (*c_ser) return cmd_series(ser);
    if (*c_ver) {
      mc::verify_certificate(read_file(verify_path));
      std::cout << "certificate verifies\n";
      return 0;
    }
  } catch (const mc::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == mc::errc::parse_error) return 3;
    if (*c_ver) return 1;
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
