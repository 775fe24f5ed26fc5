#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "modcomm/cache.hpp"
#include "test_util.hpp"

using namespace modcomm;

namespace {

std::string make_witness_cert() {
  auto nk1 = normal_kernel(2, {Perm{1, 0}, Perm{0, 1}});
  auto nk2 = normal_kernel(2, {Perm{0, 1}, Perm{1, 0}});
  WitnessCert cert = gaschutz_witness(2, nk1.tbl, nk2.tbl);
  filtration_chain(cert, 4, cert.b);
  return witness_certificate("witness --rank 2 --k1 cyclic:2:1,0 --k2 cyclic:2:0,1", cert);
}

std::string make_pipeline_cert(const ProjMat& g) {
  CosetTable tbl = principal_congruence(2);
  SchreierBasis basis = schreier_basis(tbl);
  SeriesSpec d2{SeriesKind::derived, 2};
  Verdict v = main_pipeline(tbl, basis, 2, d2, g);
  return pipeline_certificate("commensurate --gamma 2", 2, d2, g, basis, v);
}

ProjMat sqrt2_diag() {
  FieldDesc f = FieldDesc::quadratic(2);
  TowerScalar r2 = TowerScalar::sqrt_d(f), zero = TowerScalar::zero(f);
  return ProjMat(f, r2, zero, zero, TowerScalar(f, Rat(1, 2)) * r2);
}

} // namespace

TEST_CASE("sha256 vectors") {
  CHECK(Sha256::hash("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(Sha256::hash("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("fresh certificates verify") {
  CHECK_NOTHROW(verify_certificate(make_witness_cert()));
  CHECK_NOTHROW(verify_certificate(make_pipeline_cert(ProjMat(mat_T()))));
  CHECK_NOTHROW(verify_certificate(make_pipeline_cert(sqrt2_diag())));
}

TEST_CASE("truncation and corruption fail the hash") {
  std::string cert = make_witness_cert();
  CHECK_THROWS_AS(verify_certificate(cert.substr(0, cert.size() - 20)), error);
  std::string flipped = cert;
  flipped[cert.find("free-member") + 1] = 'X';
  CHECK_THROWS_AS(verify_certificate(flipped), error);
  CHECK_THROWS_AS(verify_certificate("not a certificate\n"), error);
}

TEST_CASE("every single-integer mutation fails verification") {
  // the timestamp line is the one field excluded from the hash by design
  for (std::string cert : {make_witness_cert(), make_pipeline_cert(ProjMat(mat_T())),
                           make_pipeline_cert(sqrt2_diag())}) {
    auto spans = testutil::integer_spans(cert);
    CHECK(spans.size() > 30);
    size_t failures = 0;
    for (auto [b, e] : spans) {
      std::string mutated = testutil::mutate_integer(cert, b, e);
      try {
        verify_certificate(mutated);
      } catch (const error&) {
        ++failures;
        continue;
      }
      FAIL("mutation at offset ", b, " was accepted: ",
           cert.substr(b > 30 ? b - 30 : 0, 60));
    }
    CHECK(failures == spans.size());
  }
}

TEST_CASE("status cannot be edited without reworking the replay section") {
  std::string cert = make_pipeline_cert(sqrt2_diag());
  auto pos = cert.find("status: Reject");
  REQUIRE(pos != std::string::npos);
  std::string forged = cert.substr(0, pos) + "status: PassIntegral" +
                       cert.substr(pos + std::string("status: Reject").size());
  forged = testutil::rehash_certificate(forged);
  CHECK_THROWS_AS(verify_certificate(forged), error);
}

TEST_CASE("determinism modulo the timestamp line") {
  std::string a = make_pipeline_cert(sqrt2_diag());
  std::string b = make_pipeline_cert(sqrt2_diag());
  CHECK(testutil::strip_timestamp(a) == testutil::strip_timestamp(b));
}

TEST_CASE("table cache round trips and survives corruption") {
  std::string dir = "./cache-test-dir";
  setenv("MODCOMM_CACHE", dir.c_str(), 1);
  std::filesystem::remove_all(dir);
  int builds = 0;
  auto build = [&] {
    ++builds;
    return principal_congruence(3);
  };
  CosetTable t1 = cached_table("gamma k=3", build);
  CosetTable t2 = cached_table("gamma k=3", build);
  CHECK(builds == 1);
  CHECK(t1 == t2);
  // corrupt the cache entry: the loader falls back to a rebuild
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::ofstream out(entry.path());
    out << "garbage\n";
  }
  CosetTable t3 = cached_table("gamma k=3", build);
  CHECK(builds == 2);
  CHECK(t3 == t1);
  std::filesystem::remove_all(dir);
  unsetenv("MODCOMM_CACHE");
}

TEST_CASE("certificates for the remaining commands verify") {
  CosetTable g2 = principal_congruence(2);
  CHECK_NOTHROW(verify_certificate(subgroup_certificate("subgroup --gamma 2", "gamma H 2", g2)));
  auto nk = normal_kernel(2, {Perm{1, 0, 2}, Perm{1, 2, 0}});
  HomologyAction act = homology_action(2, nk.tbl);
  CHECK_NOTHROW(verify_certificate(
      chevweil_certificate("chevweil --rank 2 --quotient s3",
                           2, {Perm{1, 0, 2}, Perm{1, 2, 0}}, act)));
  ProjMat x = conjugator_between(mat_T(), pow(mat_T(), 2));
  CHECK_NOTHROW(
      verify_certificate(conjugator_certificate("conjugator", mat_T(), pow(mat_T(), 2), x)));
}

TEST_CASE("subgroup certificates catch doctored claims") {
  CosetTable g2 = principal_congruence(2);
  std::string cert = subgroup_certificate("subgroup --gamma 2", "gamma H 2", g2);
  auto pos = cert.find("index H 6");
  REQUIRE(pos != std::string::npos);
  std::string forged = cert;
  forged[pos + 8] = '7';
  forged = testutil::rehash_certificate(forged);
  CHECK_THROWS_AS(verify_certificate(forged), error);
}
