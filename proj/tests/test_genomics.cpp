#include "doctest.h"
#include "helpers.hpp"

#include "sparsevine/genomics.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

using namespace sparsevine;
using namespace testutil;

namespace {

SnpMatrix random_snps(int n, int p, std::uint64_t seed, double freq = 0.5)
{
  math::Rng rng(seed, 4);
  SnpMatrix s;
  s.values.resize(n, p);
  for (int j = 0; j < p; ++j) {
    s.column_ids.push_back("snp" + std::to_string(j));
    for (int i = 0; i < n; ++i)
      s.values(i, j) = rng.uniform() < freq ? 2 : 0;
  }
  for (int i = 0; i < n; ++i)
    s.row_ids.push_back("line" + std::to_string(i));
  return s;
}

std::string tmp_path(const std::string& name)
{
  return (std::filesystem::temp_directory_path() / ("sv_test_" + name)).string();
}

} // namespace

TEST_CASE("snp validation names the offending entry")
{
  SnpMatrix s = random_snps(5, 4, 1);
  s.values(3, 2) = 1;
  try {
    s.validate();
    FAIL("expected an error");
  } catch (const InvalidInput& e) {
    std::string m = e.what();
    CHECK(m.find("row") != std::string::npos);
    CHECK(m.find("snp2") != std::string::npos);
  }
}

TEST_CASE("preprocessing")
{
  const int n = 314;
  SnpMatrix tr = random_snps(n, 5, 2);
  // column 1: 300 zeros and 14 twos
  for (int i = 0; i < n; ++i)
    tr.values(i, 1) = i < 14 ? 2 : 0;
  // column 3 duplicates column 0
  tr.values.col(3) = tr.values.col(0);
  // column 4: 16 twos, 16/314 above 5%
  for (int i = 0; i < n; ++i)
    tr.values(i, 4) = i < 16 ? 2 : 0;
  SnpMatrix te = random_snps(40, 5, 3);
  // a test column that would fail the filter must not matter
  te.values.col(2).setZero();

  PreprocessResult r = preprocess(tr, te);
  CHECK(r.kept == std::vector<int>{ 0, 2, 4 });
  CHECK(r.dropped_duplicates == 1);
  CHECK(r.dropped_rare == 1);
  CHECK(r.train.column_ids == std::vector<std::string>{ "snp0", "snp2", "snp4" });
  CHECK(r.test.column_ids == r.train.column_ids);
  CHECK(r.test.rows() == 40);
  CHECK((r.test.values.col(1).array() == te.values.col(2).array()).all());

  // 50/50 column stays
  SnpMatrix half = random_snps(100, 1, 5);
  for (int i = 0; i < 100; ++i)
    half.values(i, 0) = i % 2 ? 2 : 0;
  CHECK(preprocess(half, SnpMatrix{ ByteMatrix(0, 1), half.column_ids, {} }).kept.size() == 1);

  SnpMatrix rare = random_snps(100, 2, 6, 0.01);
  CHECK_THROWS_AS(preprocess(rare, SnpMatrix{ ByteMatrix(0, 2), rare.column_ids, {} }), InvalidInput);
}

TEST_CASE("screening")
{
  const int n = 1000;
  SnpMatrix s = random_snps(n, 500, 7);
  math::Rng rng(8);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i)
    y(i) = rng.normal();
  ScreenResult r = screen(y, s, 0.10);
  double rate = r.ordered.size() / 500.0;
  CHECK(rate >= 0.06);
  CHECK(rate <= 0.14);
  for (std::size_t k = 0; k < r.ordered.size(); ++k) {
    CHECK(r.stats[r.ordered[k]].pvalue < 0.10);
    if (k > 0)
      CHECK(r.stats[r.ordered[k]].pvalue >= r.stats[r.ordered[k - 1]].pvalue);
  }

  // slope from group means, intercept is the mean where SNP = 0
  for (int j : { 0, 17, 333 }) {
    double s2 = 0, s0 = 0;
    int n2 = 0, n0 = 0;
    for (int i = 0; i < n; ++i)
      if (s.values(i, j) == 2) {
        s2 += y(i);
        ++n2;
      } else {
        s0 += y(i);
        ++n0;
      }
    CHECK(r.stats[j].slope == doctest::Approx((s2 / n2 - s0 / n0) / 2).epsilon(1e-10));
    CHECK(r.stats[j].intercept == doctest::Approx(s0 / n0).epsilon(1e-10));
    double z = r.stats[j].slope / r.stats[j].se;
    CHECK(r.stats[j].pvalue == doctest::Approx(2 * (1 - pnorm(std::fabs(z)))).epsilon(1e-8));
  }

  // perfect fit
  Eigen::VectorXd yy(n);
  for (int i = 0; i < n; ++i)
    yy(i) = s.values(i, 42) + 0.01 * rng.normal();
  ScreenResult p = screen(yy, s);
  CHECK(p.ordered.front() == 42);
  CHECK(p.stats[42].pvalue < 1e-10);

  ScreenResult t3 = screen(y, s, 0.10, 3);
  CHECK(t3.ordered == r.ordered);
  CHECK_THROWS_AS(screen(y.head(5), s.select_rows({ 0, 1, 2, 3, 4 })), InvalidInput);
}

TEST_CASE("feature grouping")
{
  const int n = 30;
  SnpMatrix s = random_snps(n, 450, 9);
  ScreenResult sr;
  math::Rng rng(10);
  for (int j = 0; j < 450; ++j) {
    sr.stats.push_back({ j, 0.1, rng.normal(), 0.1, 0.001 * (j + 1) / 450.0 });
    sr.ordered.push_back(449 - j);
  }
  FeatureSet f = extract_features(sr, s, 200);
  REQUIRE(f.members.size() == 3);
  CHECK(f.members[0].size() == 200);
  CHECK(f.members[1].size() == 200);
  CHECK(f.members[2].size() == 50);
  CHECK(f.members[0][0] == 449);
  CHECK(f.features.cols() == 3);
  CHECK(f.names[0] == "feature1");
  for (std::size_t d = 0; d < 3; ++d)
    for (int i = 0; i < n; ++i) {
      double v = 0;
      for (std::size_t k = 0; k < f.members[d].size(); ++k) {
        CHECK(f.weights[d][k] == sr.stats[f.members[d][k]].slope);
        v += f.weights[d][k] * s.values(i, f.members[d][k]);
      }
      CHECK(std::fabs(f.features(i, static_cast<Eigen::Index>(d)) - v) <= 1e-12);
    }
  CHECK(extract_features(sr, s, 450).members.size() == 1);
  CHECK(extract_features(sr, s, 10000).members.size() == 1);
  CHECK_THROWS_AS(extract_features(sr, s, 0), InvalidInput);

  auto m = f.manifest(s);
  CHECK(m["n_features"] == 3);
  CHECK(m["features"][0]["snps"][0] == "snp449");
  CHECK(m["features"][2]["weights"].size() == 50);

  // 17350 screened SNPs give 174 groups of 100 and 87 of 200
  SnpMatrix wide = random_snps(2, 17350, 11);
  ScreenResult ws;
  for (int j = 0; j < 17350; ++j) {
    ws.stats.push_back({ j, 0, 1, 1, 0.01 });
    ws.ordered.push_back(j);
  }
  CHECK(extract_features(ws, wide, 100).members.size() == 174);
  CHECK(extract_features(ws, wide, 200).members.size() == 87);
}

TEST_CASE("bivariate analysis")
{
  const int n = 400;
  math::Rng rng(12);
  Eigen::VectorXd y(n);
  FeatureSet fs;
  fs.features.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    y(i) = rng.normal();
    fs.features(i, 0) = std::exp(y(i)) + 0.05 * rng.normal();
    fs.features(i, 1) = rng.normal();
  }
  fs.names = { "feature1", "feature2" };
  auto b = bivariate_analysis(y, fs);
  REQUIRE(b.size() == 2);
  CHECK(b[0].copula.family() != BicopFamily::indep);
  CHECK(std::fabs(b[0].tau) > 0.5);
  CHECK(std::fabs(b[0].tau - tau_pairs(y, fs.features.col(0))) < 0.05);
  CHECK(!b[0].irrelevant_candidate);
  CHECK(b[0].aic == doctest::Approx(b[0].copula.aic()));

  // independent features: share of independence selections over seeds
  int indep = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    math::Rng r(seed, 30);
    Eigen::VectorXd yy(1000);
    FeatureSet f;
    f.features.resize(1000, 1);
    for (int i = 0; i < 1000; ++i) {
      yy(i) = r.normal();
      f.features(i, 0) = r.normal();
    }
    f.names = { "feature1" };
    auto s = bivariate_analysis(yy, f);
    indep += s[0].irrelevant_candidate;
    CHECK(s[0].irrelevant_candidate == (s[0].copula.family() == BicopFamily::indep));
  }
  CHECK(indep >= 5);

  FeatureSet tiny;
  tiny.features = Eigen::MatrixXd::Random(5, 1);
  tiny.names = { "feature1" };
  CHECK_THROWS_AS(bivariate_analysis(Eigen::VectorXd::Random(5), tiny), InvalidInput);
}

TEST_CASE("snp file formats")
{
  SnpMatrix s = random_snps(12, 7, 13);
  std::string bin = tmp_path("snps.svm"), csv = tmp_path("snps.csv");
  write_snp_binary(s, bin);
  SnpMatrix b = read_snp_matrix(bin);
  CHECK((b.values.array() == s.values.array()).all());
  {
    std::ifstream in(bin, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "SVM1");
    unsigned char hdr[8];
    in.read(reinterpret_cast<char*>(hdr), 8);
    CHECK(hdr[0] == 12);
    CHECK(hdr[4] == 7);
    unsigned char first;
    in.read(reinterpret_cast<char*>(&first), 1);
    CHECK(first == s.values(0, 0));
  }
  write_snp_csv(s, csv);
  SnpMatrix c = read_snp_matrix(csv);
  CHECK((c.values.array() == s.values.array()).all());
  CHECK(c.column_ids == s.column_ids);
  CHECK(c.row_ids == s.row_ids);

  {
    std::ofstream out(csv);
    out << "id,a,b\nr1,0,2\nr2,1,0\n";
  }
  try {
    read_snp_csv(csv);
    FAIL("expected an error");
  } catch (const InvalidInput& e) {
    std::string m = e.what();
    CHECK(m.find("row") != std::string::npos);
    CHECK(m.find("a") != std::string::npos);
  }
  {
    std::ofstream out(bin, std::ios::binary);
    out << "SVM1";
  }
  CHECK_THROWS_AS(read_snp_binary(bin), InvalidInput);
  std::remove(bin.c_str());
  std::remove(csv.c_str());
}

TEST_CASE("planted signal dataset")
{
  PlantedSnpData d = simulate_planted_snps(300, 400, 20, 3);
  CHECK(d.snps.rows() == 300);
  CHECK(d.snps.cols() == 400);
  CHECK(d.causal.size() == 20);
  CHECK(std::set<int>(d.causal.begin(), d.causal.end()).size() == 20);
  d.snps.validate();
  PlantedSnpData e = simulate_planted_snps(300, 400, 20, 3);
  CHECK((e.y.array() == d.y.array()).all());
}
