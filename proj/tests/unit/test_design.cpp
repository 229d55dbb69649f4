#include <doctest.h>

#include <cmath>
#include <set>

#include "larmap/design.hpp"
#include "oracles.hpp"

using namespace larmap;
using larmap::testing::TestRng;

namespace {

RealignedTable random_table(int n, int p, std::uint64_t seed, int first_rank = 0) {
  TestRng rng(seed);
  RealignedTable t;
  t.values = larmap::testing::random_matrix(n, p, rng);
  for (int j = 0; j < p; ++j) {
    t.names.push_back("c" + std::to_string(j));
    t.priority_ranks.push_back(first_rank + j);
  }
  return t;
}

double max_abs_offdiag_corr(const Matrix& values) {
  Matrix c = values.rowwise() - values.colwise().mean();
  for (Index j = 0; j < c.cols(); ++j) c.col(j) /= c.col(j).norm();
  Matrix corr = c.transpose() * c;
  double best = 0.0;
  for (Index i = 0; i < corr.cols(); ++i)
    for (Index j = i + 1; j < corr.cols(); ++j) best = std::max(best, std::abs(corr(i, j)));
  return best;
}

}  // namespace

TEST_CASE("expansion counts") {
  CHECK(expand_terms(random_table(5, 63, 1)).p() == 2205);
  CHECK(expand_terms(random_table(5, 1, 2)).p() == 4);
  CHECK(expand_terms(random_table(5, 3, 3)).p() == 15);
  for (int p = 1; p <= 20; ++p) {
    CHECK(expand_terms(random_table(4, p, 100 + p)).p() == 4 * p + p * (p - 1) / 2);
    CHECK(expand_terms(random_table(4, p, 100 + p), 4, false).p() == 4 * p);
    CHECK(expand_terms(random_table(4, p, 100 + p), 2).p() == 2 * p + p * (p - 1) / 2);
  }
}

TEST_CASE("expansion order and metadata") {
  RealignedTable t = random_table(6, 3, 4);
  t.names = {"a", "b", "c"};
  DesignMatrix d = expand_terms(t, 2);
  REQUIRE(d.p() == 9);
  CHECK(d.terms[0].label == "a");
  CHECK(d.terms[1].label == "a^2");
  CHECK(d.terms[2].label == "b");
  CHECK(d.terms[5].label == "c^2");
  CHECK(d.terms[6].label == "a:b");
  CHECK(d.terms[7].label == "a:c");
  CHECK(d.terms[8].label == "b:c");
  CHECK(d.terms[1].kind == TermKind::power);
  CHECK(d.terms[6].kind == TermKind::interaction);
  CHECK(d.terms[6].total_order() == 2);
  // interaction takes the coarser (larger) source rank of its bases
  CHECK(d.terms[7].source_rank == 2);
  // values: squares and products of the raw columns
  CHECK(d.values.col(1).isApprox(t.values.col(0).cwiseProduct(t.values.col(0))));
  CHECK(d.values.col(8).isApprox(t.values.col(1).cwiseProduct(t.values.col(2))));
}

TEST_CASE("expansion rejects constant columns") {
  RealignedTable t = random_table(5, 2, 5);
  t.values.col(1).setConstant(3.0);
  CHECK_THROWS_AS(expand_terms(t), DegenerateColumnError);
}

TEST_CASE("spatial design column counts") {
  TestRng rng(6);
  std::vector<GeoPoint> coords;
  for (int i = 0; i < 10; ++i) coords.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});

  CHECK(spatial_design(coords).design.p() == 39);  // 12 + 12 + 15
  auto tiny = spatial_design(coords, 1, 2);
  REQUIRE(tiny.design.p() == 3);
  CHECK(tiny.design.terms[0].label == "E");
  CHECK(tiny.design.terms[1].label == "N");
  CHECK(tiny.design.terms[2].label == "E:N");
  auto small = spatial_design(coords, 2, 2);
  REQUIRE(small.design.p() == 5);
  CHECK(small.design.terms[1].label == "E^2");
  CHECK(small.design.terms[4].label == "E:N");
}

TEST_CASE("spatial design has no interaction above the total-order cap") {
  TestRng rng(7);
  std::vector<GeoPoint> coords;
  for (int i = 0; i < 15; ++i) coords.push_back({rng.uniform(0, 50), rng.uniform(0, 50)});
  auto sd = spatial_design(coords, 12, 6);
  for (const auto& t : sd.design.terms)
    if (t.is_interaction()) CHECK(t.total_order() <= 6);
  // coordinates are recentred before powering
  double max_first_power = 0.0;
  for (int j = 0; j < sd.design.p(); ++j)
    if (sd.design.terms[j].label == "E")
      max_first_power = sd.design.values.col(j).cwiseAbs().maxCoeff();
  CHECK(max_first_power < 10.0);
}

TEST_CASE("spatial design rejects degenerate coordinates") {
  std::vector<GeoPoint> line{{0, 0}, {0, 1}, {0, 2}};
  CHECK_THROWS_AS(spatial_design(line), DataError);
}

TEST_CASE("spatial_rows rebuilds training columns exactly") {
  TestRng rng(8);
  std::vector<GeoPoint> coords;
  for (int i = 0; i < 12; ++i) coords.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
  auto sd = spatial_design(coords, 4, 3);
  Matrix rebuilt = spatial_rows(sd.basis, coords);
  CHECK((rebuilt - sd.design.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("standardize worked example") {
  DesignMatrix d;
  d.terms.push_back({"t", TermKind::linear, "t", 1, "", 0, 0});
  d.values = Matrix(3, 1);
  d.values << 1, 2, 3;
  auto [std_d, stats] = standardize(d);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std_d.values(0, 0) == doctest::Approx(-inv_sqrt2).epsilon(1e-12));
  CHECK(std_d.values(1, 0) == doctest::Approx(0.0));
  CHECK(std_d.values(2, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(stats.centers[0] == doctest::Approx(2.0));
  CHECK(stats.scales[0] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("standardize is idempotent and errors on constants") {
  TestRng rng(9);
  DesignMatrix d;
  d.values = larmap::testing::random_matrix(8, 3, rng);
  for (int j = 0; j < 3; ++j)
    d.terms.push_back({"t" + std::to_string(j), TermKind::linear, "t", 1, "", 0, 0});
  auto [once, stats1] = standardize(d);
  auto [twice, stats2] = standardize(once);
  CHECK((twice.values - once.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((stats2.scales.array() - 1.0).abs().maxCoeff() < 1e-12);

  DesignMatrix bad = d;
  bad.values.col(2).setConstant(5.0);
  try {
    standardize(bad);
    FAIL("expected DegenerateColumnError");
  } catch (const DegenerateColumnError& e) {
    CHECK(std::string(e.what()).find("t2") != std::string::npos);
  }
}

TEST_CASE("mirror applies training stats without re-estimation") {
  TestRng rng(10);
  DesignMatrix d;
  d.values = larmap::testing::random_matrix(6, 2, rng);
  d.terms = {{"a", TermKind::linear, "a", 1, "", 0, 0}, {"b", TermKind::linear, "b", 1, "", 0, 0}};
  auto [std_d, stats] = standardize(d);

  CHECK((mirror(d.values, stats) - std_d.values).cwiseAbs().maxCoeff() < 1e-14);

  Matrix means(1, 2);
  means << stats.centers[0], stats.centers[1];
  CHECK(mirror(means, stats).cwiseAbs().maxCoeff() == 0.0);

  Standardization s;
  s.centers = Vector(1);
  s.scales = Vector(1);
  s.centers << 2.0;
  s.scales << 2.0;
  Matrix one(1, 1);
  one << 4.0;
  CHECK(mirror(one, s)(0, 0) == doctest::Approx(1.0));

  Matrix wrong(1, 3);
  CHECK_THROWS_AS(mirror(wrong, stats), DataError);
}

TEST_CASE("prefilter keeps the higher-priority member of a correlated pair") {
  TestRng rng(11);
  DesignMatrix d;
  d.values = Matrix(20, 2);
  for (int i = 0; i < 20; ++i) {
    double a = rng.normal();
    d.values(i, 0) = a;
    d.values(i, 1) = a + 0.01 * rng.normal();
  }
  d.terms = {{"A", TermKind::linear, "A", 1, "", 0, 0},
             {"B", TermKind::linear, "B", 1, "", 0, 1}};
  FilterResult r = prefilter_mccm(d, 0.95, 1);
  REQUIRE(r.kept == std::vector<int>{0});
  REQUIRE(r.drop_log.size() == 1);
  CHECK(r.drop_log[0].dropped == "B");
  CHECK(r.drop_log[0].kept == "A");
  CHECK(r.drop_log[0].rule == "source");
  CHECK(r.drop_log[0].abs_r > 0.95);
}

TEST_CASE("prefilter is the identity when nothing correlates") {
  TestRng rng(12);
  DesignMatrix d;
  d.values = larmap::testing::random_matrix(200, 4, rng);
  for (int j = 0; j < 4; ++j)
    d.terms.push_back({"t" + std::to_string(j), TermKind::linear, "t", 1, "", 0, 0});
  FilterResult r = prefilter_mccm(d, 0.95, 2);
  CHECK(r.kept.size() == 4);
  CHECK(r.drop_log.empty());
}

TEST_CASE("x and x^2 on symmetric values are uncorrelated and both kept") {
  DesignMatrix d;
  d.values = Matrix(5, 2);
  d.values << -2, 4, -1, 1, 0, 0, 1, 1, 2, 4;
  d.terms = {{"x", TermKind::linear, "x", 1, "", 0, 0},
             {"x^2", TermKind::power, "x", 2, "", 0, 0}};
  FilterResult r = prefilter_mccm(d, 0.4, 3);
  CHECK(r.kept.size() == 2);
}

TEST_CASE("prefilter priority rules: kind, order, random") {
  TestRng rng(13);
  Vector base(30);
  for (int i = 0; i < 30; ++i) base[i] = rng.normal();

  SUBCASE("single term beats interaction") {
    DesignMatrix d;
    d.values = Matrix(30, 2);
    d.values.col(0) = base;
    d.values.col(1) = base * 1.001;
    d.terms = {{"a:b", TermKind::interaction, "a", 1, "b", 1, 0},
               {"c", TermKind::linear, "c", 1, "", 0, 0}};
    FilterResult r = prefilter_mccm(d, 0.9, 4);
    REQUIRE(r.drop_log.size() == 1);
    CHECK(r.drop_log[0].dropped == "a:b");
    CHECK(r.drop_log[0].rule == "kind");
  }
  SUBCASE("lower polynomial order wins") {
    DesignMatrix d;
    d.values = Matrix(30, 2);
    d.values.col(0) = base;
    d.values.col(1) = base * 1.001;
    d.terms = {{"c^3", TermKind::power, "c", 3, "", 0, 0},
               {"c^2", TermKind::power, "c", 2, "", 0, 0}};
    FilterResult r = prefilter_mccm(d, 0.9, 5);
    REQUIRE(r.drop_log.size() == 1);
    CHECK(r.drop_log[0].dropped == "c^3");
    CHECK(r.drop_log[0].rule == "order");
  }
  SUBCASE("full ties fall to the seeded random rule, deterministically") {
    DesignMatrix d;
    d.values = Matrix(30, 2);
    d.values.col(0) = base;
    d.values.col(1) = base * 1.001;
    d.terms = {{"u", TermKind::linear, "u", 1, "", 0, 0},
               {"v", TermKind::linear, "v", 1, "", 0, 0}};
    FilterResult r1 = prefilter_mccm(d, 0.9, 6);
    FilterResult r2 = prefilter_mccm(d, 0.9, 6);
    REQUIRE(r1.drop_log.size() == 1);
    CHECK(r1.drop_log[0].rule == "random");
    CHECK(r1.drop_log[0].dropped == r2.drop_log[0].dropped);
    // a different seed may choose differently; both outcomes are legal
    std::set<std::string> legal{"u", "v"};
    CHECK(legal.count(prefilter_mccm(d, 0.9, 77).drop_log[0].dropped) == 1);
  }
}

TEST_CASE("prefilter post-condition holds for planted correlation blocks") {
  TestRng rng(14);
  const int n = 40, blocks = 5, per_block = 4;
  DesignMatrix d;
  d.values = Matrix(n, blocks * per_block);
  for (int b = 0; b < blocks; ++b) {
    Vector core(n);
    for (int i = 0; i < n; ++i) core[i] = rng.normal();
    for (int k = 0; k < per_block; ++k) {
      for (int i = 0; i < n; ++i)
        d.values(i, b * per_block + k) = core[i] + 0.3 * k * rng.normal();
    }
  }
  for (int j = 0; j < blocks * per_block; ++j)
    d.terms.push_back({"t" + std::to_string(j), TermKind::linear, "t", 1, "", 0, j % 3});

  for (double tau : {0.4, 0.6, 0.8, 0.95}) {
    FilterResult r = prefilter_mccm(d, tau, 99);
    CHECK(max_abs_offdiag_corr(r.design.values) <= tau + 1e-12);
    CHECK(!r.kept.empty());
    // deterministic in (input, threshold, seed)
    FilterResult again = prefilter_mccm(d, tau, 99);
    CHECK(again.kept == r.kept);
    CHECK(again.drop_log.size() == r.drop_log.size());
  }
}

TEST_CASE("prefilter rejects thresholds outside (0, 1]") {
  DesignMatrix d;
  d.values = Matrix(3, 1);
  d.values << 1, 2, 3;
  d.terms = {{"t", TermKind::linear, "t", 1, "", 0, 0}};
  CHECK_THROWS_AS(prefilter_mccm(d, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(prefilter_mccm(d, 1.5, 1), ConfigError);
  CHECK_NOTHROW(prefilter_mccm(d, 1.0, 1));
}
