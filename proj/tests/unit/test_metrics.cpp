#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pwbf/errors.hpp"
#include "pwbf/metrics.hpp"

using namespace pwbf;

namespace {

std::vector<ProfileSample> triangle(double offset = 0.0) {
  std::vector<ProfileSample> p;
  for (int i = -30; i <= 30; ++i) {
    const double x = i * 0.1;
    p.push_back({x, offset - 6.0 * std::abs(x)});
  }
  return p;
}

RealGrid rayleigh_grid(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  RealGrid g(rows, cols);
  for (auto& v : g.values) v = std::hypot(n(rng), n(rng));
  return g;
}

}  // namespace

TEST_CASE("fwhm") {
  CHECK(fwhm(triangle()) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fwhm(triangle(-17.0)) == doctest::Approx(2.0).epsilon(1e-12));
  std::vector<ProfileSample> flat(10);
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = {static_cast<double>(i), -3.0};
  CHECK_THROWS_AS(fwhm(flat), NumericalError);
  auto one_sided = triangle();
  one_sided.erase(one_sided.begin(), one_sided.begin() + 25);  // lose the left crossing
  CHECK_THROWS_AS(fwhm(one_sided), NumericalError);
}

TEST_CASE("cnr closed form") {
  BModeImage img{RealGrid(1, 80), 60.0};
  CnrRegions r;
  for (std::size_t i = 0; i < 40; ++i) {
    img.db.values[i] = -40.0;
    r.cyst.push_back(i);
  }
  for (std::size_t i = 40; i < 80; ++i) {
    img.db.values[i] = (i % 2 == 0) ? -6.0 : -14.0;  // mean -10, population std 4
    r.background.push_back(i);
  }
  const auto res = cnr(img, r);
  CHECK(res.cnr == doctest::Approx(7.5));
  CHECK(res.cyst_mean_db == doctest::Approx(-40.0));
  CHECK(res.background_std_db == doctest::Approx(4.0));
  CHECK_FALSE(res.cyst_clipped);

  SUBCASE("global offset invariance") {
    auto shifted = img;
    for (auto& v : shifted.db.values) v -= 3.25;
    CHECK(cnr(shifted, r).cnr == doctest::Approx(res.cnr));
  }
  SUBCASE("identical regions give zero") {
    BModeImage twin{RealGrid(1, 80), 60.0};
    for (std::size_t i = 0; i < 80; ++i) twin.db.values[i] = (i % 2 == 0) ? -6.0 : -14.0;
    CHECK(cnr(twin, r).cnr == 0.0);
  }
  SUBCASE("zero background spread is an error") {
    CnrRegions flat{r.background, r.cyst};
    CHECK_THROWS_AS(cnr(img, flat), NumericalError);
  }
  SUBCASE("clipping flag") {
    auto clipped = img;
    for (std::size_t i = 0; i < 10; ++i) clipped.db.values[i] = -60.0;
    CHECK(cnr(clipped, r).cyst_clipped);
  }
}

TEST_CASE("cnr region validation and geometry") {
  CnrRegions small{{1, 2, 3}, {4, 5, 6}};
  CHECK_THROWS_AS(small.validate(), ConfigError);
  CnrRegions overlap;
  for (std::size_t i = 0; i < 40; ++i) {
    overlap.cyst.push_back(i);
    overlap.background.push_back(i + 20);
  }
  CHECK_THROWS_AS(overlap.validate(), ConfigError);

  const auto grid = ImagingGrid::uniform(-5e-3, 5e-3, 101, 10e-3, 20e-3, 101);
  const CystAnnotation a{-2e-3, 15e-3, 1.5e-3}, b{2.2e-3, 15e-3, 1.5e-3};
  const auto reg = cyst_regions(grid, a, {a, b});
  CHECK_NOTHROW(reg.validate());
  for (auto i : reg.cyst) {
    const auto p = grid.pixel(i / grid.cols(), i % grid.cols());
    CHECK(std::hypot(p.x - a.x, p.z - a.z) <= 0.8 * a.radius + 1e-12);
  }
  for (auto i : reg.background) {
    const auto p = grid.pixel(i / grid.cols(), i % grid.cols());
    const double d = std::hypot(p.x - a.x, p.z - a.z);
    CHECK(d >= 1.2 * a.radius - 1e-12);
    CHECK(d <= 1.8 * a.radius + 1e-12);
    CHECK(std::hypot(p.x - b.x, p.z - b.z) >= 1.2 * b.radius - 1e-12);
  }
}

TEST_CASE("rayleigh K-S statistic") {
  CHECK_FALSE(rayleigh_ks_statistic(std::vector<double>(300, 2.0)).has_value());
  CHECK_FALSE(rayleigh_ks_statistic(std::vector<double>(300, 0.0)).has_value());
  // Two-sample check of the statistic against a direct evaluation.
  const std::vector<double> a{0.5, 1.0, 1.5, 2.0};
  const double s2 = (0.25 + 1.0 + 2.25 + 4.0) / 4.0 / 2.0;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = 1.0 - std::exp(-a[i] * a[i] / (2 * s2));
    d = std::max({d, (i + 1) / 4.0 - f, f - i / 4.0});
  }
  CHECK(*rayleigh_ks_statistic(a) == doctest::Approx(d).epsilon(1e-14));
}

TEST_CASE("K-S critical values") {
  CHECK(ks_critical_value(300, 0.05, KsCritical::kAsymptotic) ==
        doctest::Approx(1.3581 / std::sqrt(300.0)).epsilon(1e-3));
  const double fitted = ks_critical_value(300, 0.05, KsCritical::kScaleFitted);
  CHECK(fitted < ks_critical_value(300, 0.05, KsCritical::kAsymptotic));
  CHECK(fitted > 0.5 * ks_critical_value(300, 0.05, KsCritical::kAsymptotic));
  CHECK(ks_critical_value(300, 0.05, KsCritical::kScaleFitted) == fitted);  // cached, stable
}

TEST_CASE("K-S map calibration on i.i.d. Rayleigh data") {
  KsSettings independent;
  independent.stride_rows = independent.patch_rows;
  independent.stride_cols = independent.patch_cols;
  const auto map = rayleigh_ks_map(rayleigh_grid(600, 300, 42), independent);
  REQUIRE(map.patches_tested == 600);
  // Binomial(600, 0.95) 99% interval.
  CHECK(map.patches_accepted >= 556);
  CHECK(map.patches_accepted <= 584);

  SUBCASE("the asymptotic critical value over-accepts") {
    auto asym = independent;
    asym.critical = KsCritical::kAsymptotic;
    CHECK(rayleigh_ks_map(rayleigh_grid(600, 300, 42), asym).patches_accepted > 584);
  }
  SUBCASE("scale invariance") {
    const auto scaled = rayleigh_ks_map(rayleigh_grid(600, 300, 42, 7.5), independent);
    CHECK(scaled.speckle == map.speckle);
  }
  SUBCASE("overlapping patches") {
    const auto dense = rayleigh_ks_map(rayleigh_grid(200, 150, 3));
    CHECK(dense.patches_tested == 19 * 20);
    const double rate = static_cast<double>(dense.patches_accepted) / dense.patches_tested;
    CHECK(rate == doctest::Approx(0.95).epsilon(0.04));
  }
}

TEST_CASE("K-S map rejects non-Rayleigh data") {
  CHECK(rayleigh_ks_map(RealGrid(100, 100, 1.0)).count() == 0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.9, 1.1);
  RealGrid g(200, 150);
  for (auto& v : g.values) v = u(rng);
  CHECK(rayleigh_ks_map(g).patches_accepted == 0);
  CHECK_THROWS_AS(rayleigh_ks_map(RealGrid(10, 10, 1.0)), ConfigError);
}

TEST_CASE("speckle similarity set arithmetic") {
  SpeckleMap a;
  a.rows = 10;
  a.cols = 10;
  a.speckle.assign(100, 0);
  for (std::size_t i = 0; i < 40; ++i) a.speckle[i] = 1;
  CHECK(speckle_similarity(a, a) == 100.0);
  auto disjoint = a;
  for (std::size_t i = 0; i < 100; ++i) disjoint.speckle[i] = i < 40 ? 0 : 1;
  CHECK(speckle_similarity(disjoint, a) == 0.0);
  auto half = a;
  for (std::size_t i = 0; i < 20; ++i) half.speckle[i] = 0;
  CHECK(speckle_similarity(half, a) == 50.0);
  auto empty = a;
  empty.speckle.assign(100, 0);
  CHECK_THROWS_AS(speckle_similarity(a, empty), NumericalError);
  auto other = a;
  other.rows = 5;
  other.speckle.resize(50);
  CHECK_THROWS_AS(speckle_similarity(other, a), ConfigError);
}

TEST_CASE("report text has stable keys") {
  MetricsReport r;
  r.method = "das";
  r.cnr = 1.5;
  r.speckle_similarity = 50.0;
  const auto text = r.to_text();
  CHECK(text.find("method = das\n") != std::string::npos);
  CHECK(text.find("cnr_db = 1.500000\n") != std::string::npos);
  CHECK(text.find("speckle_similarity_percent = 50.000000\n") != std::string::npos);
  CHECK(text == r.to_text());
}
