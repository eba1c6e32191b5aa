#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "doctest.h"
#include "expanderlab/canonical.hpp"
#include "expanderlab/measure.hpp"

using namespace expanderlab;

namespace {

const double kPi = std::acos(-1.0);

ImmersedPatch flat_patch(double extent) {
  ImmersedPatch patch;
  patch.intrinsic_dim = 2;
  patch.domain_lo = Vector::Constant(2, -extent);
  patch.domain_hi = Vector::Constant(2, extent);
  patch.embedding = [](const Vector& p) {
    Vector x(3);
    x << p[0], p[1], 0.0;
    return x;
  };
  return patch;
}

}  // namespace

TEST_CASE("unit sphere areas") {
  CHECK(unit_sphere_area(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(unit_sphere_area(2) == doctest::Approx(2 * kPi).epsilon(1e-14));
  CHECK(unit_sphere_area(3) == doctest::Approx(4 * kPi).epsilon(1e-14));
  CHECK(unit_sphere_area(4) == doctest::Approx(2 * kPi * kPi).epsilon(1e-14));
  CHECK_THROWS_AS(unit_sphere_area(0), InvalidDimensionError);
}

TEST_CASE("simpson rule: exact on cubics, fourth order on exp") {
  const auto cubic = [](double x) { return x * x * x; };
  CHECK(simpson(cubic, 0.0, 2.0, 2) == doctest::Approx(4.0).epsilon(1e-14));
  // odd panel counts are rounded up, so this stays exact
  CHECK(simpson(cubic, 0.0, 2.0, 3) == doctest::Approx(4.0).epsilon(1e-14));

  const auto ex = [](double x) { return std::exp(x); };
  const double truth = std::exp(1.0) - 1.0;
  const double e8 = std::abs(simpson(ex, 0.0, 1.0, 8) - truth);
  const double e16 = std::abs(simpson(ex, 0.0, 1.0, 16) - truth);
  CHECK(std::log2(e8 / e16) >= 3.8);
}

TEST_CASE("gaussian-weighted area of a flat plane through the origin") {
  const auto prof = make_hyperplane(2, 0.0).profile;
  REQUIRE(prof.has_value());
  // the r = 20 ball truncation misses only an e^{-100} tail
  const double area = weighted_area(*prof, 1.0, 20.0);
  CHECK(area == doctest::Approx(4 * kPi).epsilon(1e-8));

  // a constant extra factor scales the integral
  const double doubled = weighted_profile_integral(
      *prof, 1.0, 20.0, 0.0, [](double) { return 2.0; });
  CHECK(doubled == doctest::Approx(8 * kPi).epsilon(1e-8));
}

TEST_CASE("gaussian-weighted area of the radius-2 sphere") {
  const auto prof = make_sphere(2, 2.0).profile;
  REQUIRE(prof.has_value());
  const double area = weighted_area(*prof, 1.0, 3.0);
  CHECK(area == doctest::Approx(16 * kPi * std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("profile integral validation") {
  const auto prof = make_sphere(2, 2.0).profile;
  CHECK_THROWS_AS(weighted_profile_integral(*prof, 1.0, 0.0), UsageError);
  CHECK_THROWS_AS(weighted_profile_integral(*prof, 1.0, 3.0, -1.0), UsageError);
  const auto bad = [](double) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(weighted_profile_integral(*prof, 1.0, 3.0, 0.0, bad),
                  NonFiniteError);
}

TEST_CASE("tensor-product weighted area on a grid") {
  // 161 nodes per axis: odd, as the composite rule needs
  const SurfaceGrid grid = SurfaceGrid::finite_difference(flat_patch(10.0), 0.125);
  const double one_axis = 2 * std::sqrt(kPi) * std::erf(5.0);
  const double area = weighted_area(grid, 1.0);
  CHECK(area == doctest::Approx(one_axis * one_axis).epsilon(1e-8));
  // relaxing the weight strictly increases the integral
  CHECK(weighted_area(grid, 0.5) > area);

  const SurfaceGrid even =
      SurfaceGrid::finite_difference(flat_patch(10.0), 20.0 / 51.0);
  CHECK(even.grid().npts[0] % 2 == 0);
  CHECK_THROWS_AS(weighted_area(even, 1.0), UsageError);
}

TEST_CASE("area of a cylinder inside a ball") {
  const auto prof = make_cylinder(1, 2, 1.0).profile;
  REQUIRE(prof.has_value());
  for (double r : {2.0, 5.0, 10.0}) {
    const double expected = 4 * kPi * std::sqrt(r * r - 1.0);
    CHECK(ball_area(*prof, r) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("growth fit recovers a planted exponential rate") {
  AreaSeries series;
  for (int i = 0; i < 16; ++i) {
    const double r = 1.0 + 9.0 * i / 15.0;
    series.radii.push_back(r);
    series.areas.push_back(std::exp(r * r / 8.0));
  }
  const AreaFit fit = growth_fit(series, 0.1);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(fit.C == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fit.window_lo == 8);
  CHECK(fit.window_hi == 15);
  CHECK(series.alpha == doctest::Approx(0.1));
  CHECK(series.fit.slope == doctest::Approx(fit.slope));

  const std::string csv = to_csv(series);
  CHECK(csv.rfind("r,area\n", 0) == 0);
  const std::string j = fit_json(series);
  CHECK(j.find("\"slope\"") != std::string::npos);
  CHECK(j.find("\"C\"") != std::string::npos);
  CHECK(j.find("\"alpha\"") != std::string::npos);
}

TEST_CASE("growth fit validation") {
  AreaSeries empty;
  CHECK_THROWS_AS(growth_fit(empty, 1.0), UsageError);

  AreaSeries ragged;
  ragged.radii = {1.0, 2.0};
  ragged.areas = {1.0};
  CHECK_THROWS_AS(growth_fit(ragged, 1.0), UsageError);

  AreaSeries ten;  // only 5 radii land in the fit window
  for (int i = 0; i < 10; ++i) {
    ten.radii.push_back(1.0 + i);
    ten.areas.push_back(1.0);
  }
  CHECK_THROWS_AS(growth_fit(ten, 1.0), UsageError);

  AreaSeries flat;
  for (int i = 0; i < 16; ++i) {
    flat.radii.push_back(2.0);  // degenerate abscissa
    flat.areas.push_back(1.0);
  }
  CHECK_THROWS_AS(growth_fit(flat, 1.0), UsageError);

  AreaSeries negative;
  for (int i = 0; i < 16; ++i) {
    negative.radii.push_back(1.0 + i);
    negative.areas.push_back(i == 12 ? -1.0 : 1.0);
  }
  CHECK_THROWS_AS(growth_fit(negative, 1.0), UsageError);
}

TEST_CASE("area series over a cylinder grows like its cross-section") {
  const auto prof = make_cylinder(1, 2, 1.0).profile;
  std::vector<double> radii;
  for (int i = 0; i < 16; ++i) radii.push_back(2.0 + i);
  AreaSeries series = ball_area_series(*prof, radii);
  for (size_t i = 0; i < radii.size(); ++i) {
    const double expected = 4 * kPi * std::sqrt(radii[i] * radii[i] - 1.0);
    CHECK(series.areas[i] == doctest::Approx(expected).epsilon(1e-8));
  }
  const AreaFit fit = growth_fit(series, 1.0);
  CHECK(fit.slope > 0);
  CHECK(fit.slope < 0.05);  // polynomial growth, far from gaussian scale

  CHECK_THROWS_AS(ball_area_series(*prof, {2.0}), UsageError);
  CHECK_THROWS_AS(ball_area_series(*prof, {2.0, 2.0}), UsageError);
}

TEST_CASE("linear envelope of the mean curvature") {
  std::vector<std::pair<double, double>> flat;
  for (int k = 0; k <= 40; ++k) flat.emplace_back(0.1 * k, 1.0);
  const LinearBound c = mean_curvature_linear_bound(flat);
  CHECK(c.a == doctest::Approx(0.0));
  CHECK(c.b == doctest::Approx(1.0));
  CHECK(c.alpha_star == doctest::Approx(0.0));
  CHECK_FALSE(c.growth_exceeds_half);

  std::vector<std::pair<double, double>> quarter;
  for (int k = 0; k <= 40; ++k) quarter.emplace_back(0.1 * k, 0.025 * k);
  const LinearBound q = mean_curvature_linear_bound(quarter);
  CHECK(q.a == doctest::Approx(0.25));
  CHECK(q.b == doctest::Approx(0.0));
  CHECK(q.alpha_star == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK_FALSE(q.growth_exceeds_half);

  std::vector<std::pair<double, double>> steep;
  for (int k = 0; k <= 40; ++k) steep.emplace_back(0.1 * k, 0.06 * k);
  const LinearBound s = mean_curvature_linear_bound(steep);
  CHECK(s.growth_exceeds_half);
  CHECK(s.a == doctest::Approx(0.5));
  CHECK(std::isinf(s.alpha_star));

  CHECK_THROWS_AS(
      mean_curvature_linear_bound(std::vector<std::pair<double, double>>{{1.0, 1.0}}),
      UsageError);
  CHECK_THROWS_AS(mean_curvature_linear_bound(
                      std::vector<std::pair<double, double>>{{-1.0, 1.0}, {1.0, 1.0}}),
                  UsageError);
}

TEST_CASE("linear envelope from canonical profiles") {
  const LinearBound sph =
      mean_curvature_linear_bound(*make_sphere(2, 2.0).profile);
  CHECK(sph.a == doctest::Approx(0.0));
  CHECK(sph.b == doctest::Approx(1.0).epsilon(1e-9));

  const LinearBound cyl =
      mean_curvature_linear_bound(*make_cylinder(1, 2, 1.0).profile);
  CHECK(cyl.a == doctest::Approx(0.0));
  CHECK(cyl.b == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cyl.alpha_star == doctest::Approx(0.0));
}

TEST_CASE("weighted mean-curvature integral with tail diagnostics") {
  const auto prof = make_cylinder(1, 2, 1.0).profile;
  const HIntegralReport rep = weighted_H_integral(*prof, 1.0, 1.0, 8.0);
  const double expected = 4 * std::pow(kPi, 1.5) * std::exp(-0.25) *
                          std::erf(std::sqrt(63.0) / 2.0);
  CHECK(rep.value == doctest::Approx(expected).epsilon(1e-6));
  REQUIRE(rep.partials.size() == 8);
  for (size_t i = 1; i < rep.partials.size(); ++i)
    CHECK(rep.partials[i] >= rep.partials[i - 1]);
  CHECK(rep.partials.back() > rep.partials.front());
  CHECK(rep.value == doctest::Approx(rep.partials.back()));
  CHECK(rep.last_ratio < 0.2);
  CHECK(rep.last_ratio >= 0.0);

  CHECK_THROWS_AS(weighted_H_integral(*prof, -1.0, 1.0, 8.0), UsageError);
  CHECK_THROWS_AS(weighted_H_integral(*prof, 1.0, 1.0, 0.0), UsageError);
}
