#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "expanderlab/canonical.hpp"
#include "expanderlab/profile.hpp"

using namespace expanderlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

// With lambda = 2/r + r/2 the arc (-r cos(s/r), r sin(s/r)) solves the
// profile equation; r = 2, lambda = 2 keeps the numbers simple.
ProfileState circle_state(double s) {
  ProfileState st;
  st.s = s;
  st.u = -2 * std::cos(s / 2);
  st.v = 2 * std::sin(s / 2);
  st.theta = kPi / 2 - s / 2;
  return st;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("profile equation holds along the spherical arc") {
  const ExpanderSpec spec{2, 2.0};
  for (double s : {0.3, 1.0, 2.5, 5.0}) {
    const ProfileState st = circle_state(s);
    const auto rhs = profile_rhs(st, spec);
    CHECK(rhs[0] == doctest::Approx(std::cos(st.theta)).epsilon(1e-14));
    CHECK(rhs[1] == doctest::Approx(std::sin(st.theta)).epsilon(1e-14));
    CHECK(rhs[2] == doctest::Approx(-0.5).epsilon(1e-13));
  }
  CHECK_THROWS_AS(profile_rhs(ProfileState{0, -2, 0, kPi / 2}, spec),
                  AxisSingularityError);
}

TEST_CASE("stepping is 4th order and the axis launch stays clean") {
  // The n = 1 circle (lambda = 1/r + r/2, r = 2) shares the parameterization
  // of circle_state; starting off-axis keeps the series launch out of the
  // order measurement, and the h pair sits above the end-state roundoff
  // floor.
  const ExpanderSpec plane{1, 1.5};
  const double sig0 = 0.25;
  ProfileState start = circle_state(sig0);
  start.s = 0;
  double err[2];
  const double h[2] = {1.6e-2, 8e-3};
  for (int i = 0; i < 2; ++i) {
    const ProfilePath path = planar_curve(plane, start, 5.0, h[i]);
    REQUIRE(path.terminated_by == ProfileEnd::ReachedSmax);
    const ProfileState& last = path.states.back();
    const ProfileState ex = circle_state(sig0 + last.s);
    err[i] = std::max({std::abs(last.u - ex.u), std::abs(last.v - ex.v),
                       std::abs(last.theta - ex.theta)});
  }
  const double order = std::log2(err[0] / err[1]);
  CHECK(order >= 3.9);

  // Launching from the axis (series start + near-axis step control) stays
  // within absolute 1e-10 of the arc.
  IntegrateOptions opts;
  opts.s_max = 2.0;
  opts.h_ode = 4e-3;
  const ProfilePath path = integrate_profile(-2.0, ExpanderSpec{2, 2.0}, opts);
  REQUIRE(path.terminated_by == ProfileEnd::ReachedSmax);
  const ProfileState& last = path.states.back();
  const ProfileState ex = circle_state(last.s);
  const double end_err =
      std::max({std::abs(last.u - ex.u), std::abs(last.v - ex.v),
                std::abs(last.theta - ex.theta)});
  CHECK(end_err <= 1e-10);
}

TEST_CASE("paths satisfy the equation at their own knots") {
  for (auto [u0, lam] : {std::pair{-2.0, 2.0}, {-1.5, 3.0}, {-4.0, 2.5}}) {
    IntegrateOptions opts;
    opts.s_max = 3.0;
    // the u0 = -1.5 path curls tightly near s = 2.4 where the residual's
    // h^4 theta^(5) scale is ~6e5; this h keeps it below the bound
    opts.h_ode = 3e-4;
    const ProfilePath path = integrate_profile(u0, ExpanderSpec{2, lam}, opts);
    CHECK(max_abs(path_residual_knots(path)) <= 1e-8);
  }
}

TEST_CASE("termination is classified and the closure defect measured") {
  const ExpanderSpec spec{2, 2.0};
  {
    IntegrateOptions opts;
    opts.s_max = 20.0;  // the arc returns to the axis at s = 2*pi
    const ProfilePath path = integrate_profile(-2.0, spec, opts);
    CHECK(path.terminated_by == ProfileEnd::AxisHit);
    CHECK(path.axis_s == doctest::Approx(2 * kPi).epsilon(1e-8));
    CHECK(std::abs(path.closure_defect()) <= 1e-7);
  }
  {
    IntegrateOptions opts;
    opts.s_max = 4.0;
    const ProfilePath path = integrate_profile(-1.5, ExpanderSpec{2, 3.0}, opts);
    CHECK(path.terminated_by == ProfileEnd::ReachedSmax);
    CHECK(path.closure_defect() == kNoHitDefect);
    CHECK(path.states.back().s == doctest::Approx(4.0).epsilon(1e-9));
  }
}

TEST_CASE("arclength-reversed mirror solves the same equation") {
  // (u, v, theta)(s) -> (-u(L-s), v(L-s), -theta(L-s)) preserves the
  // equation and the value of lambda; the knot residuals stay at the
  // integrator's floor on the mirrored path.
  IntegrateOptions opts;
  opts.s_max = 3.0;
  opts.h_ode = 3e-4;  // see the knot-residual case above
  const ProfilePath path = integrate_profile(-1.5, ExpanderSpec{2, 3.0}, opts);
  const double L = path.states.back().s;

  ProfilePath mirror = path;
  mirror.states.clear();
  for (auto it = path.states.rbegin(); it != path.states.rend(); ++it) {
    ProfileState st;
    st.s = L - it->s;
    st.u = -it->u;
    st.v = it->v;
    st.theta = -it->theta;
    mirror.states.push_back(st);
  }
  CHECK(max_abs(path_residual_knots(mirror)) <= 1e-8);
}

TEST_CASE("profile CSV round trip is exact") {
  IntegrateOptions opts;
  opts.s_max = 2.0;
  const ProfilePath path = integrate_profile(-1.5, ExpanderSpec{2, 3.0}, opts);
  const std::string csv = to_csv(path);
  CHECK(csv.rfind("s,u,v,theta\n", 0) == 0);

  const ProfilePath back = path_from_csv(csv, path.spec);
  REQUIRE(back.states.size() == path.states.size());
  for (size_t i = 0; i < back.states.size(); ++i) {
    CHECK(back.states[i].s == path.states[i].s);
    CHECK(back.states[i].u == path.states[i].u);
    CHECK(back.states[i].v == path.states[i].v);
    CHECK(back.states[i].theta == path.states[i].theta);
  }

  CHECK_THROWS_AS(path_from_csv("s,u,v,theta\n1,2,nope,4\n", path.spec),
                  UsageError);
  CHECK_THROWS_AS(path_from_csv("0,0,1,0\n", path.spec), UsageError);
  CHECK_THROWS_AS(  // s must increase
      path_from_csv("0,0,1,0\n0,0,1,0\n", path.spec), UsageError);
  CHECK_THROWS_AS(path_from_csv("0,0,1,0\n1,inf,1,0\n", path.spec),
                  NonFiniteError);
}

TEST_CASE("plane curves integrate through the axis") {
  // With lambda = 1/r + r/2 the unit circle through (0, 1) with inward
  // tangent angle theta = -s solves the n = 1 equation; it dips below
  // v = 0, which plane curves permit.
  const ExpanderSpec spec{1, 1.5};
  ProfileState start;
  start.u = 0;
  start.v = 1;
  start.theta = 0;
  const ProfilePath path = planar_curve(spec, start, 2 * kPi, 1e-3);
  CHECK(path.planar);
  CHECK(path.terminated_by == ProfileEnd::ReachedSmax);

  double v_min = 1;
  for (const auto& st : path.states) v_min = std::min(v_min, st.v);
  CHECK(v_min == doctest::Approx(-1.0).epsilon(1e-6));

  const ProfileState& last = path.states.back();
  CHECK(last.u == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(last.v == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(last.theta == doctest::Approx(-2 * kPi).epsilon(1e-8));

  CHECK_THROWS_AS(planar_curve(ExpanderSpec{2, 1.5}, start, 1.0, 1e-3),
                  InvalidDimensionError);
}

TEST_CASE("shooting finds both closed profiles at lambda = 3") {
  const ShootingResult res = shoot_closed(ExpanderSpec{2, 3.0}, -8.0, -0.1, 64);
  REQUIRE(res.roots.size() == 2);
  const double disc = std::sqrt(5.0);
  CHECK(res.roots[0].radius == doctest::Approx(3 + disc).epsilon(1e-5));
  CHECK(res.roots[1].radius == doctest::Approx(3 - disc).epsilon(1e-5));
  CHECK(res.roots[0].u0 == doctest::Approx(-(3 + disc)).epsilon(1e-5));
  CHECK(res.roots[0].u0 < res.roots[1].u0);
  CHECK(res.samples.size() == 64);

  const std::string j = to_json(res);
  CHECK(j.find("\"roots\"") != std::string::npos);
  CHECK(j.find("\"radius\"") != std::string::npos);

  CHECK_THROWS_AS(shoot_closed(ExpanderSpec{2, 3.0}, -8.0, 0.5, 64), UsageError);
  CHECK_THROWS_AS(shoot_closed(ExpanderSpec{2, 3.0}, -0.1, -8.0, 64), UsageError);
  CHECK_THROWS_AS(shoot_closed(ExpanderSpec{2, 3.0}, -8.0, -0.1, 8), UsageError);
}

TEST_CASE("dense interpolation reproduces the arc between knots") {
  IntegrateOptions opts;
  opts.s_max = 3.0;
  opts.h_ode = 2e-3;
  const ProfilePath path = integrate_profile(-2.0, ExpanderSpec{2, 2.0}, opts);
  const ProfileDense dense(path);

  const auto knots = dense.knot_positions();
  REQUIRE(knots.size() == path.states.size());
  for (size_t i = 0; i < knots.size(); ++i)
    CHECK(knots[i] == path.states[i].s);

  // at the knots the interpolation is the stored state
  const ProfileState& mid = path.states[path.states.size() / 2];
  CHECK(dense.u(mid.s) == mid.u);
  CHECK(dense.v(mid.s) == mid.v);

  for (double s : {0.503, 1.2507, 2.7101}) {
    const ProfileState ex = circle_state(s);
    CHECK(std::abs(dense.u(s) - ex.u) <= 1e-12);
    CHECK(std::abs(dense.v(s) - ex.v) <= 1e-12);
    CHECK(std::abs(dense.theta(s) - ex.theta) <= 1e-12);
    CHECK(dense.dtheta(s) == doctest::Approx(-0.5).epsilon(1e-9));
  }
  CHECK_THROWS_AS(dense.u(-1.0), UsageError);
  CHECK_THROWS_AS(dense.u(99.0), UsageError);
}

TEST_CASE("revolved arc reproduces the round sphere") {
  IntegrateOptions opts;
  opts.s_max = 4.0;
  const ProfilePath path = integrate_profile(-2.0, ExpanderSpec{2, 2.0}, opts);
  const RevolvedSurface rs = revolve(path, 2);

  Vector omega(2);
  omega << std::cos(0.4), std::sin(0.4);
  const GeomJet jet = rs.jet(2.0, omega);
  CHECK(jet.x.norm() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(jet.H == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(jet.normA2 == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(expander_residual(jet, rs.spec)) <= 1e-9);

  const GeomJet fd = rs.fd_jet(2.0, omega, 1e-3);
  CHECK(std::abs(expander_residual(fd, rs.spec)) <= 1e-6);
  CHECK(jet_invariant_violation(fd) <= 1e-6);

  CHECK_THROWS_AS(rs.jet(1e-9, omega), AxisSingularityError);

  const RevolutionProfile prof = rs.profile();
  CHECK(prof.n == 2);
  CHECK(prof.s_lo == doctest::Approx(0.0));
  CHECK(prof.s_hi == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(prof.v(2.0) == doctest::Approx(2 * std::sin(1.0)).epsilon(1e-10));

  // planar paths have no surface of revolution
  ProfileState start;
  start.u = 0;
  start.v = 1;
  start.theta = 0;
  const ProfilePath plane = planar_curve(ExpanderSpec{1, 1.5}, start, 6.0, 1e-3);
  CHECK_THROWS_AS(revolve(plane, 2), DegeneratePathError);
}

TEST_CASE("chord-sampled revolution jets are curvature-exact on circles") {
  const auto u_fn = [](double s) { return -2 * std::cos(s / 2); };
  const auto v_fn = [](double s) { return 2 * std::sin(s / 2); };
  Vector omega(2);
  omega << 1.0, 0.0;
  const GeomJet jet = revolution_fd_jet(u_fn, v_fn, 2, 1.5, omega, 1e-3);
  // chords of a circle are parallel to the midpoint tangent, so the
  // curvature data has no O(h^2) error; what is left is the roundoff of
  // differencing chord angles at h = 1e-3 (a ~1e-11 floor), plus the real
  // sinc^2 chord bias in the metric.
  CHECK(jet.H == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(jet.principal_curvatures[0] == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(jet.principal_curvatures[1] == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(std::abs(jet.metric(0, 0) - 1.0) <= 1e-6);
  CHECK(std::abs(jet.metric(0, 0) - 1.0) >= 1e-9);  // the bias is real
  CHECK(std::abs(expander_residual(jet, ExpanderSpec{2, 2.0})) <= 1e-10);
}

TEST_CASE("integrator input validation") {
  CHECK_THROWS_AS(integrate_profile(-2.0, ExpanderSpec{0, 2.0}, {}),
                  InvalidDimensionError);
  IntegrateOptions bad;
  bad.s_max = -1.0;
  CHECK_THROWS_AS(integrate_profile(-2.0, ExpanderSpec{2, 2.0}, bad), UsageError);
}
