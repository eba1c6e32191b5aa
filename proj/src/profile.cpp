#include "expanderlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "expanderlab/parallel.hpp"

namespace expanderlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAxisEps = 1e-6;

struct RawState {
  double s, u, v, theta;
};

// Unguarded RHS; near v = 0 (n >= 2) the value may be huge or non-finite,
// which the stepper detects and treats as an axis crossing.
std::array<double, 3> rhs_raw(double u, double v, double theta,
                              const ExpanderSpec& spec) {
  const double c = std::cos(theta), sn = std::sin(theta);
  double dtheta = -spec.lambda + (v * c - u * sn) / 2;
  if (spec.n > 1) dtheta += (spec.n - 1) * c / v;
  return {c, sn, dtheta};
}

RawState rk4_step(const RawState& y, double h, const ExpanderSpec& spec) {
  const auto k1 = rhs_raw(y.u, y.v, y.theta, spec);
  const auto k2 = rhs_raw(y.u + h / 2 * k1[0], y.v + h / 2 * k1[1],
                          y.theta + h / 2 * k1[2], spec);
  const auto k3 = rhs_raw(y.u + h / 2 * k2[0], y.v + h / 2 * k2[1],
                          y.theta + h / 2 * k2[2], spec);
  const auto k4 =
      rhs_raw(y.u + h * k3[0], y.v + h * k3[1], y.theta + h * k3[2], spec);
  RawState out;
  out.s = y.s + h;
  out.u = y.u + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
  out.v = y.v + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
  out.theta = y.theta + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
  return out;
}

bool finite_state(const RawState& y) {
  return std::isfinite(y.u) && std::isfinite(y.v) && std::isfinite(y.theta);
}

double path_max_radius(const ProfilePath& path) {
  const auto& st = path.states;
  long best = 0;
  for (long i = 1; i < static_cast<long>(st.size()); ++i)
    if (st[i].v > st[best].v) best = i;
  if (best == 0 || best + 1 == static_cast<long>(st.size())) return st[best].v;
  // vertex of the parabola through the three samples around the maximum
  const double s0 = st[best - 1].s, s1 = st[best].s, s2 = st[best + 1].s;
  const double v0 = st[best - 1].v, v1 = st[best].v, v2 = st[best + 1].v;
  const double d1 = (v1 - v0) / (s1 - s0);
  const double d2 = (v2 - v1) / (s2 - s1);
  const double a = (d2 - d1) / (s2 - s0);
  if (!(a < 0)) return v1;
  const double sv = (s0 + s1) / 2 - d1 / (2 * a);
  if (sv < s0 || sv > s2) return v1;
  return v0 + d1 * (sv - s0) + a * (sv - s0) * (sv - s1);
}

// Signed miss distance at the first close approach to the axis.  An axis hit
// scores zero.  Otherwise v bottoms out at some interior minimum where
// sin(theta) = 0, and the profile either bounces back out (theta swings up
// through zero, cos(theta) > 0) or curls over itself (theta drops through
// -pi, cos(theta) < 0).  Closed profiles sit exactly on the switch between
// the two behaviors, so signing the miss by cos(theta) makes roots of this
// function coincide with closings.
double closing_miss(const ProfilePath& path) {
  if (path.terminated_by == ProfileEnd::AxisHit) return 0.0;
  const auto& st = path.states;
  for (size_t i = 1; i + 1 < st.size(); ++i) {
    if (st[i].v <= st[i - 1].v && st[i].v < st[i + 1].v)
      return std::cos(st[i].theta) >= 0 ? st[i].v : -st[i].v;
  }
  return kNoHitDefect;
}

}  // namespace

double ProfilePath::closure_defect() const {
  if (terminated_by != ProfileEnd::AxisHit) return kNoHitDefect;
  return axis_theta + kPi / 2;
}

std::array<double, 3> profile_rhs(const ProfileState& state,
                                  const ExpanderSpec& spec) {
  if (spec.n < 1) throw InvalidDimensionError("profile needs n >= 1");
  if (spec.n > 1 && state.v <= kAxisEps)
    throw AxisSingularityError("profile equation is singular at the axis");
  return rhs_raw(state.u, state.v, state.theta, spec);
}

ProfilePath integrate_profile(double u0, const ExpanderSpec& spec,
                              const IntegrateOptions& opts) {
  if (spec.n < 1) throw InvalidDimensionError("profile needs n >= 1");
  if (!(opts.s_max > 0)) throw UsageError("s_max must be positive");
  if (opts.h_ode < 0) throw UsageError("h_ode must be positive");
  const double h =
      opts.h_ode > 0 ? opts.h_ode : 1e-3 * std::max(1.0, std::abs(u0));

  ProfilePath path;
  path.spec = spec;
  path.step = h;
  path.states.push_back({0, u0, 0, kPi / 2});

  // The equation is 0/0 on the axis, so the first step is a series.  With
  // phi = pi/2 - theta:
  //   phi = a1 s + a3 s^3,  a1 = (lambda + u0/2)/n,
  //   a3 = -a1 (1 + u0 a1) / (4 (n + 2)),
  // and u, v follow by integrating cos(theta), sin(theta) termwise.
  const double a1 = (spec.lambda + u0 / 2) / spec.n;
  const double a3 = -a1 * (1 + u0 * a1) / (4 * (spec.n + 2));
  double s1 = std::min(h / 2, opts.s_max / 2);
  if (std::abs(a1) * s1 > 0.3) s1 = 0.3 / std::abs(a1);
  RawState y;
  y.s = s1;
  y.u = u0 + a1 * s1 * s1 / 2 +
        (a3 - a1 * a1 * a1 / 6) * s1 * s1 * s1 * s1 / 4;
  y.v = s1 - a1 * a1 * s1 * s1 * s1 / 6;
  y.theta = kPi / 2 - (a1 * s1 + a3 * s1 * s1 * s1);
  path.states.push_back({y.s, y.u, y.v, y.theta});

  const double tol_end = 1e-12 * std::max(1.0, opts.s_max);
  while (y.s < opts.s_max - tol_end) {
    double hstep = std::min(h, opts.s_max - y.s);
    // Close approach (n >= 2): scale the step with the distance to the axis
    // so no RK stage straddles v = 0.  The factor keeps the per-step
    // truncation against the (n-1) cos(theta)/v term at a fixed, small
    // relative size; v/4 is already safe but leaves enough theta drift
    // through the approach band to displace weakly unstable shooting roots.
    // No stall is possible: where v is small the 1/v term swings theta
    // through any sin(theta) = 0 vertex at ~1/16 rad per step, after which
    // either v grows again or the termination below fires.
    if (spec.n > 1 && y.v < 4 * h && std::sin(y.theta) < 0)
      hstep = std::min(hstep, std::max(y.v / 16, opts.v_axis_eps / 4));
    // Near the axis theta can turn at ~1/v on any heading (curl vertices
    // spin fastest on the way back out), so also bound the turn per step.
    if (spec.n > 1 && y.v < 4 * h) {
      const double turn = std::abs(rhs_raw(y.u, y.v, y.theta, spec)[2]);
      if (turn * hstep > 0.1)
        hstep = std::max(0.1 / turn, opts.v_axis_eps / 4);
    }
    const RawState trial = rk4_step(y, hstep, spec);
    if (finite_state(trial) && trial.v > 0) {
      y = trial;
      path.states.push_back({y.s, y.u, y.v, y.theta});
      if (spec.n > 1 && y.v <= opts.v_axis_eps && std::sin(y.theta) < 0) {
        // Still heading in at the axis threshold: land by extrapolation
        // rather than stepping into the singular sliver.
        const double dt = y.v / -std::sin(y.theta);
        path.terminated_by = ProfileEnd::AxisHit;
        path.axis_s = y.s + dt;
        path.axis_theta = y.theta + rhs_raw(y.u, y.v, y.theta, spec)[2] * dt;
        break;
      }
      continue;
    }
    // A full step crossed v = 0 (plane curves; n >= 2 never gets here once
    // the shrinking engages).  Bisect toward the crossing, stopping at the
    // axis threshold before theta picks up singular error.
    double width = hstep;
    const double s_before = y.s;
    while (width > 1e-12 && y.v > opts.v_axis_eps) {
      const RawState mid = rk4_step(y, width / 2, spec);
      if (finite_state(mid) && mid.v > 0) y = mid;
      width /= 2;
    }
    if (y.s > s_before) path.states.push_back({y.s, y.u, y.v, y.theta});
    if (y.v <= opts.v_axis_eps) {
      path.terminated_by = ProfileEnd::AxisHit;
      path.axis_s = y.s + width;
      path.axis_theta = y.theta;
    } else {
      path.terminated_by = ProfileEnd::NonFinite;
    }
    break;
  }
  return path;
}

ProfilePath planar_curve(const ExpanderSpec& spec, const ProfileState& start,
                         double s_max, double h_ode) {
  if (spec.n != 1) throw InvalidDimensionError("plane curves need n = 1");
  if (!(s_max > 0) || !(h_ode > 0))
    throw UsageError("s_max and h_ode must be positive");

  ProfilePath path;
  path.spec = spec;
  path.step = h_ode;
  path.planar = true;
  RawState y{start.s, start.u, start.v, start.theta};
  path.states.push_back({y.s, y.u, y.v, y.theta});
  const double s_end = start.s + s_max;
  const double tol_end = 1e-12 * std::max(1.0, std::abs(s_end));
  while (y.s < s_end - tol_end) {
    const RawState trial = rk4_step(y, std::min(h_ode, s_end - y.s), spec);
    if (!finite_state(trial)) {
      path.terminated_by = ProfileEnd::NonFinite;
      break;
    }
    y = trial;
    path.states.push_back({y.s, y.u, y.v, y.theta});
  }
  return path;
}

ShootingResult shoot_closed(const ExpanderSpec& spec, double u0_lo,
                            double u0_hi, int n_samples,
                            const IntegrateOptions& opts) {
  if (!(u0_hi < 0)) throw UsageError("u0 range must stay negative");
  if (!(u0_lo < u0_hi)) throw UsageError("u0 range must be increasing");
  if (n_samples < 16) throw UsageError("need at least 16 u0 samples");

  ShootingResult out;
  out.spec = spec;
  out.samples.assign(n_samples, {});
  // Tight landing threshold while refining: the width of the u0 window that
  // registers as an axis hit scales with v_axis_eps, and with steps already
  // shrinking near the axis the tighter landing costs almost nothing.
  IntegrateOptions topts = opts;
  topts.v_axis_eps = std::min(opts.v_axis_eps, 1e-9);
  std::vector<double> defect(n_samples);
  parallel_for(n_samples, [&](long i) {
    const double u0 =
        u0_lo + (u0_hi - u0_lo) * static_cast<double>(i) / (n_samples - 1);
    const double d = closing_miss(integrate_profile(u0, spec, topts));
    out.samples[i] = {u0, d};
    defect[i] = d;
  });

  std::vector<ShootingRoot> roots;
  std::vector<double> root_defect;
  auto add_root = [&](double u0, double d, const ProfilePath& path) {
    const double radius = path_max_radius(path);
    for (size_t k = 0; k < roots.size(); ++k) {
      if (std::abs(roots[k].u0 - u0) <=
          1e-3 * std::max(1.0, std::abs(u0))) {
        if (std::abs(d) < std::abs(root_defect[k])) {
          roots[k] = {u0, radius};
          root_defect[k] = d;
        }
        return;
      }
    }
    roots.push_back({u0, radius});
    root_defect.push_back(d);
  };

  // samples that already close to tolerance
  for (int i = 0; i < n_samples; ++i) {
    if (std::abs(defect[i]) <= 1e-8) {
      const double u0 = out.samples[i][0];
      add_root(u0, defect[i], integrate_profile(u0, spec, topts));
    }
  }

  // simple roots: bisect each sign change of the miss between adjacent
  // samples (the escaped-outward sentinel participates as a positive miss).
  // The root is taken at the converged sign flip, not at the smallest |miss|
  // seen: strongly unstable closings amplify deviations along the loop so
  // the miss magnitude has a floor well above roundoff, while weakly
  // unstable ones bury a wide u0 window under integration noise -- in both
  // cases the flip location stays sharp.
  for (int i = 0; i + 1 < n_samples; ++i) {
    double a = out.samples[i][0], fa = defect[i];
    double b = out.samples[i + 1][0], fb = defect[i + 1];
    if (!(fa * fb < 0)) continue;
    double best_f = kNoHitDefect;
    for (int it = 0; it < 200; ++it) {
      const double mid = (a + b) / 2;
      const double fm = closing_miss(integrate_profile(mid, spec, topts));
      best_f = std::min(best_f, std::abs(fm));
      if (b - a < 1e-13 * std::max(1.0, std::abs(mid))) break;
      if ((fm < 0) == (fa < 0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
        fb = fm;
      }
    }
    // Gate on the floor reached: closings get within a whisker of the axis
    // at some point, whereas sign flips caused by the first v-minimum
    // jumping elsewhere (disappearing into a shoulder, or crossing s_max)
    // keep the miss at order one and are discarded.
    if (best_f <= 1e-3) {
      const double u0 = (a + b) / 2;
      add_root(u0, best_f, integrate_profile(u0, spec, topts));
    }
  }

  // tangential roots: minimize |defect| around interior local minima that
  // sit below 0.05 without a sign change
  for (int i = 1; i + 1 < n_samples; ++i) {
    const double m0 = std::abs(defect[i - 1]);
    const double m1 = std::abs(defect[i]);
    const double m2 = std::abs(defect[i + 1]);
    if (!(m1 < 0.05 && m0 > m1 && m2 > m1)) continue;
    if (defect[i - 1] * defect[i] < 0 || defect[i] * defect[i + 1] < 0)
      continue;
    double a = out.samples[i - 1][0], b = out.samples[i + 1][0];
    const double gr = (std::sqrt(5.0) - 1) / 2;
    const auto g = [&](double u0) {
      return std::abs(closing_miss(integrate_profile(u0, spec, topts)));
    };
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = g(c), fd = g(d);
    for (int it = 0;
         it < 200 && (b - a) > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = g(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = g(d);
      }
    }
    const double u0 = fc < fd ? c : d;
    const ProfilePath p = integrate_profile(u0, spec, topts);
    const double dv = closing_miss(p);
    if (std::abs(dv) <= 1e-8) add_root(u0, dv, p);
  }

  std::sort(roots.begin(), roots.end(),
            [](const ShootingRoot& x, const ShootingRoot& y) {
              return x.u0 < y.u0;
            });
  out.roots = std::move(roots);
  return out;
}

std::string to_json(const ShootingResult& result) {
  nlohmann::json j;
  j["lambda"] = result.spec.lambda;
  j["n"] = result.spec.n;
  j["roots"] = nlohmann::json::array();
  for (const auto& r : result.roots)
    j["roots"].push_back({{"u0", r.u0}, {"radius", r.radius}});
  j["samples"] = nlohmann::json::array();
  for (const auto& s : result.samples)
    j["samples"].push_back({s[0], s[1]});
  return j.dump(2);
}

ProfileDense::ProfileDense(const ProfilePath& path) {
  if (path.states.size() < 2)
    throw DegeneratePathError("interpolation needs at least 2 knots");
  knots_.reserve(path.states.size());
  for (const auto& st : path.states) {
    Knot k;
    k.s = st.s;
    k.u = st.u;
    k.v = st.v;
    k.theta = st.theta;
    k.du = std::cos(st.theta);
    k.dv = std::sin(st.theta);
    if (path.spec.n > 1 && st.v <= kAxisEps) {
      // regularized slope at (near-)axis knots
      const double sg = k.dv >= 0 ? 1.0 : -1.0;
      k.dtheta = -(path.spec.lambda + sg * st.u / 2) / path.spec.n;
    } else {
      k.dtheta = rhs_raw(st.u, st.v, st.theta, path.spec)[2];
    }
    knots_.push_back(k);
  }
  for (size_t i = 1; i < knots_.size(); ++i)
    if (!(knots_[i].s > knots_[i - 1].s))
      throw DegeneratePathError("knots must increase in s");
}

long ProfileDense::interval(double& s) const {
  const double lo = knots_.front().s, hi = knots_.back().s;
  if (s < lo - 1e-9 * std::max(1.0, hi - lo) ||
      s > hi + 1e-9 * std::max(1.0, hi - lo))
    throw UsageError("sample outside the profile range");
  s = std::min(std::max(s, lo), hi);
  const auto it =
      std::upper_bound(knots_.begin(), knots_.end(), s,
                       [](double x, const Knot& k) { return x < k.s; });
  const long i = (it - knots_.begin()) - 1;
  return std::min(std::max(i, 0L), static_cast<long>(knots_.size()) - 2);
}

double ProfileDense::eval(double s, double Knot::*value, double Knot::*slope,
                          bool derivative) const {
  const long i = interval(s);
  const Knot& A = knots_[i];
  const Knot& B = knots_[i + 1];
  const double w = B.s - A.s;
  const double t = (s - A.s) / w;
  const double y0 = A.*value, y1 = B.*value;
  const double m0 = A.*slope, m1 = B.*slope;
  if (!derivative) {
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * y0 + h10 * w * m0 + h01 * y1 + h11 * w * m1;
  }
  const double g00 = 6 * t * t - 6 * t;
  const double g10 = 3 * t * t - 4 * t + 1;
  const double g11 = 3 * t * t - 2 * t;
  return g00 / w * y0 + g10 * m0 - g00 / w * y1 + g11 * m1;
}

std::vector<double> ProfileDense::knot_positions() const {
  std::vector<double> out;
  out.reserve(knots_.size());
  for (const auto& k : knots_) out.push_back(k.s);
  return out;
}

double ProfileDense::u(double s) const {
  return eval(s, &Knot::u, &Knot::du, false);
}
double ProfileDense::v(double s) const {
  return eval(s, &Knot::v, &Knot::dv, false);
}
double ProfileDense::theta(double s) const {
  return eval(s, &Knot::theta, &Knot::dtheta, false);
}
double ProfileDense::dtheta(double s) const {
  return eval(s, &Knot::theta, &Knot::dtheta, true);
}

namespace {

GeomJet revolution_jet_values(int n, double u, double v, double theta,
                              double dtheta, const Vector& w) {
  GeomJet jet;
  const double c = std::cos(theta), sn = std::sin(theta);
  jet.x = Vector(n + 1);
  jet.x[0] = u;
  jet.x.tail(n) = v * w;
  jet.normal = Vector(n + 1);
  jet.normal[0] = -sn;
  jet.normal.tail(n) = c * w;
  jet.tangent_basis = Matrix::Zero(n + 1, n);
  jet.tangent_basis(0, 0) = c;
  jet.tangent_basis.col(0).tail(n) = sn * w;
  if (n > 1)
    jet.tangent_basis.block(1, 1, n, n - 1) = v * orthonormal_complement(w);
  jet.metric = Matrix::Identity(n, n);
  jet.metric.diagonal().tail(n - 1).setConstant(v * v);
  const double korb = -c / v;
  jet.shape_operator = korb * Matrix::Identity(n, n);
  jet.shape_operator(0, 0) = dtheta;
  Vector pcs(n);
  pcs[0] = dtheta;
  pcs.tail(n - 1).setConstant(korb);
  std::sort(pcs.data(), pcs.data() + n);
  jet.principal_curvatures = pcs;
  jet.H = -dtheta - (n - 1) * korb;
  jet.normA2 = dtheta * dtheta + (n - 1) * korb * korb;
  jet.trA3 =
      dtheta * dtheta * dtheta + (n - 1) * korb * korb * korb;
  const double xn = -u * sn + v * c;
  jet.x_tan = jet.x - xn * jet.normal;
  jet.normXtan2 = jet.x_tan.squaredNorm();
  const double p = u * c + v * sn;
  jet.A_xt_xt = dtheta * p * p;
  return jet;
}

}  // namespace

RevolutionProfile RevolvedSurface::profile() const {
  RevolutionProfile prof;
  prof.n = spec.n;
  prof.s_lo = dense.s_lo();
  prof.s_hi = dense.s_hi();
  const ProfileDense d = dense;
  prof.u = [d](double s) { return d.u(s); };
  prof.v = [d](double s) { return d.v(s); };
  prof.theta = [d](double s) { return d.theta(s); };
  prof.dtheta = [d](double s) { return d.dtheta(s); };
  return prof;
}

ImmersedPatch RevolvedSurface::patch(double s_lo, double s_hi) const {
  if (spec.n != 2)
    throw InvalidDimensionError("revolution charts are built for n = 2");
  const double tol = 1e-9 * std::max(1.0, dense.s_hi() - dense.s_lo());
  if (!(s_lo < s_hi) || s_lo < dense.s_lo() - tol ||
      s_hi > dense.s_hi() + tol)
    throw UsageError("chart range must lie inside the profile range");
  ImmersedPatch p;
  p.intrinsic_dim = 2;
  p.domain_lo = Vector(2);
  p.domain_lo << s_lo, 0;
  p.domain_hi = Vector(2);
  p.domain_hi << s_hi, 2 * kPi;
  const ProfileDense d = dense;
  p.embedding = [d](const Vector& q) {
    const double uu = d.u(q[0]), vv = d.v(q[0]);
    Vector x(3);
    x << uu, vv * std::cos(q[1]), vv * std::sin(q[1]);
    return x;
  };
  p.orientation = -1;  // chart cross product is opposite the profile normal
  return p;
}

GeomJet RevolvedSurface::jet(double s, const Vector& omega) const {
  if (omega.size() != spec.n)
    throw InvalidDimensionError("orbit direction has wrong size");
  const Vector w = omega / omega.norm();
  const double vv = dense.v(s);
  if (!(vv > kAxisEps))
    throw AxisSingularityError("jet requested too close to the axis");
  return revolution_jet_values(spec.n, dense.u(s), vv, dense.theta(s),
                               dense.dtheta(s), w);
}

GeomJet RevolvedSurface::fd_jet(double s, const Vector& omega,
                                double h) const {
  const ProfileDense d = dense;
  return revolution_fd_jet([d](double t) { return d.u(t); },
                           [d](double t) { return d.v(t); }, spec.n, s, omega,
                           h);
}

RevolvedSurface revolve(const ProfilePath& path, int n) {
  if (n < 2) throw InvalidDimensionError("revolution needs n >= 2");
  if (path.states.size() < 8)
    throw DegeneratePathError("revolution needs at least 8 profile samples");
  for (size_t i = 1; i + 1 < path.states.size(); ++i)
    if (!(path.states[i].v > 0))
      throw DegeneratePathError(
          "orbit radius must be positive away from the path ends");
  RevolvedSurface surf;
  surf.spec = {n, path.spec.lambda};
  surf.dense = ProfileDense(path);
  return surf;
}

GeomJet revolution_fd_jet(const std::function<double(double)>& u_fn,
                          const std::function<double(double)>& v_fn, int n,
                          double s, const Vector& omega, double h) {
  if (n < 2) throw InvalidDimensionError("revolution jets need n >= 2");
  if (!(h > 0)) throw UsageError("step must be positive");
  if (omega.size() != n)
    throw InvalidDimensionError("orbit direction has wrong size");
  const Vector w = omega / omega.norm();

  // centered chords of the profile and of its unit normal
  const auto chord = [&](double sig, double& tu, double& tv) {
    tu = (u_fn(sig + h) - u_fn(sig - h)) / (2 * h);
    tv = (v_fn(sig + h) - v_fn(sig - h)) / (2 * h);
    return std::atan2(tv, tu);
  };
  double tu_m, tv_m, tu_0, tv_0, tu_p, tv_p;
  const double th_m = chord(s - h, tu_m, tv_m);
  const double th_0 = chord(s, tu_0, tv_0);
  const double th_p = chord(s + h, tu_p, tv_p);

  const double g_ss = tu_0 * tu_0 + tv_0 * tv_0;
  if (g_ss <= 1e-20) throw SingularMetricError("degenerate profile chord");
  const double dn_u = (-std::sin(th_p) + std::sin(th_m)) / (2 * h);
  const double dn_v = (std::cos(th_p) - std::cos(th_m)) / (2 * h);
  const double b_ss = -(dn_u * tu_0 + dn_v * tv_0);
  const double k_prof = b_ss / g_ss;

  const double v0 = v_fn(s), u0 = u_fn(s);
  if (!(v0 > 1e-12))
    throw AxisSingularityError("jet requested too close to the axis");
  const double c0 = std::cos(th_0), sn0 = std::sin(th_0);
  const double k_orb = -c0 / v0;

  GeomJet jet;
  jet.x = Vector(n + 1);
  jet.x[0] = u0;
  jet.x.tail(n) = v0 * w;
  jet.normal = Vector(n + 1);
  jet.normal[0] = -sn0;
  jet.normal.tail(n) = c0 * w;
  jet.tangent_basis = Matrix::Zero(n + 1, n);
  jet.tangent_basis(0, 0) = tu_0;
  jet.tangent_basis.col(0).tail(n) = tv_0 * w;
  jet.tangent_basis.block(1, 1, n, n - 1) = v0 * orthonormal_complement(w);
  jet.metric = Matrix::Identity(n, n);
  jet.metric(0, 0) = g_ss;
  jet.metric.diagonal().tail(n - 1).setConstant(v0 * v0);
  jet.shape_operator = k_orb * Matrix::Identity(n, n);
  jet.shape_operator(0, 0) = k_prof;
  Vector pcs(n);
  pcs[0] = k_prof;
  pcs.tail(n - 1).setConstant(k_orb);
  std::sort(pcs.data(), pcs.data() + n);
  jet.principal_curvatures = pcs;
  jet.H = -k_prof - (n - 1) * k_orb;
  jet.normA2 = k_prof * k_prof + (n - 1) * k_orb * k_orb;
  jet.trA3 =
      k_prof * k_prof * k_prof + (n - 1) * k_orb * k_orb * k_orb;
  const double xn = jet.x.dot(jet.normal);
  jet.x_tan = jet.x - xn * jet.normal;
  jet.normXtan2 = jet.x_tan.squaredNorm();
  const double p = (u0 * tu_0 + v0 * tv_0) / std::sqrt(g_ss);
  jet.A_xt_xt = k_prof * p * p;
  return jet;
}

std::vector<double> path_residual_knots(const ProfilePath& path) {
  const auto& st = path.states;
  const long m = static_cast<long>(st.size());
  // longest run of uniformly spaced knots
  long best_i = 0, best_len = 1;
  long i = 0;
  while (i + 1 < m) {
    const double d0 = st[i + 1].s - st[i].s;
    long j = i + 1;
    while (j + 1 < m && std::abs((st[j + 1].s - st[j].s) - d0) <= 1e-9 * d0)
      ++j;
    if (j - i + 1 > best_len) {
      best_len = j - i + 1;
      best_i = i;
    }
    i = j;
  }
  if (best_len < 7)
    throw UsageError("need at least 7 uniformly spaced knots");
  const double h = st[best_i + 1].s - st[best_i].s;

  std::vector<double> out;
  for (long k = best_i + 2; k + 2 <= best_i + best_len - 1; ++k) {
    const auto& q = st[k];
    const double dth = (st[k - 2].theta - 8 * st[k - 1].theta +
                        8 * st[k + 1].theta - st[k + 2].theta) /
                       (12 * h);
    double res =
        -dth + (-q.u * std::sin(q.theta) + q.v * std::cos(q.theta)) / 2 -
        path.spec.lambda;
    if (path.spec.n > 1) res += (path.spec.n - 1) * std::cos(q.theta) / q.v;
    out.push_back(std::abs(res));
  }
  return out;
}

std::string to_csv(const ProfilePath& path) {
  std::string out = "s,u,v,theta\n";
  char buf[160];
  for (const auto& st : path.states) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", st.s, st.u,
                  st.v, st.theta);
    out += buf;
  }
  return out;
}

ProfilePath path_from_csv(const std::string& text, const ExpanderSpec& spec) {
  ProfilePath path;
  path.spec = spec;
  path.planar = spec.n == 1;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ProfileState st;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &st.s, &st.u, &st.v,
                    &st.theta) != 4) {
      if (path.states.empty()) continue;  // header
      throw UsageError("malformed profile row: " + line);
    }
    if (!std::isfinite(st.s) || !std::isfinite(st.u) ||
        !std::isfinite(st.v) || !std::isfinite(st.theta))
      throw NonFiniteError("non-finite profile row");
    if (!path.states.empty() && !(st.s > path.states.back().s))
      throw UsageError("profile rows must increase in s");
    path.states.push_back(st);
  }
  if (path.states.size() < 2) throw UsageError("profile needs at least 2 rows");
  path.step = path.states[1].s - path.states[0].s;
  return path;
}

}  // namespace expanderlab
