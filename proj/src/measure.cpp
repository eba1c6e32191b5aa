#include "expanderlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"

namespace expanderlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double profile_H(const RevolutionProfile& prof, double s) {
  const double dth = prof.dtheta(s);
  const double v = prof.v(s);
  // On the axis cos(theta)/v tends to -theta', so H tends to -n theta'.
  if (std::abs(v) < 1e-9) return -prof.n * dth;
  return -dth + (prof.n - 1) * std::cos(prof.theta(s)) / v;
}

}  // namespace

double unit_sphere_area(int dim) {
  if (dim < 1) throw InvalidDimensionError("unit_sphere_area: dim must be >= 1");
  return 2.0 * std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0);
}

double simpson(const std::function<double(double)>& f, double a, double b,
               long panels) {
  if (panels < 2) panels = 2;
  if (panels % 2 == 1) ++panels;
  if (!(b > a)) return 0.0;
  const double h = (b - a) / static_cast<double>(panels);
  double acc = f(a) + f(b);
  for (long i = 1; i < panels; ++i)
    acc += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return acc * h / 3.0;
}

double weighted_profile_integral(const RevolutionProfile& prof, double alpha,
                                 double R, double delta,
                                 const std::function<double(double)>& extra,
                                 const ProfileIntegralOptions& opts) {
  if (prof.n < 1) throw InvalidDimensionError("weighted_profile_integral: n >= 1");
  if (!(R > 0)) throw UsageError("weighted_profile_integral: R must be positive");
  if (delta < 0) throw UsageError("weighted_profile_integral: delta must be >= 0");
  if (opts.panels < 2) throw UsageError("weighted_profile_integral: too few panels");

  const double R2 = R * R;
  auto q = [&](double s) {  // |x|^2 - R^2; the ball is q <= 0
    const double u = prof.u(s), v = prof.v(s);
    return u * u + v * v - R2;
  };

  // Unbounded ends: march outward with doubling steps until outside the ball.
  double lo = prof.s_lo, hi = prof.s_hi;
  if (prof.unbounded_below) {
    double step = std::max(1.0, hi - lo);
    for (int it = 0; it < 60 && q(lo) <= 0; ++it) {
      lo -= step;
      step *= 2;
    }
  }
  if (prof.unbounded_above) {
    double step = std::max(1.0, hi - lo);
    for (int it = 0; it < 60 && q(hi) <= 0; ++it) {
      hi += step;
      step *= 2;
    }
  }
  if (!(hi > lo)) return 0.0;

  // Locate ball-boundary crossings on a scan grid, then bisect each.
  const long n_scan = std::max<long>(opts.panels, 1024);
  std::vector<double> cuts;
  cuts.push_back(lo);
  double s_prev = lo, q_prev = q(lo);
  for (long i = 1; i <= n_scan; ++i) {
    const double s = lo + (hi - lo) * static_cast<double>(i) / n_scan;
    const double qs = q(s);
    if ((q_prev <= 0) != (qs <= 0)) {
      double a = s_prev, b = s;
      for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
        const double mid = 0.5 * (a + b);
        if ((q(mid) <= 0) == (q_prev <= 0))
          a = mid;
        else
          b = mid;
      }
      cuts.push_back(0.5 * (a + b));
    }
    s_prev = s;
    q_prev = qs;
  }
  cuts.push_back(hi);

  const double omega = unit_sphere_area(prof.n);
  auto integrand = [&](double s) {
    const double u = prof.u(s), v = prof.v(s);
    double w = omega * std::pow(std::abs(v), prof.n - 1) *
               std::exp(-alpha * (u * u + v * v) / 4.0);
    if (delta > 0) w *= std::pow(std::abs(profile_H(prof, s)), delta);
    if (extra) w *= extra(s);
    if (!std::isfinite(w)) throw NonFiniteError("weighted_profile_integral: integrand");
    return w;
  };

  double total = 0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (!(b - a > 1e-14)) continue;
    if (q(0.5 * (a + b)) > 0) continue;  // segment outside the ball
    total += simpson(integrand, a, b, opts.panels);
  }
  return total;
}

double weighted_area(const RevolutionProfile& prof, double alpha, double R,
                     const ProfileIntegralOptions& opts) {
  return weighted_profile_integral(prof, alpha, R, 0, nullptr, opts);
}

double weighted_area(const SurfaceGrid& surface, double alpha) {
  const Grid& g = surface.grid();
  for (int m : g.npts)
    if (m < 3 || m % 2 == 0)
      throw UsageError("weighted_area: need an odd node count along every axis");
  double total = 0;
  for (long flat = 0; flat < g.size(); ++flat) {
    const auto idx = g.unflat(flat);
    double wq = 1;
    for (size_t axis = 0; axis < idx.size(); ++axis) {
      // composite Simpson weights 1,4,2,...,2,4,1 per axis
      const int k = idx[axis];
      double w = k % 2 == 1 ? 4.0 : 2.0;
      if (k == 0 || k == g.npts[axis] - 1) w = 1.0;
      wq *= w * g.h / 3.0;
    }
    const GeomJet& jet = surface.jet(flat);
    total += wq * std::sqrt(jet.metric.determinant()) *
             std::exp(-alpha * jet.x.squaredNorm() / 4.0);
  }
  return total;
}

double ball_area(const RevolutionProfile& prof, double r,
                 const ProfileIntegralOptions& opts) {
  return weighted_profile_integral(prof, 0, r, 0, nullptr, opts);
}

AreaSeries ball_area_series(const RevolutionProfile& prof,
                            const std::vector<double>& radii,
                            const ProfileIntegralOptions& opts) {
  if (radii.size() < 2) throw UsageError("ball_area_series: need at least 2 radii");
  for (size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i] < radii[i + 1]))
      throw UsageError("ball_area_series: radii must be strictly increasing");
  AreaSeries series;
  series.radii = radii;
  series.areas.reserve(radii.size());
  for (double r : radii) series.areas.push_back(ball_area(prof, r, opts));
  return series;
}

AreaFit growth_fit(AreaSeries& series, double alpha) {
  const long m = static_cast<long>(series.radii.size());
  if (m < 2 || series.areas.size() != series.radii.size())
    throw UsageError("growth_fit: empty or ragged series");
  const long lo = m / 2;
  if (m - lo < 8) throw UsageError("growth_fit: need at least 8 radii in the window");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (long i = lo; i < m; ++i) {
    if (!(series.areas[i] > 0))
      throw UsageError("growth_fit: areas must be positive");
    const double x = series.radii[i] * series.radii[i] / 4.0;
    const double y = std::log(series.areas[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double cnt = static_cast<double>(m - lo);
  const double det = cnt * sxx - sx * sx;
  if (!(std::abs(det) > 1e-30)) throw UsageError("growth_fit: degenerate window");

  AreaFit fit;
  fit.slope = (cnt * sxy - sx * sy) / det;
  fit.C = std::exp((sy * sxx - sx * sxy) / det);
  fit.window_lo = lo;
  fit.window_hi = m - 1;
  series.fit = fit;
  series.alpha = alpha;
  return fit;
}

std::string to_csv(const AreaSeries& series) {
  std::string out = "r,area\n";
  char line[128];
  for (size_t i = 0; i < series.radii.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g\n", series.radii[i],
                  series.areas[i]);
    out += line;
  }
  return out;
}

std::string fit_json(const AreaSeries& series) {
  nlohmann::json j;
  j["C"] = series.fit.C;
  j["slope"] = series.fit.slope;
  j["alpha"] = series.alpha;
  return j.dump(2);
}

LinearBound mean_curvature_linear_bound(
    const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 2)
    throw UsageError("mean_curvature_linear_bound: need at least 2 samples");
  for (const auto& s : samples)
    if (!std::isfinite(s.first) || !std::isfinite(s.second) || s.first < 0 ||
        s.second < 0)
      throw UsageError("mean_curvature_linear_bound: samples must be finite and >= 0");

  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const auto& s : samples) xs.push_back(s.first);
  std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
  const double median = xs[xs.size() / 2];

  for (int k = 0; k <= 99; ++k) {
    const double a = 0.005 * k;
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) m = std::max(m, s.second - a * s.first);
    double arg_x = std::numeric_limits<double>::infinity();
    for (const auto& s : samples)
      if (s.second - a * s.first >= m - 1e-9) arg_x = std::min(arg_x, s.first);
    if (arg_x <= median + 1e-9) {
      LinearBound out;
      out.a = a;
      out.b = std::max(0.0, m);
      out.alpha_star = 4 * a * a / (1 - 4 * a * a);
      return out;
    }
  }
  LinearBound out;
  out.a = 0.5;
  out.b = 0;
  out.alpha_star = std::numeric_limits<double>::infinity();
  out.growth_exceeds_half = true;
  return out;
}

LinearBound mean_curvature_linear_bound(const RevolutionProfile& prof,
                                        int n_samples) {
  if (n_samples < 2)
    throw UsageError("mean_curvature_linear_bound: need at least 2 samples");
  if (!(prof.s_hi > prof.s_lo))
    throw UsageError("mean_curvature_linear_bound: empty arclength range");
  std::vector<std::pair<double, double>> samples;
  samples.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double s =
        prof.s_lo + (prof.s_hi - prof.s_lo) * i / double(n_samples - 1);
    const double u = prof.u(s), v = prof.v(s);
    samples.emplace_back(std::hypot(u, v), std::abs(profile_H(prof, s)));
  }
  return mean_curvature_linear_bound(samples);
}

HIntegralReport weighted_H_integral(const RevolutionProfile& prof, double delta,
                                    double alpha, double R,
                                    const ProfileIntegralOptions& opts) {
  if (delta < 0) throw UsageError("weighted_H_integral: delta must be >= 0");
  if (!(R > 0)) throw UsageError("weighted_H_integral: R must be positive");
  HIntegralReport rep;
  rep.partials.reserve(8);
  for (int k = 1; k <= 8; ++k)
    rep.partials.push_back(
        weighted_profile_integral(prof, alpha, k * R / 8.0, delta, nullptr, opts));
  rep.value = rep.partials.back();
  const double inc_last = rep.partials[7] - rep.partials[6];
  const double inc_prev = rep.partials[6] - rep.partials[5];
  rep.last_ratio = std::abs(inc_prev) > 1e-300 ? inc_last / inc_prev : 0.0;
  return rep;
}

}  // namespace expanderlab
