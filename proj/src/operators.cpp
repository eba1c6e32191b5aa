#include "expanderlab/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "json.hpp"

#include "expanderlab/parallel.hpp"

namespace expanderlab {

namespace {

constexpr int kNumIdentities = 10;
constexpr std::array<const char*, kNumIdentities> kIdentityNames = {
    "drift_H",
    "drift_x2",
    "laplace_x2",
    "x_grad_H",
    "alpha_drift_x2[alpha=1]",
    "alpha_drift_H_grad[alpha=0]",
    "alpha_drift_H_grad[alpha=1]",
    "alpha_drift_H_shape[alpha=0]",
    "alpha_drift_H_shape[alpha=1]",
    "alpha_drift_H2[alpha=1]",
};

using LevelStats = std::array<std::pair<double, double>, kNumIdentities>;

// max/mean absolute residual of each identity over the interior nodes
LevelStats eval_level(const SurfaceGrid& sg, const ExpanderSpec& spec,
                      double margin) {
  const Grid& grid = sg.grid();
  std::vector<long> pts;
  for (long i = 0; i < grid.size(); ++i)
    if (grid.interior(i, margin)) pts.push_back(i);
  if (pts.empty()) throw UsageError("identity window has no interior nodes");

  const GridField H = sg.sample([](const GeomJet& j) { return j.H; });
  const GridField x2 =
      sg.sample([](const GeomJet& j) { return j.x.squaredNorm(); });
  const GridField H2 = sg.sample([](const GeomJet& j) { return j.H * j.H; });

  std::vector<std::array<double, kNumIdentities>> res(pts.size());
  parallel_for(static_cast<long>(pts.size()), [&](long q) {
    const long i = pts[static_cast<size_t>(q)];
    const GeomJet& jet = sg.jet(i);
    const double lam = spec.lambda;
    const double n = jet.dim();
    const double lapH = sg.laplace_beltrami(H, i);
    const double lapx2 = sg.laplace_beltrami(x2, i);
    const double lapH2 = sg.laplace_beltrami(H2, i);
    const Vector gradH = sg.surface_gradient(H, i);
    const double xgH = jet.x.dot(gradH);
    const double xgx2 = jet.x.dot(sg.surface_gradient(x2, i));
    const double xgH2 = jet.x.dot(sg.surface_gradient(H2, i));
    const double xn = jet.x.dot(jet.normal);
    const double Hv = jet.H, A2 = jet.normA2;

    auto& r = res[static_cast<size_t>(q)];
    r[0] = std::abs((lapH + xgH / 2) - (-A2 * (Hv - lam) - Hv / 2));
    r[1] = std::abs((lapx2 + xgx2 / 2) - (x2.at(i) - 2 * lam * xn + 2 * n));
    r[2] = std::abs(lapx2 - (-2 * Hv * xn + 2 * n));
    r[3] = std::abs(xgH - 0.5 * jet.A_xt_xt);
    const double tw = 2 * Hv - lam;
    r[4] = std::abs((lapx2 - xgx2 / 2) -
                    (tw * tw + 2 * n - lam * lam - jet.normXtan2));
    for (int t = 0; t < 2; ++t) {
      const double alpha = t;
      const double LaH = lapH - alpha / 2 * xgH;
      const double base = -A2 * (Hv - lam) - Hv / 2;
      r[5 + t] = std::abs(LaH - (base - (alpha + 1) / 2 * xgH));
      r[7 + t] = std::abs(LaH - (base - (alpha + 1) / 4 * jet.A_xt_xt));
    }
    {
      const double alpha = 1;
      const double LaH2 = lapH2 - alpha / 2 * xgH2;
      const Vector mod = gradH - (alpha + 1) / 4 * Hv * jet.x_tan;
      r[9] = std::abs(LaH2 - (-2 * A2 * (Hv - lam) * Hv - Hv * Hv +
                              2 * mod.squaredNorm() -
                              (alpha + 1) * (alpha + 1) / 8 * Hv * Hv *
                                  jet.normXtan2));
    }
  });

  LevelStats out{};
  for (const auto& r : res)
    for (int k = 0; k < kNumIdentities; ++k) {
      out[k].first = std::max(out[k].first, r[k]);
      out[k].second += r[k];
    }
  for (int k = 0; k < kNumIdentities; ++k)
    out[k].second /= static_cast<double>(res.size());
  return out;
}

}  // namespace

std::string to_json(const ResidualReport& report) {
  nlohmann::json j;
  j["identity"] = report.identity;
  j["h"] = report.h;
  j["max_abs"] = report.max_abs;
  j["mean_abs"] = report.mean_abs;
  j["order"] = report.order;  // NaN serializes as null
  j["lambda"] = report.spec.lambda;
  j["n"] = report.spec.n;
  return j.dump(2);
}

IdentityGridSource identity_source(const CanonicalSurface& surface, double h,
                                   double flat_extent) {
  if (surface.spec.n > 2)
    throw InvalidDimensionError(
        "identity grids need coordinate-frame jets (n <= 2)");
  if (!(h > 0)) throw UsageError("grid spacing must be positive");
  if (!(flat_extent > 0)) throw UsageError("window extent must be positive");

  Vector lo = surface.param_lo, hi = surface.param_hi;
  const double ext = std::min(flat_extent, kFlatExtent);
  if (surface.kind == SurfaceKind::Hyperplane) {
    lo.setConstant(-ext);
    hi.setConstant(ext);
  } else if (surface.kind == SurfaceKind::Cylinder) {
    lo[0] = -ext;
    hi[0] = ext;
  }
  const Grid coarse_grid = Grid::over_box(lo, hi, h);
  SurfaceGrid coarse =
      SurfaceGrid::closed_form(coarse_grid, surface.closed_form_jet);
  SurfaceGrid fine =
      SurfaceGrid::closed_form(coarse_grid.refined(), surface.closed_form_jet);

  double resid = 0;
  for (long i = 0; i < fine.size(); ++i)
    resid = std::max(resid,
                     std::abs(expander_residual(fine.jet(i), surface.spec)));
  return {surface.spec, std::move(coarse), std::move(fine), 3 * h, resid};
}

IdentityGridSource identity_source(const RevolvedSurface& surface, double s_lo,
                                   double s_hi, double h) {
  if (!(h > 0)) throw UsageError("grid spacing must be positive");
  // Sample the interpolated profile only at its own knots: nodes between
  // knots would feed interpolation error into the second differences, where
  // a 1/h^2 amplification buries the truncation signal being measured.  The
  // spacing is an even knot multiple so the refined grid stays knot-aligned.
  const std::vector<double> knots = surface.dense.knot_positions();
  if (knots.size() < 12) throw DegeneratePathError("profile has too few knots");
  const double step = knots[knots.size() / 2 + 1] - knots[knots.size() / 2];
  long mult = 2 * std::lround(h / (2 * step));
  if (mult < 2) mult = 2;
  const double h_eff = mult * step;
  size_t i0 = 1;  // skip the opening series knot; the run after it is uniform
  while (i0 + 1 < knots.size() && knots[i0] < s_lo - 1e-12) ++i0;
  const size_t i_last = knots.size() - 2;  // final knot may be a clamped step
  if (i0 >= i_last) throw UsageError("window lies outside the profile knots");
  const double lo = knots[i0];
  const double hi_cap = std::min(s_hi, knots[i_last]);
  long npts = static_cast<long>(std::floor((hi_cap - lo) / h_eff + 1e-9)) + 1;
  npts = std::min(npts, static_cast<long>((i_last - i0) / mult) + 1);
  if (npts < 7)
    throw UsageError("window too narrow for the stencil margin at this spacing");

  ImmersedPatch patch = surface.patch(lo, lo + (npts - 1) * h_eff);
  SurfaceGrid coarse = SurfaceGrid::finite_difference(patch, h_eff);
  SurfaceGrid fine = SurfaceGrid::finite_difference(patch, h_eff / 2);

  // Accurate expander residual along the profile (the revolution makes it
  // independent of the angle): H + <x, n>/2 - lambda in profile variables.
  double resid = 0;
  const Grid& g = fine.grid();
  for (int i = 0; i < g.npts[0]; ++i) {
    const double s = g.lo[0] + g.h * i;
    const double th = surface.dense.theta(s);
    const double dth = surface.dense.dtheta(s);
    const double uu = surface.dense.u(s), vv = surface.dense.v(s);
    const double H = -dth + (surface.spec.n - 1) * std::cos(th) / vv;
    const double xn = -uu * std::sin(th) + vv * std::cos(th);
    resid = std::max(resid, std::abs(H + xn / 2 - surface.spec.lambda));
  }
  return {surface.spec, std::move(coarse), std::move(fine), 3 * h_eff, resid};
}

std::vector<ResidualReport> scalar_identity_residuals(
    const IdentityGridSource& src, const IdentityOptions& options) {
  if (options.enforce_expander_gate && !(src.surface_residual <= 1e-6))
    throw NotAnExpanderError(
        "surface does not satisfy the expander equation to 1e-6");

  const LevelStats coarse = eval_level(src.coarse, src.spec, src.interior_margin);
  const LevelStats fine = eval_level(src.fine, src.spec, src.interior_margin);

  std::vector<ResidualReport> out;
  out.reserve(kNumIdentities);
  for (int k = 0; k < kNumIdentities; ++k) {
    ResidualReport rep;
    rep.identity = kIdentityNames[k];
    rep.h = src.coarse.grid().h;
    rep.max_abs = coarse[k].first;
    rep.mean_abs = coarse[k].second;
    rep.order = (coarse[k].first > 1e-13 && fine[k].first > 1e-13)
                    ? std::log2(coarse[k].first / fine[k].first)
                    : std::numeric_limits<double>::quiet_NaN();
    rep.spec = src.spec;
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<AlgebraicIdentity> parallel_A_identity_check(
    const CanonicalSurface& surface) {
  const Vector mid = 0.5 * (surface.param_lo + surface.param_hi);
  const GeomJet jet = surface.closed_form_jet(mid);
  const double lam = surface.spec.lambda;
  const double A2 = jet.normA2;
  const double t3 = jet.trA3;
  const double H = jet.H;

  std::vector<AlgebraicIdentity> out;
  out.push_back({"drift_A2", 0.0, -(A2 + 2 * A2 * A2 + 2 * lam * t3)});
  if (A2 > 0) {
    const double A = std::sqrt(A2);
    out.push_back({"drift_normA", 0.0, -lam * t3 / A - A2 * A - A / 2});
  } else {
    out.push_back({"drift_normA", 0.0, 0.0});
  }
  for (long i = 0; i < jet.principal_curvatures.size(); ++i) {
    const double ki = jet.principal_curvatures[i];
    char name[48];
    std::snprintf(name, sizeof name, "drift_shape_eigen[%ld]", i);
    out.push_back({name, 0.0, -ki / 2 - A2 * ki - lam * ki * ki});
  }
  out.push_back({"cmc_balance", -H / 2 - A2 * (H - lam), 0.0});
  out.push_back({"gradA2_drift_route", 0.0, A2 / 2 + lam * t3 + A2 * A2});
  out.push_back({"gradA2_simons_route", 0.0, A2 * A2 + H * t3});
  return out;
}

}  // namespace expanderlab
