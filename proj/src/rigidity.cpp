#include "expanderlab/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>

#include "json.hpp"

#include "expanderlab/parallel.hpp"

namespace expanderlab {

namespace {

constexpr double kMarginTol = 1e-10;
constexpr double kPi = 3.14159265358979323846;

// Every checker reads the surface with lambda >= 0; a flipped input is
// flipped back so orientation conventions never change a verdict.
SurfaceSamples canonicalized(SurfaceSamples s) {
  if (s.spec.lambda < 0) {
    for (auto& jet : s.jets) jet = flip_orientation(std::move(jet));
    s.spec.lambda = -s.spec.lambda;
  }
  return s;
}

ConditionReport start_report(const SurfaceSamples& s, const char* condition) {
  ConditionReport rep;
  rep.condition = condition;
  rep.spec = s.spec;
  rep.n_points = static_cast<long>(s.jets.size());
  rep.worst_value = std::numeric_limits<double>::infinity();
  return rep;
}

void add_sample_part(ConditionReport& rep, const SurfaceSamples& s,
                     const char* name,
                     const std::function<double(const GeomJet&)>& margin) {
  const long m = static_cast<long>(s.jets.size());
  if (m == 0) throw UsageError(rep.condition + ": no samples");
  std::vector<double> vals(m);
  parallel_for(m, [&](long i) { vals[i] = margin(s.jets[i]); });
  long worst = 0;
  for (long i = 1; i < m; ++i)
    if (vals[i] < vals[worst]) worst = i;
  rep.parts.emplace_back(name, vals[worst]);
  if (vals[worst] < rep.worst_value) {
    rep.worst_value = vals[worst];
    rep.worst_point = s.jets[worst].x;
  }
}

void add_flag_part(ConditionReport& rep, const char* name, bool ok) {
  const double v = ok ? 0.0 : -1.0;
  rep.parts.emplace_back(name, v);
  if (v < rep.worst_value) {
    rep.worst_value = v;
    rep.worst_point = Vector();
  }
}

ConditionReport finish(ConditionReport rep) {
  if (!std::isfinite(rep.worst_value) && rep.worst_value > 0)
    throw UsageError(rep.condition + ": nothing was evaluated");
  rep.holds = rep.worst_value >= -kMarginTol;
  return rep;
}

// Weak discrete local maximum of a grid field against its 1-ring; entries with
// defined[i] == 0 are holes that disqualify their neighborhood.
bool has_weak_local_max(const std::vector<int>& shape,
                        const std::vector<double>& field,
                        const std::vector<char>& defined) {
  if (shape.empty()) return false;
  const int d = static_cast<int>(shape.size());
  long total = 1;
  for (int m : shape) {
    if (m < 3) return false;
    total *= m;
  }
  if (total != static_cast<long>(field.size())) return false;
  std::vector<long> stride(d, 1);
  for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * shape[a + 1];
  for (long f = 0; f < total; ++f) {
    if (!defined[f]) continue;
    long rem = f;
    bool interior = true;
    for (int a = 0; a < d; ++a) {
      const int i = static_cast<int>(rem / stride[a]);
      rem %= stride[a];
      if (i == 0 || i == shape[a] - 1) interior = false;
    }
    if (!interior) continue;
    bool ok = true;
    for (int a = 0; a < d && ok; ++a)
      for (int sgn : {-1, 1}) {
        const long g = f + sgn * stride[a];
        if (!defined[g] || field[f] < field[g] - 1e-12) {
          ok = false;
          break;
        }
      }
    if (ok) return true;
  }
  return false;
}

}  // namespace

SurfaceSamples sample_surface(const CanonicalSurface& surface, int per_axis,
                              double extent) {
  const int n = surface.spec.n;
  if (per_axis <= 0) per_axis = n <= 2 ? 33 : 9;
  if (per_axis < 3) throw UsageError("sample_surface: need >= 3 points per axis");
  if (!(extent > 0)) throw UsageError("sample_surface: extent must be positive");

  Vector lo = surface.param_lo, hi = surface.param_hi;
  int n_clip = 0;  // leading parameter axes that run along unbounded directions
  if (surface.kind == SurfaceKind::Hyperplane) n_clip = n;
  if (surface.kind == SurfaceKind::Cylinder) n_clip = n - surface.k;
  for (int a = 0; a < n_clip; ++a) {
    lo[a] = std::max(lo[a], -extent);
    hi[a] = std::min(hi[a], extent);
  }

  SurfaceSamples out;
  out.spec = surface.spec;
  out.closed = surface.closed;
  out.name = surface.name;
  out.block_shape.assign(n, per_axis);
  long total = 1;
  for (int a = 0; a < n; ++a) total *= per_axis;
  out.jets.resize(total);
  out.params.resize(total);
  parallel_for(total, [&](long f) {
    Vector p(n);
    long rem = f;
    for (int a = n - 1; a >= 0; --a) {  // row-major, last axis fastest
      const int i = static_cast<int>(rem % per_axis);
      rem /= per_axis;
      p[a] = lo[a] + (hi[a] - lo[a]) * i / double(per_axis - 1);
    }
    out.params[f] = p;
    out.jets[f] = surface.closed_form_jet(p);
  });
  return out;
}

SurfaceSamples sample_surface(const RevolvedSurface& surface, int per_s,
                              int per_phi) {
  if (per_s < 3 || per_phi < 3)
    throw UsageError("sample_surface: need >= 3 points per axis");
  const RevolutionProfile prof = surface.profile();
  const double length = prof.s_hi - prof.s_lo;
  if (!(length > 0)) throw DegeneratePathError("sample_surface: empty profile");
  // inset from the ends so axis points (v = 0) are never evaluated
  const double s0 = prof.s_lo + 0.02 * length;
  const double s1 = prof.s_hi - 0.02 * length;
  const int n = surface.spec.n;

  SurfaceSamples out;
  out.spec = surface.spec;
  out.name = "revolved";
  out.closed = prof.v(prof.s_lo) <= 1e-5 && prof.v(prof.s_hi) <= 1e-5;
  out.block_shape = {per_s, per_phi};
  const long total = static_cast<long>(per_s) * per_phi;
  out.jets.resize(total);
  out.params.resize(total);
  parallel_for(total, [&](long f) {
    const int i = static_cast<int>(f / per_phi);
    const int j = static_cast<int>(f % per_phi);
    const double s = s0 + (s1 - s0) * i / double(per_s - 1);
    const double phi = 2 * kPi * j / double(per_phi - 1);
    Vector w = Vector::Zero(n);
    w[0] = std::cos(phi);
    w[1] = std::sin(phi);
    out.jets[f] = surface.jet(s, w);
    Vector p(2);
    p << s, phi;
    out.params[f] = p;
  });
  return out;
}

std::string to_json(const ConditionReport& rep) {
  nlohmann::json j;
  j["condition"] = rep.condition;
  j["holds"] = rep.holds;
  j["worst_value"] = rep.worst_value;
  j["worst_point"] = std::vector<double>(
      rep.worst_point.data(), rep.worst_point.data() + rep.worst_point.size());
  j["n_points"] = rep.n_points;
  j["lambda"] = rep.spec.lambda;
  return j.dump(2);
}

std::pair<double, double> eigen_identity(const std::vector<double>& eigs) {
  if (eigs.empty()) throw UsageError("eigen_identity: need at least one eigenvalue");
  double s1 = 0, s2 = 0, s3 = 0;
  for (double k : eigs) {
    s1 += k;
    s2 += k * k;
    s3 += k * k * k;
  }
  const double lhs = -s1 * s3 + s2 * s2;
  double rhs = 0;
  for (size_t i = 0; i < eigs.size(); ++i)
    for (size_t j = i + 1; j < eigs.size(); ++j) {
      const double d = eigs[i] - eigs[j];
      rhs -= eigs[i] * eigs[j] * d * d;
    }
  return {lhs, rhs};
}

ConditionReport eigen_identity_property(long trials, unsigned long long seed) {
  if (trials < 1) throw UsageError("eigen_identity_property: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  ConditionReport rep;
  rep.condition = "eigen_identity";
  rep.n_points = trials;
  double worst_rel = -1;
  std::vector<double> worst_eigs;
  for (long t = 0; t < trials; ++t) {
    const int n = 2 + static_cast<int>(t % 5);
    std::vector<double> eigs(n);
    for (double& e : eigs) e = dist(rng);
    const auto [lhs, rhs] = eigen_identity(eigs);
    const double rel = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    if (rel > worst_rel) {
      worst_rel = rel;
      worst_eigs = eigs;
    }
  }
  rep.worst_value = -worst_rel;
  rep.worst_point = Eigen::Map<const Vector>(
      worst_eigs.data(), static_cast<long>(worst_eigs.size()));
  rep.holds = rep.worst_value >= -kMarginTol;
  rep.note = "worst_point holds the eigenvalue vector with the largest relative mismatch";
  return rep;
}

ConditionReport check_gap_lambda(const SurfaceSamples& samples) {
  const SurfaceSamples s = canonicalized(samples);
  if (!s.closed)
    throw NotClosedError("check_gap_lambda: surface must be closed");
  ConditionReport rep = start_report(s, "gap_lambda");
  rep.worst_value = s.spec.lambda - std::sqrt(2.0 * s.spec.n);
  rep.holds = rep.worst_value >= -kMarginTol;
  return rep;
}

ConditionReport check_pinching(const SurfaceSamples& samples) {
  const SurfaceSamples s = canonicalized(samples);
  const double lam = s.spec.lambda;
  const int n = s.spec.n;
  if (!(lam >= std::sqrt(2.0 * n)))
    throw LambdaBelowGapError("check_pinching: lambda is below sqrt(2n)");
  const double disc = std::sqrt(std::max(0.0, lam * lam - 2.0 * n));
  const double bound = -0.5 + lam * (lam - disc) / (2.0 * n);
  ConditionReport rep = start_report(s, "pinching");
  add_sample_part(rep, s, "curvature_pinching",
                  [&](const GeomJet& j) { return bound - j.normA2; });
  char note[96];
  std::snprintf(note, sizeof note, "conclusion radius %.17g", lam + disc);
  rep.note = note;
  return finish(std::move(rep));
}

ConditionReport check_mean_convex(const SurfaceSamples& samples) {
  const SurfaceSamples s = canonicalized(samples);
  ConditionReport rep = start_report(s, "mean_convex");
  add_sample_part(rep, s, "mean_curvature",
                  [](const GeomJet& j) { return j.H; });
  add_sample_part(rep, s, "eigen_combination", [](const GeomJet& j) {
    return -(j.H * j.trA3 + j.normA2 * j.normA2);
  });
  return finish(std::move(rep));
}

ConditionReport check_sphere_window(const SurfaceSamples& samples) {
  const SurfaceSamples s = canonicalized(samples);
  const double lam = s.spec.lambda;
  const int n = s.spec.n;
  ConditionReport rep = start_report(s, "sphere_window");
  add_sample_part(rep, s, "window", [&](const GeomJet& j) {
    const double d = lam - 2.0 * j.H;
    return lam * lam - 2.0 * n - d * d;
  });
  return finish(std::move(rep));
}

ConditionReport check_l2_rigidity(const SurfaceSamples& samples,
                                  const RevolutionProfile* profile,
                                  const std::vector<double>& diagnostic_radii) {
  const SurfaceSamples s = canonicalized(samples);
  const double lam = s.spec.lambda;
  ConditionReport rep = start_report(s, "l2_rigidity");
  add_sample_part(rep, s, "scaled_combination", [&](const GeomJet& j) {
    return lam * ((j.H - lam) * j.trA3 - 0.5 * j.normA2);
  });
  add_sample_part(rep, s, "mean_curvature_below_lambda",
                  [&](const GeomJet& j) { return lam - j.H; });
  rep = finish(std::move(rep));
  if (profile) {
    // tail-mass diagnostics; reported but never part of the verdict
    for (double R : diagnostic_radii) {
      auto a2 = [profile](double t) {
        const double dth = profile->dtheta(t);
        const double v = profile->v(t);
        const double c = std::cos(profile->theta(t));
        const double korb = std::abs(v) < 1e-9 ? -dth : c / v;
        return dth * dth + (profile->n - 1) * korb * korb;
      };
      const double integral = weighted_profile_integral(*profile, -1.0, R, 0, a2);
      char name[64];
      std::snprintf(name, sizeof name, "A2_weight_integral_R=%g", R);
      rep.parts.emplace_back(name, integral);
    }
    rep.note = "A2_weight_integral_* parts are truncated tail diagnostics";
  }
  return rep;
}

ConditionReport check_tangent_growth(const SurfaceSamples& samples, double alpha) {
  const SurfaceSamples s = canonicalized(samples);
  if (!(alpha > 0))
    throw AlphaTooSmallError("check_tangent_growth: alpha must be positive");
  const double lam = s.spec.lambda;
  const double c = (alpha + 1) * (alpha + 1) / 8.0;
  ConditionReport rep = start_report(s, "tangent_growth");
  add_sample_part(rep, s, "growth_window", [&](const GeomJet& j) {
    return -(j.normA2 * (j.H - lam) * j.H +
             0.5 * j.H * j.H * (1.0 + c * j.normXtan2));
  });
  return finish(std::move(rep));
}

ConditionReport check_cylinder_ratio(const SurfaceSamples& samples) {
  const SurfaceSamples s = canonicalized(samples);
  const double lam = s.spec.lambda;
  if (lam == 0)
    throw LambdaZeroError("check_cylinder_ratio: lambda must be nonzero");
  ConditionReport rep = start_report(s, "cylinder_ratio");

  bool nonempty = false;
  for (const auto& j : s.jets)
    if (std::abs(j.H - lam) > 1e-10) nonempty = true;
  add_flag_part(rep, "h_differs_from_lambda", nonempty);

  add_sample_part(rep, s, "scaled_combination", [&](const GeomJet& j) {
    if (std::abs(j.H - lam) <= 1e-10)
      return std::numeric_limits<double>::infinity();  // outside {H != lambda}
    return -(lam / (j.H - lam)) * ((j.H - lam) * j.trA3 - 0.5 * j.normA2);
  });

  std::vector<double> ratio(s.jets.size(), 0.0);
  std::vector<char> defined(s.jets.size(), 0);
  for (size_t i = 0; i < s.jets.size(); ++i) {
    const double d = s.jets[i].H - lam;
    if (std::abs(d) <= 1e-10) continue;
    ratio[i] = s.jets[i].normA2 / (d * d);
    defined[i] = 1;
  }
  add_flag_part(rep, "ratio_local_max",
                has_weak_local_max(s.block_shape, ratio, defined));
  return finish(std::move(rep));
}

ConditionReport check_cmc_identity(const SurfaceSamples& samples) {
  const SurfaceSamples s = canonicalized(samples);
  if (s.jets.empty()) throw UsageError("check_cmc_identity: no samples");
  const double lam = s.spec.lambda;
  double h_lo = std::numeric_limits<double>::infinity(), h_hi = -h_lo;
  size_t i_lo = 0, i_hi = 0;
  for (size_t i = 0; i < s.jets.size(); ++i) {
    if (s.jets[i].H < h_lo) h_lo = s.jets[i].H, i_lo = i;
    if (s.jets[i].H > h_hi) h_hi = s.jets[i].H, i_hi = i;
  }
  ConditionReport rep = start_report(s, "cmc_identity");
  if (h_hi - h_lo > 1e-10) {
    rep.worst_value = -(h_hi - h_lo);
    rep.worst_point = s.jets[h_hi - lam > lam - h_lo ? i_hi : i_lo].x;
    rep.parts.emplace_back("H_spread", h_hi - h_lo);
    rep.note = "mean curvature is not constant over the samples";
    rep.holds = false;
    return rep;
  }
  add_sample_part(rep, s, "balance_residual", [&](const GeomJet& j) {
    return -std::abs(-0.5 * j.H - j.normA2 * (j.H - lam));
  });
  return finish(std::move(rep));
}

ConditionReport check_weighted_window(const SurfaceSamples& samples) {
  const SurfaceSamples s = canonicalized(samples);
  const double lam = s.spec.lambda;
  const int n = s.spec.n;
  ConditionReport rep = start_report(s, "weighted_window");
  add_sample_part(rep, s, "weighted_window", [&](const GeomJet& j) {
    const double d = 2.0 * j.H - lam;
    return -(j.normA2 * (d * d + 2.0 * n - lam * lam));
  });
  return finish(std::move(rep));
}

ConditionReport check_cylinder_drift(const SurfaceSamples& samples, double alpha,
                                     const LinearBound& bound) {
  const SurfaceSamples s = canonicalized(samples);
  if (bound.growth_exceeds_half || bound.a >= 0.5)
    throw CurvatureGrowthTooLargeError(
        "check_cylinder_drift: |H| grows at least like |x|/2");
  if (!(alpha > bound.alpha_star))
    throw AlphaTooSmallError(
        "check_cylinder_drift: alpha must exceed 4a^2/(1-4a^2)");
  const double lam = s.spec.lambda;
  const double c = (alpha + 1) / 4.0;
  ConditionReport rep = start_report(s, "cylinder_drift");
  add_sample_part(rep, s, "drift_window", [&](const GeomJet& j) {
    return -(j.normA2 * (j.H - lam) * j.H + 0.5 * j.H * j.H +
             c * j.A_xt_xt * j.H);
  });
  add_sample_part(rep, s, "drift_direction", [&](const GeomJet& j) {
    return j.normA2 * (j.H - lam) + 0.5 * j.H + c * j.A_xt_xt;
  });
  char note[128];
  std::snprintf(note, sizeof note, "envelope a=%g b=%g alpha_star=%g", bound.a,
                bound.b, bound.alpha_star);
  rep.note = note;
  return finish(std::move(rep));
}

}  // namespace expanderlab
