#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "expanderlab/geometry.hpp"
#include "expanderlab/types.hpp"

namespace expanderlab {

enum class SurfaceKind { Hyperplane, Sphere, Cylinder };

// An exactly known lambda-self-expander: a hyperplane at distance d from the
// origin, a round sphere, or a round cylinder S^k_r x R^{n-k} (flat factor
// along the leading ambient axes).  Carries parameter charts for n <= 2, the
// exact jet at any chart parameter for every n, and - when the surface is a
// revolution about the first ambient axis - its profile curve.
struct CanonicalSurface {
  SurfaceKind kind = SurfaceKind::Sphere;
  std::string name;     // "hyperplane" | "sphere" | "cylinder"
  ExpanderSpec spec;
  int k = 0;            // dimension of the sphere factor (= n for spheres)
  double r = 0;         // radius of the sphere factor
  double d = 0;         // hyperplane only: distance from the origin
  double sign = 1;      // hyperplane only: normal direction relative to +e_0
  bool closed = false;  // compact without boundary (spheres)

  // Chart 0 is the primary chart.  Spheres carry a second, rotated chart so
  // that the two charts cover the whole surface away from either chart's
  // coordinate degeneracy.  Empty when n > 2.
  std::vector<ImmersedPatch> charts;

  // Exact jet (no finite differences) at a parameter point of chart c.
  std::function<GeomJet(const Vector&, int)> jet_in_chart;
  // Exact jet over the abstract parameter box below; equals chart 0 for
  // n <= 2 and an orthonormal-frame construction otherwise.
  std::function<GeomJet(const Vector&)> closed_form_jet;
  Vector param_lo, param_hi;

  std::optional<RevolutionProfile> profile;
};

// Flat-factor truncation: charts and parameter boxes cut unbounded directions
// to [-kFlatExtent, kFlatExtent].
inline constexpr double kFlatExtent = 10.0;

CanonicalSurface make_hyperplane(int n, double d, double sign = +1);
CanonicalSurface make_sphere(int n, double r);
CanonicalSurface make_cylinder(int k, int n, double r);

// Radii r with k/r + r/2 = lambda: empty when lambda < sqrt(2k), the double
// root {sqrt(2k)} within 1e-12 of the minimum, else both roots ascending.
std::vector<double> radii_for_lambda(int k, double lambda);

}  // namespace expanderlab
