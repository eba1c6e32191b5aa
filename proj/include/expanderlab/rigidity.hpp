#pragma once

#include <string>
#include <utility>
#include <vector>

#include "expanderlab/canonical.hpp"
#include "expanderlab/measure.hpp"
#include "expanderlab/profile.hpp"
#include "expanderlab/types.hpp"

namespace expanderlab {

struct SurfaceSamples {
  ExpanderSpec spec;
  std::vector<GeomJet> jets;
  std::vector<Vector> params;     // chart coordinates, parallel to jets
  std::vector<int> block_shape;   // tensor shape of the sample grid; empty if unstructured
  bool closed = false;
  std::string name;
};

// Tensor grid of closed-form jets over the parameter box.  Unbounded
// directions (hyperplane axes, cylinder axes) are clipped to [-extent, extent].
// per_axis <= 0 picks 33 points per axis for n <= 2 and 9 for higher n.
SurfaceSamples sample_surface(const CanonicalSurface& surface, int per_axis = 0,
                              double extent = 2.0);
// Jets of a revolved profile on an (s, phi) grid, slightly inset from the
// arclength ends so axis points are never touched.
SurfaceSamples sample_surface(const RevolvedSurface& surface, int per_s = 33,
                              int per_phi = 33);

struct ConditionReport {
  std::string condition;
  bool holds = false;
  double worst_value = 0;  // >= 0 (within 1e-10) means the condition holds
  Vector worst_point;      // ambient coordinates; empty when no single point applies
  long n_points = 0;
  ExpanderSpec spec;
  std::vector<std::pair<std::string, double>> parts;  // named sub-margins
  std::string note;
};

std::string to_json(const ConditionReport& report);

// lhs = (-sum k_i)(sum k_i^3) + (sum k_i^2)^2,
// rhs = -sum_{i<j} k_i k_j (k_i - k_j)^2; the two agree for every real vector.
std::pair<double, double> eigen_identity(const std::vector<double>& eigs);
ConditionReport eigen_identity_property(long trials = 1000,
                                        unsigned long long seed = 12345);

ConditionReport check_gap_lambda(const SurfaceSamples& samples);
ConditionReport check_pinching(const SurfaceSamples& samples);
ConditionReport check_mean_convex(const SurfaceSamples& samples);
ConditionReport check_sphere_window(const SurfaceSamples& samples);
// The tail integrals of |A|^2 e^{|x|^2/4} over the given balls are attached as
// diagnostic parts when a profile is supplied; they never affect the margin.
ConditionReport check_l2_rigidity(const SurfaceSamples& samples,
                                  const RevolutionProfile* profile = nullptr,
                                  const std::vector<double>& diagnostic_radii = {2, 4, 8});
ConditionReport check_tangent_growth(const SurfaceSamples& samples, double alpha);
ConditionReport check_cylinder_ratio(const SurfaceSamples& samples);
ConditionReport check_cmc_identity(const SurfaceSamples& samples);
ConditionReport check_weighted_window(const SurfaceSamples& samples);
// `bound` is the |H| <= a|x| + b envelope of the surface; alpha must exceed
// the growth threshold 4a^2/(1-4a^2) implied by it.
ConditionReport check_cylinder_drift(const SurfaceSamples& samples, double alpha,
                                     const LinearBound& bound);

}  // namespace expanderlab
