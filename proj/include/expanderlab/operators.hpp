#pragma once

#include <string>
#include <vector>

#include "expanderlab/canonical.hpp"
#include "expanderlab/geometry.hpp"
#include "expanderlab/profile.hpp"
#include "expanderlab/types.hpp"

namespace expanderlab {

struct ResidualReport {
  std::string identity;
  double h = 0;
  double max_abs = 0;
  double mean_abs = 0;
  double order = 0;  // log2 ratio of max residuals at h vs h/2; NaN at floor
  double orientation = 1;
  ExpanderSpec spec;
};

std::string to_json(const ResidualReport& report);

// One surface sampled at two nested spacings (h and h/2), plus an accurate
// (non-stencil) bound on its expander-equation residual used for gating.
struct IdentityGridSource {
  ExpanderSpec spec;
  SurfaceGrid coarse;
  SurfaceGrid fine;
  double interior_margin = 0;
  double surface_residual = 0;
};

// Grid source over a canonical surface's coordinate chart, exact jets.
// Unbounded directions are clipped to [-flat_extent, flat_extent].  Only
// n <= 2 carries coordinate-frame jets; larger n has no chart calculus.
IdentityGridSource identity_source(const CanonicalSurface& surface, double h,
                                   double flat_extent = 2.0);
// Grid source over a window of a revolved profile surface (n = 2),
// finite-difference jets; the gating residual comes from the interpolated
// profile, not from grid stencils.
IdentityGridSource identity_source(const RevolvedSurface& surface, double s_lo,
                                   double s_hi, double h);

struct IdentityOptions {
  // Refuse surfaces whose expander residual exceeds 1e-6; identities below
  // only hold on solutions of the expander equation.
  bool enforce_expander_gate = true;
};

// Residuals of the scalar curvature identities: the drifted heat operators
// applied to H, |x|^2, and H^2 against their closed-form right-hand sides.
// H is sampled as a grid field from the jets and differentiated with the
// same stencils as everything else, so each report measures one consistent
// discretization.  Ten reports (two of the identities at alpha = 0 and 1).
std::vector<ResidualReport> scalar_identity_residuals(
    const IdentityGridSource& src, const IdentityOptions& options = {});

struct AlgebraicIdentity {
  std::string name;
  double lhs = 0;
  double rhs = 0;
};

// Identities whose derivative terms vanish when the shape operator is
// parallel (it is on every canonical surface), reduced to closed-form
// algebra in {lambda_i, H, |A|^2, tr A^3, lambda} and evaluated exactly.
std::vector<AlgebraicIdentity> parallel_A_identity_check(
    const CanonicalSurface& surface);

}  // namespace expanderlab
