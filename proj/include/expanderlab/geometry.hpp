#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "expanderlab/types.hpp"

namespace expanderlab {

// A coordinate patch of an immersed hypersurface: a smooth embedding of a box
// in R^n (n = 1 or 2) into R^{n+1}.  `orientation` selects the normal branch:
// +1 keeps rot90(tangent) (n=1) resp. F_1 x F_2 (n=2), -1 flips it.
struct ImmersedPatch {
  int intrinsic_dim = 2;
  Vector domain_lo, domain_hi;
  double resolution = 1e-2;  // default grid spacing per axis
  std::function<Vector(const Vector&)> embedding;
  double orientation = 1.0;
};

// Second-order finite-difference jet at parameter p with stencil spacing h.
// Interior points use central differences; near the domain boundary the
// stencil degrades to one-sided second-order rules (reach 3h).  Curvature is
// assembled from differentiated unit normals (b_ij = -<F_i, d_j n>), which
// keeps the same O(h^2) order with markedly smaller constants than second
// differences of the position.
GeomJet evaluate_jet(const ImmersedPatch& patch, const Vector& p, double h);

// ------------------------------------------------------------------ grids

struct Grid {
  Vector lo;
  double h = 0;
  std::vector<int> npts;  // nodes per axis; node (i_0,..) at lo + h*(i_0,..)

  int dim() const { return static_cast<int>(npts.size()); }
  long size() const;
  long flat(std::span<const int> idx) const;
  std::vector<int> unflat(long flat) const;
  Vector point(std::span<const int> idx) const;
  Vector point_flat(long flat) const;
  // Node at least `margin` (in parameter units) away from every box face.
  bool interior(long flat, double margin) const;
  Grid refined() const;  // spacing h/2, identical extent, aligned nodes

  // Largest grid with spacing exactly h inscribed in [lo, hi].
  static Grid over_box(const Vector& lo, const Vector& hi, double h);
};

struct GridField {
  Grid grid;
  std::vector<double> values;

  double& at(long flat) { return values[static_cast<size_t>(flat)]; }
  double at(long flat) const { return values[static_cast<size_t>(flat)]; }
};

// One-dimensional finite-difference rule in index space (weights assume unit
// spacing; divide by h resp. h^2 at the call site).
struct Stencil1D {
  int len = 0;
  std::array<int, 4> off{};
  std::array<double, 4> w{};
};
Stencil1D d1_stencil(int i, int npts);  // first derivative, O(h^2)
Stencil1D d2_stencil(int i, int npts);  // second derivative, O(h^2)

// ------------------------------------------------- sampled surface geometry

// Jets sampled on every node of a grid, plus the discrete surface calculus
// built from them.  The Laplace-Beltrami operator is applied in divergence
// form  (1/sqrt g) d_i (sqrt g g^{ij} d_j f)  with the same second-order
// stencils used for the jets, so residuals of smooth identities refine at
// O(h^2).
class SurfaceGrid {
 public:
  SurfaceGrid(Grid grid, std::vector<GeomJet> jets);

  // Jets by finite differences of the patch embedding, stencil spacing = h.
  static SurfaceGrid finite_difference(const ImmersedPatch& patch, double h);
  // Jets from an exact pointwise formula (canonical surfaces).
  static SurfaceGrid closed_form(const Grid& grid,
                                 const std::function<GeomJet(const Vector&)>& jet_at);

  const Grid& grid() const { return grid_; }
  const GeomJet& jet(long flat) const { return jets_[static_cast<size_t>(flat)]; }
  long size() const { return grid_.size(); }

  GridField sample(const std::function<double(const GeomJet&)>& f) const;

  // df/dx_axis of a sampled field at a node, index-space stencil / h.
  double partial(const GridField& f, long flat, int axis) const;
  // Ambient representative of the surface gradient  grad f = g^{ij} d_j f F_i.
  Vector surface_gradient(const GridField& f, long flat) const;
  double laplace_beltrami(const GridField& f, long flat) const;
  // L f = Delta f + <x, grad f>/2      (drift from the expander structure)
  double drifted_L(const GridField& f, long flat) const;
  // L_alpha f = Delta f - (alpha/2) <x, grad f>;  alpha = -1 recovers L.
  double drifted_L_alpha(const GridField& f, long flat, double alpha) const;

 private:
  double flux(const GridField& f, long flat, int axis) const;

  Grid grid_;
  std::vector<GeomJet> jets_;
  std::vector<double> sqrtg_;
  std::vector<Matrix> ginv_;
};

// Orthonormal basis of the hyperplane orthogonal to w (|w| > 0), as the
// columns of an m x (m-1) matrix.
Matrix orthonormal_complement(const Vector& w);

// Convenience wrappers matching the per-point call shape (the field carries
// its grid; the patch supplies geometry via finite-difference jets at the
// field's spacing).
Vector surface_gradient(const ImmersedPatch& patch, const GridField& f,
                        std::span<const int> node);
double laplace_beltrami(const ImmersedPatch& patch, const GridField& f,
                        std::span<const int> node);

}  // namespace expanderlab
