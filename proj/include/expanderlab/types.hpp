#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace expanderlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------- errors

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define EXPANDERLAB_DEFINE_ERROR(NAME) \
  struct NAME : Error {                \
    using Error::Error;                \
  }

EXPANDERLAB_DEFINE_ERROR(SingularMetricError);
EXPANDERLAB_DEFINE_ERROR(NonFiniteError);
EXPANDERLAB_DEFINE_ERROR(InvalidDimensionError);
EXPANDERLAB_DEFINE_ERROR(NonPositiveRadiusError);
EXPANDERLAB_DEFINE_ERROR(NotAnExpanderError);
EXPANDERLAB_DEFINE_ERROR(NotClosedError);
EXPANDERLAB_DEFINE_ERROR(LambdaBelowGapError);
EXPANDERLAB_DEFINE_ERROR(LambdaZeroError);
EXPANDERLAB_DEFINE_ERROR(AlphaTooSmallError);
EXPANDERLAB_DEFINE_ERROR(CurvatureGrowthTooLargeError);
EXPANDERLAB_DEFINE_ERROR(DegeneratePathError);
EXPANDERLAB_DEFINE_ERROR(AxisSingularityError);
EXPANDERLAB_DEFINE_ERROR(UsageError);

#undef EXPANDERLAB_DEFINE_ERROR

// ---------------------------------------------------------------- core types

// A self-expanding hypersurface satisfies  H = -<x,n>/2 + lambda  pointwise,
// where H is taken with respect to the stored unit normal n.
struct ExpanderSpec {
  int n = 2;          // intrinsic dimension, surface lives in R^{n+1}
  double lambda = 0;
};

// Pointwise second-order data of an immersed hypersurface.  Sign conventions:
// the shape operator is A(X) = -D_X n, principal curvatures are its
// eigenvalues, and H = -tr A.  A round sphere of radius r with the outward
// normal has principal curvatures -1/r and H = n/r.
struct GeomJet {
  Vector x;                      // position in R^{n+1}
  Vector normal;                 // unit normal
  Matrix tangent_basis;          // (n+1) x n, columns span T_x
  Matrix metric;                 // n x n Gram matrix of the tangent basis
  Matrix shape_operator;         // n x n, mixed-index matrix of A
  Vector principal_curvatures;   // eigenvalues of A, ascending
  double H = 0;                  // -tr A
  double normA2 = 0;             // |A|^2
  double trA3 = 0;               // tr A^3
  Vector x_tan;                  // tangential part of the position vector
  double normXtan2 = 0;          // |x^T|^2
  double A_xt_xt = 0;            // second fundamental form on (x^T, x^T)

  int dim() const { return static_cast<int>(metric.rows()); }
};

// Reverses the choice of unit normal: negates normal, A, H, tr A^3 and
// A(x^T,x^T); metric, |A|^2 and x^T are unchanged.
GeomJet flip_orientation(GeomJet jet);

// H + <x,n>/2 - lambda; identically zero on a lambda-self-expander.
double expander_residual(const GeomJet& jet, const ExpanderSpec& spec);

// Largest scaled violation of the internal consistency requirements of a jet
// (unit normal, tangency, metric SPD, A self-adjoint w.r.t. g, scalar
// invariants matching the principal curvatures).  Zero on exact data.
double jet_invariant_violation(const GeomJet& jet);

// Profile curve s -> (u(s), v(s)) of a surface of revolution about the first
// ambient axis, arclength-parametrized, with tangent angle theta
// (u' = cos theta, v' = sin theta).  theta/dtheta give access to the
// closed-form principal curvatures dtheta and -cos(theta)/v.
struct RevolutionProfile {
  int n = 2;  // intrinsic dimension of the revolved hypersurface
  double s_lo = 0, s_hi = 0;
  bool unbounded_below = false;  // domain extends past s_lo on demand
  bool unbounded_above = false;
  std::function<double(double)> u, v, theta, dtheta;
};

}  // namespace expanderlab
