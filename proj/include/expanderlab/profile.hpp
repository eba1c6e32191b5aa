#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "expanderlab/geometry.hpp"
#include "expanderlab/types.hpp"

namespace expanderlab {

// One sample of a rotationally symmetric profile curve s -> (u(s), v(s)),
// parameterized by arclength: u' = cos(theta), v' = sin(theta).  The
// hypersurface is F(s, w) = (u(s), v(s) w), w a unit vector, with normal
// (-sin(theta), cos(theta) w).
struct ProfileState {
  double s = 0;
  double u = 0;
  double v = 0;
  double theta = 0;
};

enum class ProfileEnd { ReachedSmax, AxisHit, NonFinite };

// closure_defect() of a path that never reached the axis; also the shooting
// miss of a path that escapes outward without ever bottoming out (positive,
// since never returning is the limit of ever-wider bounces).
inline constexpr double kNoHitDefect = 1e6;

struct ProfilePath {
  ExpanderSpec spec;
  std::vector<ProfileState> states;
  double step = 0;
  ProfileEnd terminated_by = ProfileEnd::ReachedSmax;
  double axis_s = 0;      // valid when terminated_by == AxisHit
  double axis_theta = 0;  // theta at the axis hit
  bool planar = false;    // curve in the (u,v) plane; v may change sign

  // theta(s1) + pi/2 at an axis hit (0 means the profile meets the axis
  // orthogonally and closes smoothly), kNoHitDefect otherwise.
  double closure_defect() const;
};

// Right-hand side (du, dv, dtheta) of the arclength profile equation
//   dtheta = (n-1) cos(theta)/v - lambda + (v cos(theta) - u sin(theta))/2.
// The 1/v term is absent for n = 1 (plane curves).  Near the axis the
// equation is singular; callers start there with the regularized series
// used by integrate_profile.
std::array<double, 3> profile_rhs(const ProfileState& state,
                                  const ExpanderSpec& spec);

struct IntegrateOptions {
  double s_max = 50;
  double h_ode = 0;  // <= 0 picks 1e-3 * max(1, |u0|)
  // v at or below this while still heading inward counts as an axis hit.
  // Loose enough that integrating at a closed root lands despite roundoff;
  // shoot_closed tightens it internally while refining.
  double v_axis_eps = 1e-6;
};

// Integrates the profile from an axis start (u0, 0, pi/2).  The first step
// is a series expansion to s = h/2 (the equation is 0/0 at v = 0); after
// that, classical 4th-order steps of h, scaled down near v = 0 so no stage
// straddles the axis.  Stops at s_max, at an axis hit (v <= v_axis_eps
// inbound, landing by extrapolation), or on non-finite values.
ProfilePath integrate_profile(double u0, const ExpanderSpec& spec,
                              const IntegrateOptions& opts = {});

// Integrates a plane curve (n = 1) from an arbitrary start.  No axis
// logic: v may cross zero freely.
ProfilePath planar_curve(const ExpanderSpec& spec, const ProfileState& start,
                         double s_max, double h_ode);

struct ShootingRoot {
  double u0 = 0;
  double radius = 0;  // max orbit radius along the closed profile
};

struct ShootingResult {
  ExpanderSpec spec;
  std::vector<ShootingRoot> roots;
  // (u0, signed miss): miss is v at the first close approach to the axis,
  // positive when the profile bounces back out, negative when it curls over,
  // zero at an axis hit, kNoHitDefect when v never bottoms out.
  std::vector<std::array<double, 2>> samples;
};

std::string to_json(const ShootingResult& result);

// Scans u0 in [u0_lo, u0_hi] (both < 0) for profiles that close smoothly
// across the axis.  Closed profiles separate bouncing from curling ones, so
// each sign change of the signed miss is bisected until the bracket
// collapses; the converged u0 is kept when the miss dipped near zero along
// the way (strongly unstable closings keep |miss| on a floor well above
// roundoff).  Tangential (double) roots are caught by minimizing |miss|
// around interior local minima below 0.05.
ShootingResult shoot_closed(const ExpanderSpec& spec, double u0_lo,
                            double u0_hi, int n_samples,
                            const IntegrateOptions& opts = {});

// Cubic interpolation of (u, v, theta) between path knots, with slopes
// taken from the equation itself (regularized at near-axis knots).
class ProfileDense {
 public:
  ProfileDense() = default;
  explicit ProfileDense(const ProfilePath& path);

  double u(double s) const;
  double v(double s) const;
  double theta(double s) const;
  double dtheta(double s) const;

  double s_lo() const { return knots_.front().s; }
  double s_hi() const { return knots_.back().s; }
  // s positions of the interpolation knots (exact sample sites)
  std::vector<double> knot_positions() const;

 private:
  struct Knot {
    double s, u, v, theta;
    double du, dv, dtheta;
  };
  std::vector<Knot> knots_;

  long interval(double& s) const;
  double eval(double s, double Knot::*value, double Knot::*slope,
              bool derivative) const;
};

// A profile path spun around the axis into a hypersurface of revolution
// in R^{n+1}, with jets both from the profile's closed form and from
// finite differences of the interpolated profile.
struct RevolvedSurface {
  ExpanderSpec spec;
  ProfileDense dense;

  RevolutionProfile profile() const;
  // Chart (s, phi) -> (u(s), v(s) cos phi, v(s) sin phi); n = 2 only.
  ImmersedPatch patch(double s_lo, double s_hi) const;
  GeomJet jet(double s, const Vector& omega) const;
  GeomJet fd_jet(double s, const Vector& omega, double h) const;
};

RevolvedSurface revolve(const ProfilePath& path, int n);

// Jet of the revolution of s -> (u(s), v(s)) at (s, omega) from function
// samples alone: tangent directions from centered chords, the profile
// curvature from a centered difference of the chord angle.  Needs samples
// at s - 2h .. s + 2h.
GeomJet revolution_fd_jet(const std::function<double(double)>& u_fn,
                          const std::function<double(double)>& v_fn, int n,
                          double s, const Vector& omega, double h);

// Residual of the expander equation at interior knots of the longest
// uniformly spaced knot run, using a 5-point derivative of the stored
// theta values.  Needs at least 7 uniform knots.
std::vector<double> path_residual_knots(const ProfilePath& path);

std::string to_csv(const ProfilePath& path);
ProfilePath path_from_csv(const std::string& text, const ExpanderSpec& spec);

}  // namespace expanderlab
