#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "expanderlab/geometry.hpp"
#include "expanderlab/types.hpp"

namespace expanderlab {

// Surface area of the unit sphere S^{dim-1} in R^dim (dim = 1 gives 2, the
// counting measure of two points).
double unit_sphere_area(int dim);

// Composite Simpson rule; `panels` is rounded up to an even count.
double simpson(const std::function<double(double)>& f, double a, double b,
               long panels);

struct ProfileIntegralOptions {
  long panels = 8192;
};

// Integral over {|x| <= R} of  w_{n-1} v^{n-1} |H|^delta e^{-alpha |x|^2 / 4}
// (times an optional extra factor) in the arclength of a revolution profile.
// Ball-boundary crossings are bisected to 1e-12 in s; unbounded profile ends
// are extended by doubling until they leave the ball.
double weighted_profile_integral(
    const RevolutionProfile& profile, double alpha, double R, double delta = 0,
    const std::function<double(double)>& extra = nullptr,
    const ProfileIntegralOptions& opts = {});

double weighted_area(const RevolutionProfile& profile, double alpha, double R,
                     const ProfileIntegralOptions& opts = {});
// Tensor Simpson over a jet grid with the sqrt(det g) area element; the node
// count must be odd along every axis.  The grid window is the truncation.
double weighted_area(const SurfaceGrid& surface, double alpha);
// Unweighted area of the part of the surface inside the ball of radius r.
double ball_area(const RevolutionProfile& profile, double r,
                 const ProfileIntegralOptions& opts = {});

struct AreaFit {
  double C = 0;
  double slope = 0;  // of log(area) against r^2/4
  long window_lo = 0;
  long window_hi = 0;
};

struct AreaSeries {
  std::vector<double> radii;  // strictly increasing
  std::vector<double> areas;
  double alpha = 0;  // growth-bound parameter the fit is compared against
  AreaFit fit;
};

AreaSeries ball_area_series(const RevolutionProfile& profile,
                            const std::vector<double>& radii,
                            const ProfileIntegralOptions& opts = {});

// Least squares of log(area) against r^2/4 over the upper half of the radius
// grid (at least 8 radii there); stores the fit and alpha on the series.
AreaFit growth_fit(AreaSeries& series, double alpha);

std::string to_csv(const AreaSeries& series);
std::string fit_json(const AreaSeries& series);

struct LinearBound {
  double a = 0;
  double b = 0;
  double alpha_star = 0;  // 4 a^2 / (1 - 4 a^2)
  bool growth_exceeds_half = false;
};

// Smallest slope a on the grid {0, 0.005, ..., 0.495} such that the envelope
// |H| <= a|x| + b is tight somewhere in the near half of the samples (the
// excess |H| - a|x| attains its maximum at |x| at most the sample median;
// ties prefer the smallest |x|).  b is the clipped maximal excess.  Samples
// are (|x|, |H|) pairs.
LinearBound mean_curvature_linear_bound(
    const std::vector<std::pair<double, double>>& samples);
LinearBound mean_curvature_linear_bound(const RevolutionProfile& profile,
                                        int n_samples = 2048);

struct HIntegralReport {
  double value = 0;
  std::vector<double> partials;  // cumulative values at R/8, 2R/8, ..., R
  double last_ratio = 0;         // final increment over the one before it
};

// Truncated integral of |H|^delta e^{-alpha |x|^2/4}, with the cumulative
// partial integrals over nested balls as a tail-decay diagnostic.
HIntegralReport weighted_H_integral(const RevolutionProfile& profile,
                                    double delta, double alpha, double R,
                                    const ProfileIntegralOptions& opts = {});

}  // namespace expanderlab
