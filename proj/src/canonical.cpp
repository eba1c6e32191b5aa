#include "expanderlab/canonical.hpp"

#include <cmath>

namespace expanderlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Spheres are charted in polar coordinates with the poles cut off; the
// rotated second chart covers the cut caps.
constexpr double kPolarCut = 0.35;

Vector ambient(std::initializer_list<double> xs) {
  Vector v(static_cast<long>(xs.size()));
  long i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Jet of a round sphere S^n_r at ambient point x (|x| = r), outward normal,
// in an arbitrary orthonormal tangent frame.
GeomJet sphere_point_jet(int n, double r, const Vector& x) {
  GeomJet jet;
  jet.x = x;
  jet.normal = x / r;
  jet.tangent_basis = orthonormal_complement(jet.normal);
  jet.metric = Matrix::Identity(n, n);
  jet.shape_operator = -Matrix::Identity(n, n) / r;
  jet.principal_curvatures = Vector::Constant(n, -1.0 / r);
  jet.H = n / r;
  jet.normA2 = n / (r * r);
  jet.trA3 = -n / (r * r * r);
  jet.x_tan = Vector::Zero(n + 1);
  jet.normXtan2 = 0;
  jet.A_xt_xt = 0;
  return jet;
}

// Sphere chart c of S^n_r for n <= 2.  Chart 1 is chart 0 with the first two
// ambient coordinates swapped, which moves the coordinate degeneracy onto the
// equator of chart 0.
Vector sphere_chart_point(int n, double r, const Vector& p, int c) {
  Vector x;
  if (n == 1) {
    x = ambient({r * std::cos(p[0]), r * std::sin(p[0])});
  } else {
    const double a = p[0], b = p[1];
    x = ambient({r * std::cos(a), r * std::sin(a) * std::cos(b),
                 r * std::sin(a) * std::sin(b)});
  }
  if (c == 1) std::swap(x[0], x[1]);
  return x;
}

GeomJet sphere_chart_jet(int n, double r, const Vector& p, int c) {
  GeomJet jet;
  jet.x = sphere_chart_point(n, r, p, c);
  jet.normal = jet.x / r;
  if (n == 1) {
    jet.tangent_basis = Matrix(2, 1);
    jet.tangent_basis << -r * std::sin(p[0]), r * std::cos(p[0]);
    if (c == 1) std::swap(jet.tangent_basis(0, 0), jet.tangent_basis(1, 0));
    jet.metric = Matrix::Constant(1, 1, r * r);
  } else {
    const double a = p[0], b = p[1];
    jet.tangent_basis = Matrix(3, 2);
    jet.tangent_basis.col(0) << -r * std::sin(a), r * std::cos(a) * std::cos(b),
        r * std::cos(a) * std::sin(b);
    jet.tangent_basis.col(1) << 0, -r * std::sin(a) * std::sin(b),
        r * std::sin(a) * std::cos(b);
    if (c == 1) jet.tangent_basis.row(0).swap(jet.tangent_basis.row(1));
    jet.metric = Matrix::Zero(2, 2);
    jet.metric(0, 0) = r * r;
    jet.metric(1, 1) = r * r * std::sin(a) * std::sin(a);
  }
  jet.shape_operator = -Matrix::Identity(n, n) / r;
  jet.principal_curvatures = Vector::Constant(n, -1.0 / r);
  jet.H = n / r;
  jet.normA2 = n / (r * r);
  jet.trA3 = -n / (r * r * r);
  jet.x_tan = Vector::Zero(n + 1);
  jet.normXtan2 = 0;
  jet.A_xt_xt = 0;
  return jet;
}

// Maps a box in R^m onto (part of) the unit sphere S^m; used to give
// closed-form jets a concrete parameter domain when no chart is realized.
Vector box_to_unit_sphere(const Vector& p) {
  Vector q(p.size() + 1);
  q[0] = 1;
  q.tail(p.size()) = p;
  return q / q.norm();
}

}  // namespace

CanonicalSurface make_hyperplane(int n, double d, double sign) {
  if (n < 1) throw InvalidDimensionError("hyperplane needs n >= 1");
  if (!(d >= 0)) throw UsageError("hyperplane distance must be nonnegative");
  sign = sign < 0 ? -1.0 : 1.0;

  CanonicalSurface s;
  s.kind = SurfaceKind::Hyperplane;
  s.name = "hyperplane";
  s.spec = {n, sign * d / 2};
  s.d = d;
  s.sign = sign;

  s.param_lo = Vector::Constant(n, -kFlatExtent);
  s.param_hi = Vector::Constant(n, kFlatExtent);

  auto jet_at = [n, d, sign](const Vector& p) {
    GeomJet jet;
    jet.x = Vector(n + 1);
    jet.x[0] = d;
    jet.x.tail(n) = p;
    jet.normal = Vector::Zero(n + 1);
    jet.normal[0] = sign;
    jet.tangent_basis = Matrix::Zero(n + 1, n);
    jet.tangent_basis.bottomRows(n) = Matrix::Identity(n, n);
    jet.metric = Matrix::Identity(n, n);
    jet.shape_operator = Matrix::Zero(n, n);
    jet.principal_curvatures = Vector::Zero(n);
    jet.H = 0;
    jet.normA2 = 0;
    jet.trA3 = 0;
    jet.x_tan = jet.x;
    jet.x_tan[0] = 0;
    jet.normXtan2 = jet.x_tan.squaredNorm();
    jet.A_xt_xt = 0;
    return jet;
  };
  s.closed_form_jet = jet_at;
  s.jet_in_chart = [jet_at](const Vector& p, int) { return jet_at(p); };

  if (n <= 2) {
    ImmersedPatch patch;
    patch.intrinsic_dim = n;
    patch.domain_lo = s.param_lo;
    patch.domain_hi = s.param_hi;
    patch.embedding = [n, d](const Vector& p) {
      Vector x(n + 1);
      x[0] = d;
      x.tail(n) = p;
      return x;
    };
    // 90-degree tangent rotation (n=1) points at -e_0, the cross product
    // (n=2) at +e_0.
    patch.orientation = (n == 1) ? -sign : sign;
    s.charts.push_back(std::move(patch));
  }

  RevolutionProfile prof;
  prof.n = n;
  prof.s_lo = 0;
  prof.s_hi = kFlatExtent;
  prof.unbounded_above = true;
  prof.u = [d](double) { return d; };
  prof.v = [](double sarc) { return sarc; };
  prof.theta = [](double) { return kPi / 2; };
  prof.dtheta = [](double) { return 0.0; };
  s.profile = prof;
  return s;
}

CanonicalSurface make_sphere(int n, double r) {
  if (n < 1) throw InvalidDimensionError("sphere needs n >= 1");
  if (!(r > 0)) throw NonPositiveRadiusError("sphere radius must be positive");

  CanonicalSurface s;
  s.kind = SurfaceKind::Sphere;
  s.name = "sphere";
  s.spec = {n, static_cast<double>(n) / r + r / 2};
  s.k = n;
  s.r = r;
  s.closed = true;

  if (n <= 2) {
    // chart 0: polar coordinates about +-e_0; chart 1: the same about +-e_1.
    Vector lo(n), hi(n);
    if (n == 1) {
      lo << kPolarCut;
      hi << 2 * kPi - kPolarCut;
    } else {
      lo << kPolarCut, 0;
      hi << kPi - kPolarCut, 2 * kPi;
    }
    s.param_lo = lo;
    s.param_hi = hi;
    for (int c = 0; c < 2; ++c) {
      ImmersedPatch patch;
      patch.intrinsic_dim = n;
      patch.domain_lo = lo;
      patch.domain_hi = hi;
      patch.embedding = [n, r, c](const Vector& p) {
        return sphere_chart_point(n, r, p, c);
      };
      // Keeps the finite-difference normal outward: the coordinate swap in
      // chart 1 is a reflection, and the n=1 tangent rotation points inward.
      patch.orientation = (n == 1) ? (c == 0 ? -1 : 1) : (c == 0 ? 1 : -1);
      s.charts.push_back(std::move(patch));
    }
    s.jet_in_chart = [n, r](const Vector& p, int c) {
      return sphere_chart_jet(n, r, p, c);
    };
    s.closed_form_jet = [n, r](const Vector& p) {
      return sphere_chart_jet(n, r, p, 0);
    };
  } else {
    s.param_lo = Vector::Constant(n, -1.0);
    s.param_hi = Vector::Constant(n, 1.0);
    s.closed_form_jet = [n, r](const Vector& p) {
      return sphere_point_jet(n, r, r * box_to_unit_sphere(p));
    };
    s.jet_in_chart = [jet = s.closed_form_jet](const Vector& p, int) {
      return jet(p);
    };
  }

  RevolutionProfile prof;
  prof.n = n;
  prof.s_lo = 0;
  prof.s_hi = kPi * r;
  prof.u = [r](double sarc) { return -r * std::cos(sarc / r); };
  prof.v = [r](double sarc) { return r * std::sin(sarc / r); };
  prof.theta = [r](double sarc) { return kPi / 2 - sarc / r; };
  prof.dtheta = [r](double) { return -1.0 / r; };
  s.profile = prof;
  return s;
}

CanonicalSurface make_cylinder(int k, int n, double r) {
  if (k < 1 || k > n - 1)
    throw InvalidDimensionError("cylinder needs 1 <= k <= n-1");
  if (!(r > 0)) throw NonPositiveRadiusError("cylinder radius must be positive");

  CanonicalSurface s;
  s.kind = SurfaceKind::Cylinder;
  s.name = "cylinder";
  s.spec = {n, k / r + r / 2};
  s.k = k;
  s.r = r;

  const int flat = n - k;  // R^{n-k} factor, along ambient axes 0..flat-1

  // Exact jet at ambient (z, y), z in the flat factor, |y| = r.
  auto point_jet = [n, k, r, flat](const Vector& z, const Vector& y) {
    GeomJet jet;
    jet.x = Vector(n + 1);
    jet.x.head(flat) = z;
    jet.x.tail(k + 1) = y;
    jet.normal = Vector::Zero(n + 1);
    jet.normal.tail(k + 1) = y / r;
    jet.tangent_basis = Matrix::Zero(n + 1, n);
    jet.tangent_basis.topLeftCorner(flat, flat) = Matrix::Identity(flat, flat);
    jet.tangent_basis.bottomRightCorner(k + 1, k).noalias() =
        orthonormal_complement(y);
    jet.metric = Matrix::Identity(n, n);
    jet.shape_operator = Matrix::Zero(n, n);
    jet.shape_operator.bottomRightCorner(k, k) = -Matrix::Identity(k, k) / r;
    jet.principal_curvatures = Vector::Zero(n);
    jet.principal_curvatures.head(k) = Vector::Constant(k, -1.0 / r);
    jet.H = k / r;
    jet.normA2 = k / (r * r);
    jet.trA3 = -k / (r * r * r);
    jet.x_tan = Vector::Zero(n + 1);
    jet.x_tan.head(flat) = z;
    jet.normXtan2 = z.squaredNorm();
    jet.A_xt_xt = 0;
    return jet;
  };

  if (k == 1 && n == 2) {
    // chart (s, phi) -> (s, r cos phi, r sin phi)
    s.param_lo = ambient({-kFlatExtent, 0});
    s.param_hi = ambient({kFlatExtent, 2 * kPi});
    ImmersedPatch patch;
    patch.intrinsic_dim = 2;
    patch.domain_lo = s.param_lo;
    patch.domain_hi = s.param_hi;
    patch.embedding = [r](const Vector& p) {
      return ambient({p[0], r * std::cos(p[1]), r * std::sin(p[1])});
    };
    patch.orientation = -1;  // cross product points inward on this chart
    s.charts.push_back(std::move(patch));

    s.closed_form_jet = [r](const Vector& p) {
      // Coordinate-frame jet so that every field matches the chart's
      // finite-difference jet.
      GeomJet jet;
      const double t = p[0], phi = p[1];
      jet.x = ambient({t, r * std::cos(phi), r * std::sin(phi)});
      jet.normal = ambient({0, std::cos(phi), std::sin(phi)});
      jet.tangent_basis = Matrix(3, 2);
      jet.tangent_basis.col(0) << 1, 0, 0;
      jet.tangent_basis.col(1) << 0, -r * std::sin(phi), r * std::cos(phi);
      jet.metric = Matrix::Zero(2, 2);
      jet.metric(0, 0) = 1;
      jet.metric(1, 1) = r * r;
      jet.shape_operator = Matrix::Zero(2, 2);
      jet.shape_operator(1, 1) = -1.0 / r;
      jet.principal_curvatures = ambient({-1.0 / r, 0});
      jet.H = 1.0 / r;
      jet.normA2 = 1.0 / (r * r);
      jet.trA3 = -1.0 / (r * r * r);
      jet.x_tan = ambient({t, 0, 0});
      jet.normXtan2 = t * t;
      jet.A_xt_xt = 0;
      return jet;
    };
    s.jet_in_chart = [jet = s.closed_form_jet](const Vector& p, int) {
      return jet(p);
    };
  } else {
    // abstract parameters: flat coordinates, then a box chart of S^k.
    s.param_lo = Vector(n);
    s.param_hi = Vector(n);
    s.param_lo.head(flat) = Vector::Constant(flat, -kFlatExtent);
    s.param_hi.head(flat) = Vector::Constant(flat, kFlatExtent);
    s.param_lo.tail(k) = Vector::Constant(k, -1.0);
    s.param_hi.tail(k) = Vector::Constant(k, 1.0);
    s.closed_form_jet = [point_jet, r, flat, k](const Vector& p) {
      Vector z = p.head(flat);
      Vector y = r * box_to_unit_sphere(Vector(p.tail(k)));
      return point_jet(z, y);
    };
    s.jet_in_chart = [jet = s.closed_form_jet](const Vector& p, int) {
      return jet(p);
    };
  }

  if (k == n - 1) {
    RevolutionProfile prof;
    prof.n = n;
    prof.s_lo = -kFlatExtent;
    prof.s_hi = kFlatExtent;
    prof.unbounded_below = true;
    prof.unbounded_above = true;
    prof.u = [](double sarc) { return sarc; };
    prof.v = [r](double) { return r; };
    prof.theta = [](double) { return 0.0; };
    prof.dtheta = [](double) { return 0.0; };
    s.profile = prof;
  }
  return s;
}

std::vector<double> radii_for_lambda(int k, double lambda) {
  if (k < 1) throw UsageError("sphere factor dimension must be >= 1");
  const double floor_lambda = std::sqrt(2.0 * k);
  if (std::abs(lambda - floor_lambda) <= 1e-12) return {floor_lambda};
  if (lambda < floor_lambda) return {};
  const double disc = std::sqrt(lambda * lambda - 2.0 * k);
  return {lambda - disc, lambda + disc};
}

}  // namespace expanderlab
