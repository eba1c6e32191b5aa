#include "expanderlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "expanderlab/parallel.hpp"

namespace expanderlab {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

void require_finite(const Vector& v, const char* what) {
  if (!all_finite(v)) throw NonFiniteError(std::string(what) + " is not finite");
}

Vector eval_embedding(const ImmersedPatch& patch, const Vector& q) {
  Vector y = patch.embedding(q);
  if (y.size() != patch.intrinsic_dim + 1)
    throw InvalidDimensionError("embedding must map R^n into R^{n+1}");
  require_finite(y, "embedding value");
  return y;
}

// Stencil side per axis, chosen by position in the domain: 0 central,
// +1 forward, -1 backward.  Forward/backward reach 2h.
int axis_mode(double p, double lo, double hi, double h) {
  const double tol = 1e-6 * h;
  if (p - h >= lo - tol && p + h <= hi + tol) return 0;
  if (p + 2 * h <= hi + tol) return +1;
  if (p - 2 * h >= lo - tol) return -1;
  throw UsageError("stencil spacing too large for the patch domain");
}

// Columns are dF/du_a at q, each a second-order one-dimensional difference.
Matrix tangents_at(const ImmersedPatch& patch, const Vector& q, double h) {
  const int n = patch.intrinsic_dim;
  Matrix F(n + 1, n);
  for (int a = 0; a < n; ++a) {
    Vector qa = q;
    const int mode = axis_mode(q[a], patch.domain_lo[a], patch.domain_hi[a], h);
    if (mode == 0) {
      qa[a] = q[a] + h;
      Vector fp = eval_embedding(patch, qa);
      qa[a] = q[a] - h;
      Vector fm = eval_embedding(patch, qa);
      F.col(a) = (fp - fm) / (2 * h);
    } else {
      const double s = mode;  // one-sided rule, mirrored for the backward case
      Vector f0 = eval_embedding(patch, q);
      qa[a] = q[a] + s * h;
      Vector f1 = eval_embedding(patch, qa);
      qa[a] = q[a] + s * 2 * h;
      Vector f2 = eval_embedding(patch, qa);
      F.col(a) = s * (-1.5 * f0 + 2.0 * f1 - 0.5 * f2) / h;
    }
  }
  return F;
}

Vector normal_from_tangents(const Matrix& F, double orientation) {
  Vector m;
  if (F.cols() == 1) {
    m.resize(2);
    m << -F(1, 0), F(0, 0);
  } else {
    Eigen::Vector3d c = Eigen::Vector3d(F.col(0)).cross(Eigen::Vector3d(F.col(1)));
    m = c;
  }
  const double len = m.norm();
  if (!(len > 1e-14) || !std::isfinite(len))
    throw SingularMetricError("tangent vectors do not span the tangent space");
  return (orientation / len) * m;
}

Vector normal_at(const ImmersedPatch& patch, const Vector& q, double h) {
  return normal_from_tangents(tangents_at(patch, q, h), patch.orientation);
}

void check_metric(const Matrix& g) {
  const int n = static_cast<int>(g.rows());
  const double detg = g.determinant();
  const double scale = std::pow(g.trace() / n, n);
  if (!std::isfinite(detg) || !(detg > 1e-12 * scale))
    throw SingularMetricError("metric is numerically singular");
}

}  // namespace

GeomJet flip_orientation(GeomJet jet) {
  jet.normal = -jet.normal;
  jet.shape_operator = -jet.shape_operator;
  jet.principal_curvatures = (-jet.principal_curvatures).reverse().eval();
  jet.H = -jet.H;
  jet.trA3 = -jet.trA3;
  jet.A_xt_xt = -jet.A_xt_xt;
  return jet;
}

double expander_residual(const GeomJet& jet, const ExpanderSpec& spec) {
  return jet.H + 0.5 * jet.x.dot(jet.normal) - spec.lambda;
}

double jet_invariant_violation(const GeomJet& jet) {
  const int n = jet.dim();
  const Vector& k = jet.principal_curvatures;
  double worst = std::abs(jet.normal.norm() - 1.0);
  worst = std::max(worst, std::abs(jet.H + k.sum()));
  worst = std::max(worst, std::abs(jet.normA2 - k.squaredNorm()));
  worst = std::max(worst, std::abs(jet.trA3 - k.array().cube().sum()));
  worst = std::max(worst, std::abs(jet.normXtan2 - jet.x_tan.squaredNorm()));
  worst = std::max(worst, std::abs(jet.x_tan.dot(jet.normal)));
  const Vector rebuilt = jet.x_tan + jet.x.dot(jet.normal) * jet.normal;
  worst = std::max(worst, (rebuilt - jet.x).lpNorm<Eigen::Infinity>());
  for (int a = 0; a < n; ++a)
    worst = std::max(worst, std::abs(jet.tangent_basis.col(a).dot(jet.normal)) /
                                std::max(1.0, jet.tangent_basis.col(a).norm()));
  worst = std::max(worst,
                   (jet.metric - jet.metric.transpose()).lpNorm<Eigen::Infinity>());
  // b = g A must be symmetric (A self-adjoint w.r.t. g).
  const Matrix b = jet.metric * jet.shape_operator;
  worst = std::max(worst, (b - b.transpose()).lpNorm<Eigen::Infinity>() /
                              std::max(1.0, b.lpNorm<Eigen::Infinity>()));
  return worst;
}

GeomJet evaluate_jet(const ImmersedPatch& patch, const Vector& p, double h) {
  const int n = patch.intrinsic_dim;
  if (n != 1 && n != 2)
    throw InvalidDimensionError("patches must have intrinsic dimension 1 or 2");
  if (!(h > 0) || !std::isfinite(h)) throw UsageError("stencil spacing must be positive");
  if (p.size() != n || patch.domain_lo.size() != n || patch.domain_hi.size() != n)
    throw InvalidDimensionError("parameter point does not match the patch dimension");
  require_finite(p, "parameter point");

  GeomJet jet;
  jet.x = eval_embedding(patch, p);
  jet.tangent_basis = tangents_at(patch, p, h);
  jet.normal = normal_from_tangents(jet.tangent_basis, patch.orientation);
  jet.metric = jet.tangent_basis.transpose() * jet.tangent_basis;
  check_metric(jet.metric);

  // Second fundamental form from differentiated unit normals,
  // b_ij = -(<F_i, d_j n> + <F_j, d_i n>)/2, with the same stencil layout as
  // the tangents.  Differencing exactly normalized neighbors keeps the
  // leading truncation error tangential, where the projection kills it.
  Matrix dn(n + 1, n);
  for (int a = 0; a < n; ++a) {
    Vector qa = p;
    const int mode = axis_mode(p[a], patch.domain_lo[a], patch.domain_hi[a], h);
    if (mode == 0) {
      qa[a] = p[a] + h;
      Vector np = normal_at(patch, qa, h);
      qa[a] = p[a] - h;
      Vector nm = normal_at(patch, qa, h);
      dn.col(a) = (np - nm) / (2 * h);
    } else {
      const double s = mode;
      Vector n0 = jet.normal;
      qa[a] = p[a] + s * h;
      Vector n1 = normal_at(patch, qa, h);
      qa[a] = p[a] + s * 2 * h;
      Vector n2 = normal_at(patch, qa, h);
      dn.col(a) = s * (-1.5 * n0 + 2.0 * n1 - 0.5 * n2) / h;
    }
  }
  Matrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      b(i, j) = -0.5 * (jet.tangent_basis.col(i).dot(dn.col(j)) +
                        jet.tangent_basis.col(j).dot(dn.col(i)));

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(b, jet.metric);
  if (es.info() != Eigen::Success)
    throw SingularMetricError("curvature eigenproblem failed");
  jet.principal_curvatures = es.eigenvalues();
  jet.shape_operator = jet.metric.inverse() * b;
  jet.H = -jet.principal_curvatures.sum();
  jet.normA2 = jet.principal_curvatures.squaredNorm();
  jet.trA3 = jet.principal_curvatures.array().cube().sum();

  jet.x_tan = jet.x - jet.x.dot(jet.normal) * jet.normal;
  jet.normXtan2 = jet.x_tan.squaredNorm();
  Vector t = jet.tangent_basis.transpose() * jet.x;
  Vector c = jet.metric.ldlt().solve(t);
  jet.A_xt_xt = c.dot(b * c);
  return jet;
}

// ------------------------------------------------------------------ grids

long Grid::size() const {
  long s = 1;
  for (int m : npts) s *= m;
  return s;
}

long Grid::flat(std::span<const int> idx) const {
  long f = 0;
  for (size_t a = 0; a < npts.size(); ++a) f = f * npts[a] + idx[a];
  return f;
}

std::vector<int> Grid::unflat(long flat) const {
  std::vector<int> idx(npts.size());
  for (size_t a = npts.size(); a-- > 0;) {
    idx[a] = static_cast<int>(flat % npts[a]);
    flat /= npts[a];
  }
  return idx;
}

Vector Grid::point(std::span<const int> idx) const {
  Vector p = lo;
  for (size_t a = 0; a < npts.size(); ++a) p[a] += h * idx[a];
  return p;
}

Vector Grid::point_flat(long flat) const {
  auto idx = unflat(flat);
  return point(idx);
}

bool Grid::interior(long flat, double margin) const {
  const auto idx = unflat(flat);
  const double tol = 1e-9 * h;
  for (size_t a = 0; a < npts.size(); ++a) {
    const double off_lo = h * idx[a];
    const double off_hi = h * (npts[a] - 1 - idx[a]);
    if (off_lo < margin - tol || off_hi < margin - tol) return false;
  }
  return true;
}

Grid Grid::refined() const {
  Grid g;
  g.lo = lo;
  g.h = h / 2;
  g.npts.reserve(npts.size());
  for (int m : npts) g.npts.push_back(2 * (m - 1) + 1);
  return g;
}

Grid Grid::over_box(const Vector& lo, const Vector& hi, double h) {
  if (lo.size() != hi.size()) throw InvalidDimensionError("box corners disagree");
  if (!(h > 0)) throw UsageError("grid spacing must be positive");
  Grid g;
  g.lo = lo;
  g.h = h;
  g.npts.resize(lo.size());
  for (int a = 0; a < lo.size(); ++a) {
    if (!(hi[a] >= lo[a])) throw UsageError("box is empty");
    g.npts[a] = static_cast<int>(std::floor((hi[a] - lo[a]) / h + 1e-9)) + 1;
  }
  return g;
}

Stencil1D d1_stencil(int i, int npts) {
  if (npts < 3) throw UsageError("derivative stencils need at least 3 nodes per axis");
  Stencil1D s;
  if (i >= 1 && i <= npts - 2) {
    s.len = 2;
    s.off = {-1, 1, 0, 0};
    s.w = {-0.5, 0.5, 0, 0};
  } else {
    const int d = (i == 0) ? +1 : -1;
    s.len = 3;
    s.off = {0, d, 2 * d, 0};
    s.w = {-1.5 * d, 2.0 * d, -0.5 * d, 0};
  }
  return s;
}

Stencil1D d2_stencil(int i, int npts) {
  if (npts < 4) throw UsageError("second-derivative stencils need at least 4 nodes per axis");
  Stencil1D s;
  if (i >= 1 && i <= npts - 2) {
    s.len = 3;
    s.off = {-1, 0, 1, 0};
    s.w = {1.0, -2.0, 1.0, 0};
  } else {
    const int d = (i == 0) ? +1 : -1;
    s.len = 4;
    s.off = {0, d, 2 * d, 3 * d};
    s.w = {2.0, -5.0, 4.0, -1.0};
  }
  return s;
}

// ------------------------------------------------- sampled surface geometry

SurfaceGrid::SurfaceGrid(Grid grid, std::vector<GeomJet> jets)
    : grid_(std::move(grid)), jets_(std::move(jets)) {
  if (static_cast<long>(jets_.size()) != grid_.size())
    throw UsageError("one jet per grid node required");
  sqrtg_.resize(jets_.size());
  ginv_.resize(jets_.size());
  for (size_t i = 0; i < jets_.size(); ++i) {
    const Matrix& g = jets_[i].metric;
    check_metric(g);
    sqrtg_[i] = std::sqrt(g.determinant());
    ginv_[i] = g.inverse();
  }
}

SurfaceGrid SurfaceGrid::finite_difference(const ImmersedPatch& patch, double h) {
  Grid grid = Grid::over_box(patch.domain_lo, patch.domain_hi, h);
  std::vector<GeomJet> jets(grid.size());
  parallel_for(grid.size(), [&](long i) {
    jets[static_cast<size_t>(i)] = evaluate_jet(patch, grid.point_flat(i), h);
  });
  return SurfaceGrid(std::move(grid), std::move(jets));
}

SurfaceGrid SurfaceGrid::closed_form(const Grid& grid,
                                     const std::function<GeomJet(const Vector&)>& jet_at) {
  std::vector<GeomJet> jets(grid.size());
  parallel_for(grid.size(), [&](long i) {
    jets[static_cast<size_t>(i)] = jet_at(grid.point_flat(i));
  });
  return SurfaceGrid(grid, std::move(jets));
}

GridField SurfaceGrid::sample(const std::function<double(const GeomJet&)>& f) const {
  GridField out;
  out.grid = grid_;
  out.values.resize(jets_.size());
  for (size_t i = 0; i < jets_.size(); ++i) out.values[i] = f(jets_[i]);
  return out;
}

double SurfaceGrid::partial(const GridField& f, long flat, int axis) const {
  auto idx = grid_.unflat(flat);
  const Stencil1D st = d1_stencil(idx[axis], grid_.npts[axis]);
  double acc = 0;
  for (int k = 0; k < st.len; ++k) {
    auto nb = idx;
    nb[axis] += st.off[k];
    acc += st.w[k] * f.at(grid_.flat(nb));
  }
  return acc / grid_.h;
}

Vector SurfaceGrid::surface_gradient(const GridField& f, long flat) const {
  const int n = grid_.dim();
  Vector df(n);
  for (int a = 0; a < n; ++a) df[a] = partial(f, flat, a);
  return jets_[static_cast<size_t>(flat)].tangent_basis *
         (ginv_[static_cast<size_t>(flat)] * df);
}

double SurfaceGrid::flux(const GridField& f, long flat, int axis) const {
  const int n = grid_.dim();
  double acc = 0;
  for (int j = 0; j < n; ++j)
    acc += ginv_[static_cast<size_t>(flat)](axis, j) * partial(f, flat, j);
  return sqrtg_[static_cast<size_t>(flat)] * acc;
}

double SurfaceGrid::laplace_beltrami(const GridField& f, long flat) const {
  // (1/sqrt g) d_a (sqrt g g^{aj} d_j f), every derivative a second-order rule
  auto idx = grid_.unflat(flat);
  double acc = 0;
  for (int a = 0; a < grid_.dim(); ++a) {
    const Stencil1D st = d1_stencil(idx[a], grid_.npts[a]);
    for (int k = 0; k < st.len; ++k) {
      auto nb = idx;
      nb[a] += st.off[k];
      acc += st.w[k] * flux(f, grid_.flat(nb), a);
    }
  }
  return acc / (grid_.h * sqrtg_[static_cast<size_t>(flat)]);
}

double SurfaceGrid::drifted_L(const GridField& f, long flat) const {
  const GeomJet& jet = jets_[static_cast<size_t>(flat)];
  return laplace_beltrami(f, flat) + 0.5 * jet.x.dot(surface_gradient(f, flat));
}

double SurfaceGrid::drifted_L_alpha(const GridField& f, long flat, double alpha) const {
  const GeomJet& jet = jets_[static_cast<size_t>(flat)];
  return laplace_beltrami(f, flat) -
         0.5 * alpha * jet.x.dot(surface_gradient(f, flat));
}

Matrix orthonormal_complement(const Vector& w) {
  const double len = w.norm();
  if (!(len > 0) || !std::isfinite(len))
    throw SingularMetricError("cannot complement a zero vector");
  Matrix col = w / len;
  Eigen::HouseholderQR<Matrix> qr(col);
  Matrix q = qr.householderQ();
  return q.rightCols(w.size() - 1);
}

namespace {

SurfaceGrid surface_for_field(const ImmersedPatch& patch, const GridField& f) {
  std::vector<GeomJet> jets(f.grid.size());
  for (long i = 0; i < f.grid.size(); ++i)
    jets[static_cast<size_t>(i)] = evaluate_jet(patch, f.grid.point_flat(i), f.grid.h);
  return SurfaceGrid(f.grid, std::move(jets));
}

}  // namespace

Vector surface_gradient(const ImmersedPatch& patch, const GridField& f,
                        std::span<const int> node) {
  SurfaceGrid s = surface_for_field(patch, f);
  return s.surface_gradient(f, f.grid.flat(node));
}

double laplace_beltrami(const ImmersedPatch& patch, const GridField& f,
                        std::span<const int> node) {
  SurfaceGrid s = surface_for_field(patch, f);
  return s.laplace_beltrami(f, f.grid.flat(node));
}

}  // namespace expanderlab
