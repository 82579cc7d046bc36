#include "ringmod/normal.hpp"

#include <algorithm>
#include <cmath>

#include "ringmod/error.hpp"

namespace ringmod {

DomainIndicator::DomainIndicator() {
  fn_ = [](const Pt&) { return true; };
  description_ = "full";
}

DomainIndicator DomainIndicator::full() { return DomainIndicator(); }

DomainIndicator DomainIndicator::halfspace(const Vec& normal, double offset) {
  DomainIndicator d;
  Vec nrm = normal;
  d.fn_ = [nrm, offset](const Pt& x) { return nrm.dot(x) > offset; };
  d.description_ = "halfspace";
  return d;
}

DomainIndicator DomainIndicator::expression(Expr expr, int dim) {
  DomainIndicator d;
  d.description_ = "expr:" + expr.text();
  d.fn_ = [expr, dim](const Pt& x) {
    double vars[3] = {x[0], x[1], x[2]};
    return expr.eval(std::span<const double>(vars, static_cast<size_t>(dim))) > 0.0;
  };
  return d;
}

DomainIndicator DomainIndicator::function(std::function<bool(const Pt&)> fn,
                                          std::string description) {
  DomainIndicator d;
  d.fn_ = std::move(fn);
  d.description_ = std::move(description);
  return d;
}

GeodesicRing::GeodesicRing(double eps_, double eps0_, DomainIndicator domain_)
    : eps(eps_), eps0(eps0_), domain(std::move(domain_)) {
  require(std::isfinite(eps) && std::isfinite(eps0) && 0.0 < eps && eps < eps0,
          ErrorCode::InvalidArgument, "geodesic ring needs 0 < eps < eps0");
}

Vec direction_from_angles(int dim, std::span<const double> angles) {
  if (dim == 2) {
    require(angles.size() >= 1, ErrorCode::InvalidArgument, "need 1 angle in 2d");
    return Vec(std::cos(angles[0]), std::sin(angles[0]), 0.0);
  }
  require(angles.size() >= 2, ErrorCode::InvalidArgument, "need 2 angles in 3d");
  double sp = std::sin(angles[0]), cp = std::cos(angles[0]);
  return Vec(sp * std::cos(angles[1]), sp * std::sin(angles[1]), cp);
}

double angular_density(int dim, std::span<const double> angles) {
  return dim == 2 ? 1.0 : std::sin(angles[0]);
}

Pt NormalNeighborhood::exp(double r, const Vec& theta) const {
  require(std::isfinite(r) && r >= 0.0, ErrorCode::InvalidArgument,
          "exp-map radius must be nonnegative");
  if (r == 0.0) return center_;
  Vec dir = frame_ * theta;
  double tn = theta.head(3).norm();
  require(tn > 0.0, ErrorCode::InvalidArgument, "exp-map direction is zero");
  dir /= tn;
  if (metric_.has_closed_form_geodesics()) return closed_form_exp(metric_, center_, dir, r);
  double stops[1] = {r};
  return integrate_geodesic(metric_, center_, dir, stops)[0].x;
}

Pt NormalNeighborhood::exp_ode(double r, const Vec& theta) const {
  if (r == 0.0) return center_;
  Vec dir = frame_ * theta;
  dir /= theta.head(3).norm();
  double stops[1] = {r};
  return integrate_geodesic(metric_, center_, dir, stops)[0].x;
}

std::vector<GeodesicState> NormalNeighborhood::ray(const Vec& theta,
                                                   std::span<const double> radii) const {
  Vec dir = frame_ * theta;
  double tn = theta.head(3).norm();
  require(tn > 0.0, ErrorCode::InvalidArgument, "ray direction is zero");
  dir /= tn;

  if (!metric_.has_closed_form_geodesics())
    return integrate_geodesic(metric_, center_, dir, radii);

  std::vector<GeodesicState> states;
  states.reserve(radii.size());
  for (double r : radii) {
    GeodesicState st;
    st.x = r == 0.0 ? center_ : closed_form_exp(metric_, center_, dir, r);
    if (metric_.flat()) {
      st.v = dir;
    } else {
      // Radial velocity by central differences of the closed-form map.
      double h = 1e-6 * std::max(1.0, r);
      double rm = std::max(r - h, 0.0);
      Pt xp = closed_form_exp(metric_, center_, dir, r + h);
      Pt xm = rm == 0.0 ? center_ : closed_form_exp(metric_, center_, dir, rm);
      st.v = (xp - xm) / (r + h - rm);
    }
    states.push_back(st);
  }
  return states;
}

Pt NormalNeighborhood::exp_point(const Vec& y) const {
  double r = y.head(3).norm();
  if (r == 0.0) return center_;
  return exp(r, y / r);
}

double NormalNeighborhood::metric_deviation(double r) const {
  if (r <= 0.0) return 0.0;
  const auto& rs = deviation_radii_;
  const auto& vs = deviation_values_;
  if (rs.empty()) return 0.0;
  if (r >= rs.back()) return vs.back();
  auto it = std::upper_bound(rs.begin(), rs.end(), r);
  size_t hi = static_cast<size_t>(it - rs.begin());
  if (hi == 0) return vs.front() * (r / rs.front());
  double r0 = rs[hi - 1], r1 = rs[hi];
  double t = (r - r0) / (r1 - r0);
  return vs[hi - 1] + t * (vs[hi] - vs[hi - 1]);
}

namespace {

// Deterministic direction sample for the validation march.
std::vector<Vec> sample_directions(int dim) {
  std::vector<Vec> dirs;
  if (dim == 2) {
    for (int j = 0; j < 16; ++j) {
      double a = (j + 0.5) * 2.0 * M_PI / 16.0;
      dirs.emplace_back(std::cos(a), std::sin(a), 0.0);
    }
  } else {
    for (int i = 0; i < 5; ++i) {
      double polar = (i + 0.5) * M_PI / 5.0;
      for (int j = 0; j < 8; ++j) {
        double az = (j + 0.5) * 2.0 * M_PI / 8.0;
        dirs.emplace_back(std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az),
                          std::cos(polar));
      }
    }
  }
  return dirs;
}

}  // namespace

NormalNeighborhood build_normal_neighborhood(const Metric& metric, const Pt& center,
                                             double radius) {
  require(std::isfinite(radius) && radius > 0.0, ErrorCode::InvalidArgument,
          "normal neighborhood radius must be positive");
  require(metric.contains(center), ErrorCode::InvalidArgument,
          "neighborhood center lies outside the chart domain");

  NormalNeighborhood nbhd;
  nbhd.metric_ = metric;
  nbhd.center_ = center;
  nbhd.radius_max_ = radius;

  // Frame E = g(center)^{-1/2}: maps direction cosines to g-unit velocities,
  // so the pulled-back metric at the origin of normal coordinates is I.
  const int n = metric.dim();
  Mat g = metric.eval(center);
  Mat e = Mat::Identity();
  if (n == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g.topLeftCorner<2, 2>());
    require(es.eigenvalues().minCoeff() > 0.0, ErrorCode::NonPositiveDefinite,
            "metric is not positive definite at the center");
    Eigen::Matrix2d inv_sqrt = es.operatorInverseSqrt();
    e.topLeftCorner<2, 2>() = inv_sqrt;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(g);
    require(es.eigenvalues().minCoeff() > 0.0, ErrorCode::NonPositiveDefinite,
            "metric is not positive definite at the center");
    e = es.operatorInverseSqrt();
  }
  nbhd.frame_ = e;

  // March rays outward: estimate the pulled-back metric G(y) in normal
  // coordinates by finite differences; sqrt(det G) is the exp-map volume
  // distortion (1 at the origin, 0 at conjugate points).
  const auto dirs = sample_directions(n);
  const int n_radii = 8;
  const double fd_scale = metric.has_closed_form_geodesics() ? 1e-5 : 1e-3;

  std::vector<double> dev_radii, dev_values;
  for (int m = 1; m <= n_radii; ++m) {
    double r = radius * m / n_radii;
    double worst_dev = 0.0;
    for (const Vec& theta : dirs) {
      Vec y = r * theta;
      double h = fd_scale * std::max(r, 0.125 * radius);
      Mat jac = Mat::Identity();
      for (int a = 0; a < n; ++a) {
        Vec yp = y, ym = y;
        yp[a] += h;
        ym[a] -= h;
        Vec col = (nbhd.exp_point(yp) - nbhd.exp_point(ym)) / (2.0 * h);
        for (int row = 0; row < n; ++row) jac(row, a) = col[row];
      }
      Mat gx = metric.eval(nbhd.exp_point(y));
      Mat pulled = Mat::Identity();
      pulled.topLeftCorner(n, n) =
          jac.topLeftCorner(n, n).transpose() * gx.topLeftCorner(n, n) * jac.topLeftCorner(n, n);

      double det = n == 2 ? pulled.topLeftCorner<2, 2>().determinant()
                          : pulled.topLeftCorner<3, 3>().determinant();
      if (!(det > 0.0) || std::sqrt(det) < 0.1)
        fail(ErrorCode::RadiusTooLarge,
             "radial geodesics focus before the requested radius (exp-map distortion below 0.1)");

      Mat diff = pulled - Mat::Identity();
      double dev;
      if (n == 2) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(diff.topLeftCorner<2, 2>());
        dev = es.eigenvalues().cwiseAbs().maxCoeff();
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(diff);
        dev = es.eigenvalues().cwiseAbs().maxCoeff();
      }
      worst_dev = std::max(worst_dev, dev);
    }
    dev_radii.push_back(r);
    double prev = dev_values.empty() ? 0.0 : dev_values.back();
    dev_values.push_back(std::max(prev, worst_dev));
  }
  nbhd.deviation_radii_ = std::move(dev_radii);
  nbhd.deviation_values_ = std::move(dev_values);
  return nbhd;
}

double sphere_area_element(const NormalNeighborhood& nbhd, double r,
                           std::span<const double> angles) {
  const Metric& metric = nbhd.metric();
  const int n = metric.dim();
  require(r > 0.0 && r <= nbhd.radius_max() * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "sphere radius must lie in (0, radius_max]");

  const double h = metric.has_closed_form_geodesics() ? 1e-5 : 1e-3;
  Vec tangents[2];
  double u[2] = {angles[0], angles.size() > 1 ? angles[1] : 0.0};
  for (int a = 0; a < n - 1; ++a) {
    double up[2] = {u[0], u[1]}, um[2] = {u[0], u[1]};
    up[a] += h;
    um[a] -= h;
    Pt xp = nbhd.exp(r, direction_from_angles(n, std::span<const double>(up, 2)));
    Pt xm = nbhd.exp(r, direction_from_angles(n, std::span<const double>(um, 2)));
    tangents[a] = (xp - xm) / (2.0 * h);
  }

  Pt x = nbhd.exp(r, direction_from_angles(n, std::span<const double>(u, 2)));
  Mat g = metric.eval(x);
  double det;
  if (n == 2) {
    det = tangents[0].dot(g * tangents[0]);
  } else {
    double a00 = tangents[0].dot(g * tangents[0]);
    double a01 = tangents[0].dot(g * tangents[1]);
    double a11 = tangents[1].dot(g * tangents[1]);
    det = a00 * a11 - a01 * a01;
  }
  require(det > 0.0, ErrorCode::DegenerateTangent,
          "sphere parametrization is rank-deficient at the requested point");

  double sigma = angular_density(n, std::span<const double>(u, 2));
  require(sigma > 1e-12, ErrorCode::DegenerateTangent,
          "angular parametrization degenerates at the poles");
  return std::sqrt(det) / sigma;
}

}  // namespace ringmod
