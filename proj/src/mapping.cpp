#include "ringmod/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ringmod/error.hpp"
#include "ringmod/parallel.hpp"

namespace ringmod {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

MapModel MapModel::identity(Metric source, Metric target) {
  MapModel m;
  m.kind_ = Kind::Identity;
  m.source_ = std::move(source);
  m.target_ = std::move(target);
  m.description_ = "identity";
  return m;
}

MapModel MapModel::linear(Metric source, Metric target, const Mat& a) {
  MapModel m;
  m.kind_ = Kind::Linear;
  m.source_ = std::move(source);
  m.target_ = std::move(target);
  m.matrix_ = a;
  m.description_ = "linear";
  return m;
}

MapModel MapModel::radial_stretch(Metric source, Metric target, double k) {
  require(std::isfinite(k) && k >= 1.0, ErrorCode::InvalidArgument,
          "radial stretch exponent must be >= 1");
  MapModel m;
  m.kind_ = Kind::RadialStretch;
  m.source_ = std::move(source);
  m.target_ = std::move(target);
  m.stretch_ = k;
  m.description_ = "radial-stretch:" + std::to_string(k);
  return m;
}

MapModel MapModel::symbolic(Metric source, Metric target, std::vector<Expr> components) {
  require(static_cast<int>(components.size()) == source.dim(), ErrorCode::InvalidArgument,
          "symbolic map needs one component per dimension");
  MapModel m;
  m.kind_ = Kind::Symbolic;
  m.source_ = std::move(source);
  m.target_ = std::move(target);
  m.components_ = std::move(components);
  m.description_ = "symbolic";
  return m;
}

MapModel MapModel::from_functions(Metric source, Metric target,
                                  std::function<Pt(const Pt&)> forward,
                                  std::function<Mat(const Pt&)> jacobian,
                                  std::string description) {
  MapModel m;
  m.kind_ = Kind::Function;
  m.source_ = std::move(source);
  m.target_ = std::move(target);
  m.forward_ = std::move(forward);
  m.jacobian_ = std::move(jacobian);
  m.description_ = std::move(description);
  return m;
}

Pt MapModel::forward(const Pt& x) const {
  const int n = source_.dim();
  switch (kind_) {
    case Kind::Identity: return x;
    case Kind::Linear: {
      Pt y = matrix_ * x;
      for (int i = n; i < 3; ++i) y[i] = 0.0;
      return y;
    }
    case Kind::RadialStretch: {
      double r = x.head(3).norm();
      if (r == 0.0) return Pt::Zero();
      return std::pow(r, stretch_ - 1.0) * x;
    }
    case Kind::Symbolic: {
      double vars[3] = {x[0], x[1], x[2]};
      std::span<const double> v(vars, static_cast<size_t>(n));
      Pt y = Pt::Zero();
      for (int i = 0; i < n; ++i) y[i] = components_[static_cast<size_t>(i)].eval(v);
      return y;
    }
    case Kind::Function: return forward_(x);
  }
  fail(ErrorCode::Internal, "corrupt map kind");
}

bool MapModel::has_analytic_jacobian() const {
  switch (kind_) {
    case Kind::Identity:
    case Kind::Linear:
    case Kind::RadialStretch: return true;
    case Kind::Symbolic: return false;
    case Kind::Function: return static_cast<bool>(jacobian_);
  }
  return false;
}

Mat MapModel::jacobian_analytic(const Pt& x) const {
  const int n = source_.dim();
  switch (kind_) {
    case Kind::Identity: return Mat::Identity();
    case Kind::Linear: return matrix_;
    case Kind::RadialStretch: {
      double r = x.head(3).norm();
      Mat d = Mat::Identity();
      if (r == 0.0) {
        // Differentiable at the origin with Df = 0 for k > 1.
        double v = stretch_ > 1.0 ? 0.0 : 1.0;
        for (int i = 0; i < n; ++i) d(i, i) = v;
        return d;
      }
      double rk = std::pow(r, stretch_ - 1.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          d(i, j) = rk * ((i == j ? 1.0 : 0.0) + (stretch_ - 1.0) * x[i] * x[j] / (r * r));
      return d;
    }
    case Kind::Function:
      require(static_cast<bool>(jacobian_), ErrorCode::InvalidArgument,
              "map carries no analytic jacobian");
      return jacobian_(x);
    case Kind::Symbolic: break;
  }
  fail(ErrorCode::InvalidArgument, "map carries no analytic jacobian");
}

Mat MapModel::jacobian_fd(const Pt& x) const {
  const int n = source_.dim();
  const double h = 1e-5;
  auto central = [&](double step) {
    Mat d = Mat::Identity();
    for (int j = 0; j < n; ++j) {
      Pt xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      Pt col = (forward(xp) - forward(xm)) / (2.0 * step);
      for (int i = 0; i < n; ++i) d(i, j) = col[i];
    }
    return d;
  };
  Mat coarse = central(h);
  Mat fine = central(h / 2.0);
  double scale = std::max(coarse.topLeftCorner(n, n).norm(), 1e-12);
  double variation = (fine - coarse).topLeftCorner(n, n).norm() / scale;
  require(variation <= 0.10, ErrorCode::NotDifferentiable,
          "finite-difference differential varies by " + std::to_string(variation * 100.0) +
              "% between steps");
  return (4.0 * fine - coarse) / 3.0;  // Richardson on the central difference
}

Mat MapModel::jacobian(const Pt& x) const {
  return has_analytic_jacobian() ? jacobian_analytic(x) : jacobian_fd(x);
}

DilatationSample dilatation_at(const MapModel& map, const Pt& point, const ExponentSet& exps,
                               bool use_finite_differences) {
  const Metric& gs = map.source();
  const Metric& gt = map.target();
  const int n = gs.dim();
  require(gs.contains(point), ErrorCode::InvalidArgument,
          "dilatation point lies outside the source chart");

  Mat df = use_finite_differences || !map.has_analytic_jacobian() ? map.jacobian_fd(point)
                                                                  : map.jacobian_analytic(point);
  Pt image = map.forward(point);
  require(gt.contains(image), ErrorCode::ImageLeftChart,
          "map image lies outside the target chart");

  DilatationSample out;
  out.point = point;

  // Metric-normalized differential M = g_*(f(P))^{1/2} Df g(P)^{-1/2};
  // its singular values are the distance-quotient dilatations.
  Mat g_src = gs.eval(point);
  Mat g_tgt = gt.eval(image);
  double det_df, root_src, root_tgt;
  if (n == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es_s(g_src.topLeftCorner<2, 2>());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es_t(g_tgt.topLeftCorner<2, 2>());
    require(es_s.eigenvalues().minCoeff() > 0.0 && es_t.eigenvalues().minCoeff() > 0.0,
            ErrorCode::NonPositiveDefinite, "metric not positive definite at sample point");
    Eigen::Matrix2d m = es_t.operatorSqrt() * df.topLeftCorner<2, 2>() * es_s.operatorInverseSqrt();
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
    out.big_l = svd.singularValues()(0);
    out.small_l = svd.singularValues()(1);
    det_df = df.topLeftCorner<2, 2>().determinant();
    root_src = std::sqrt(es_s.eigenvalues().prod());
    root_tgt = std::sqrt(es_t.eigenvalues().prod());
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es_s(g_src);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es_t(g_tgt);
    require(es_s.eigenvalues().minCoeff() > 0.0 && es_t.eigenvalues().minCoeff() > 0.0,
            ErrorCode::NonPositiveDefinite, "metric not positive definite at sample point");
    Eigen::Matrix3d m = es_t.operatorSqrt() * df * es_s.operatorInverseSqrt();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
    out.big_l = svd.singularValues()(0);
    out.small_l = svd.singularValues()(2);
    det_df = df.determinant();
    root_src = std::sqrt(es_s.eigenvalues().prod());
    root_tgt = std::sqrt(es_t.eigenvalues().prod());
  }
  out.jacobian = std::abs(det_df) * root_tgt / root_src;

  if (out.jacobian != 0.0)
    out.k_p = std::pow(out.big_l, exps.p) / out.jacobian;
  else if (out.big_l == 0.0)
    out.k_p = 1.0;
  else
    out.k_p = std::numeric_limits<double>::infinity();
  return out;
}

WeightField dilatation_weight(const MapModel& map, const ExponentSet& exps,
                              bool use_finite_differences) {
  return WeightField::function(
      [map, exps, use_finite_differences](const Pt& p) {
        return dilatation_at(map, p, exps, use_finite_differences).k_p;
      },
      "K_" + std::to_string(exps.p) + "(" + map.description() + ")");
}

ClassifyReport classify_map(const MapModel& map, const NormalNeighborhood& nbhd, double eps,
                            double eps0, int resolution, std::uint64_t seed) {
  require(eps >= 0.0 && eps < eps0 && eps0 <= nbhd.radius_max() * (1.0 + 1e-12),
          ErrorCode::InvalidArgument, "classification region needs 0 <= eps < eps0 <= radius_max");
  const Metric& gs = map.source();
  const Metric& gt = map.target();
  const int n = gs.dim();
  ExponentSet exps = ExponentSet::make(n, static_cast<double>(n));

  // Sample points on a polar grid; eps = 0 adds the center itself.
  std::vector<Pt> samples;
  if (eps == 0.0) samples.push_back(nbhd.center());
  const int n_radial = std::max(resolution, 4);
  const int n_angular = 4 * std::max(resolution, 4);
  for (int ir = 0; ir < n_radial; ++ir) {
    double r = eps == 0.0 ? eps0 * (ir + 1.0) / n_radial
                          : eps + (ir + 0.5) * (eps0 - eps) / n_radial;
    if (n == 2) {
      for (int ia = 0; ia < n_angular; ++ia) {
        double a = (ia + 0.5) * 2.0 * M_PI / n_angular;
        samples.push_back(nbhd.exp(r, Vec(std::cos(a), std::sin(a), 0.0)));
      }
    } else {
      for (int ip = 0; ip < n_radial; ++ip) {
        double polar = (ip + 0.5) * M_PI / n_radial;
        for (int ia = 0; ia < n_angular; ++ia) {
          double az = (ia + 0.5) * 2.0 * M_PI / n_angular;
          samples.push_back(nbhd.exp(r, Vec(std::sin(polar) * std::cos(az),
                                            std::sin(polar) * std::sin(az), std::cos(polar))));
        }
      }
    }
  }

  ClassifyReport report;
  report.samples = static_cast<int>(samples.size());

  // Pointwise dilatations decide finite bilipschitz behavior.
  report.finitely_bilipschitz = true;
  for (const Pt& p : samples) {
    bool ok = true;
    try {
      ok = dilatation_at(map, p, exps).finitely_bilipschitz();
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) {
      report.finitely_bilipschitz = false;
      report.failures.push_back(p);
    }
  }

  // Pairwise distance quotients: grid neighbors plus seeded long-range pairs.
  std::vector<Pt> images(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) images[i] = map.forward(samples[i]);

  double lip = 0.0;
  double lstar = std::numeric_limits<double>::infinity();
  auto quotient = [&](size_t i, size_t j) {
    double d = geodesic_distance(gs, samples[i], samples[j]);
    if (d <= 0.0) return;
    double dstar = geodesic_distance(gt, images[i], images[j]);
    double ratio = dstar / d;
    lip = std::max(lip, ratio);
    lstar = std::min(lstar, ratio);
  };
  for (size_t i = 0; i + 1 < samples.size(); ++i) quotient(i, i + 1);
  std::mt19937_64 rng(seed);
  for (int t = 0; t < 1000; ++t) {
    size_t i = static_cast<size_t>(uniform01(rng) * static_cast<double>(samples.size()));
    size_t j = static_cast<size_t>(uniform01(rng) * static_cast<double>(samples.size()));
    i = std::min(i, samples.size() - 1);
    j = std::min(j, samples.size() - 1);
    if (i != j) quotient(i, j);
  }

  report.lip_estimate = lip;
  report.lstar_estimate = lstar;
  report.lipschitz = std::isfinite(lip);
  report.bilipschitz = report.lipschitz && lstar > 0.0;
  return report;
}

ShellGrid push_forward_grid(const ShellGrid& source, const MapModel& map) {
  require(source.has_tangents(), ErrorCode::InvalidArgument,
          "push-forward needs a source grid built with store_tangents");
  const Metric& gt = map.target();
  const int n = gt.dim();
  const int n_shells = source.shells();
  const int n_ang = source.angular();
  const size_t cells = static_cast<size_t>(n_shells) * static_cast<size_t>(n_ang);

  std::vector<Pt> points(cells, Pt::Zero());
  std::vector<double> area_w(cells, 0.0), volume_w(cells, 0.0), area_density(cells, 0.0);
  std::vector<uint8_t> mask(cells, 0);

  parallel_for(n_ang, source.options().threads, [&](int i) {
    for (int k = 0; k < n_shells; ++k) {
      const size_t idx = static_cast<size_t>(k) * static_cast<size_t>(n_ang) +
                         static_cast<size_t>(i);
      const Pt& x = source.point(k, i);
      Pt y = map.forward(x);
      require(gt.contains(y), ErrorCode::ImageLeftChart,
              "image surface left the target chart");
      points[idx] = y;
      mask[idx] = source.inside(k, i) ? 1 : 0;

      // Composed-parametrization derivatives: directional differences of f
      // along the stored source frame vectors.
      auto push_dir = [&](const Vec& t) -> Vec {
        double tn = t.head(3).norm();
        if (tn == 0.0) return Vec::Zero();
        double c = 1e-4 / tn;
        Pt yp = map.forward(x + c * t);
        Pt ym = map.forward(x - c * t);
        return (yp - ym) / (2.0 * c);
      };
      Vec radial = push_dir(source.radial_velocity(k, i));
      Vec tangents[2];
      for (int a = 0; a < n - 1; ++a) tangents[a] = push_dir(source.angular_tangent(k, i, a));

      Mat g = gt.eval(y);
      double det_area;
      if (n == 2) {
        det_area = tangents[0].dot(g * tangents[0]);
      } else {
        double a00 = tangents[0].dot(g * tangents[0]);
        double a01 = tangents[0].dot(g * tangents[1]);
        double a11 = tangents[1].dot(g * tangents[1]);
        det_area = a00 * a11 - a01 * a01;
      }
      require(det_area > 0.0, ErrorCode::DegenerateTangent,
              "image surface parametrization is degenerate at a grid cell");
      const AngularGrid::Node& node = source.angular_grid().nodes[static_cast<size_t>(i)];
      double density = std::sqrt(det_area) / node.sigma;

      Mat jac = Mat::Identity();
      for (int row = 0; row < n; ++row) {
        jac(row, 0) = radial[row];
        for (int a = 0; a < n - 1; ++a) jac(row, 1 + a) = tangents[a][row];
      }
      double det_jac = n == 2 ? jac.topLeftCorner<2, 2>().determinant()
                              : jac.topLeftCorner<3, 3>().determinant();
      double vol_density = gt.volume_element(y) * std::abs(det_jac) / node.sigma;

      area_density[idx] = density;
      area_w[idx] = density * node.weight;
      volume_w[idx] = vol_density * node.weight * source.radial_weight(k);
    }
  });

  std::vector<double> radii(static_cast<size_t>(n_shells)), radial_weights(
                                                               static_cast<size_t>(n_shells));
  for (int k = 0; k < n_shells; ++k) {
    radii[static_cast<size_t>(k)] = source.radius(k);
    radial_weights[static_cast<size_t>(k)] = source.radial_weight(k);
  }
  GeodesicRing ring(source.eps(), source.eps0(), source.domain());
  return ShellGrid::from_raw(source.neighborhood(), ring, source.options(),
                             source.angular_grid(), std::move(radii), std::move(radial_weights),
                             std::move(points), std::move(area_w), std::move(volume_w),
                             std::move(area_density), std::move(mask));
}

Theorem2Report verify_theorem2(const MapModel& map, const NormalNeighborhood& source_nbhd,
                               const GeodesicRing& ring, const ExponentSet& exps,
                               const GridOptions& opts_in) {
  GridOptions opts = opts_in;
  opts.store_tangents = true;

  Theorem2Report report;
  report.finitely_bilipschitz =
      classify_map(map, source_nbhd, ring.eps, ring.eps0, 8).finitely_bilipschitz;

  ShellGrid source = ShellGrid::build(source_nbhd, ring, opts);
  WeightField kp = dilatation_weight(map, exps);

  // Scan for the infinite-K_p sentinel; integration clamps it, the report
  // flags it.
  for (int k = 0; k < source.shells() && !report.kp_unbounded; k += std::max(1, source.shells() / 16))
    for (int i = 0; i < source.angular(); i += std::max(1, source.angular() / 32)) {
      if (!source.inside(k, i)) continue;
      if (!std::isfinite(kp.eval(source.point(k, i), source.radius(k)))) {
        report.kp_unbounded = true;
        break;
      }
    }

  report.rhs = lower_bound_integral(source, kp, exps, opts.threads);

  ShellGrid image = push_forward_grid(source, map);
  report.lhs = surface_family_modulus(image, WeightField::constant(1.0), exps,
                                      ModulusKind::ConvexOracle, opts.threads)
                   .value;

  report.gap = (report.lhs - report.rhs) / std::max(report.rhs, 1e-300);
  report.holds = report.lhs >= report.rhs * (1.0 - 1e-3) - 1e-12;
  return report;
}

}  // namespace ringmod
