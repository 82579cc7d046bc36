#include "ringmod/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "ringmod/error.hpp"

namespace ringmod {

namespace {

constexpr double kChristoffelStep = 1e-5;  // FD step for custom-metric derivatives

bool finite(const Pt& x) {
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

std::vector<std::string> chart_variables(int dim) {
  std::vector<std::string> names;
  for (int i = 0; i < dim; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

}  // namespace

Box Box::cube(int dim, double half_width) {
  Box b;
  b.dim = dim;
  for (int i = 0; i < dim; ++i) {
    b.lo[i] = -half_width;
    b.hi[i] = half_width;
  }
  return b;
}

bool Box::contains(const Pt& x) const {
  for (int i = 0; i < dim; ++i)
    if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
  return true;
}

const char* metric_kind_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::Euclidean: return "euclidean";
    case MetricKind::RoundSphere: return "round-sphere";
    case MetricKind::PoincareBall: return "poincare-ball";
    case MetricKind::ConformalFlat: return "conformal-flat";
    case MetricKind::Custom: return "custom";
  }
  return "?";
}

Metric Metric::euclidean(int dim) {
  require(dim == 2 || dim == 3, ErrorCode::InvalidArgument, "metric dimension must be 2 or 3");
  Metric m;
  m.dim_ = dim;
  m.kind_ = MetricKind::Euclidean;
  m.box_ = Box::cube(dim, 100.0);
  m.lambda_constant_ = true;
  m.lambda_value_ = 1.0;
  return m;
}

Metric Metric::round_sphere(int dim) {
  require(dim == 2 || dim == 3, ErrorCode::InvalidArgument, "metric dimension must be 2 or 3");
  Metric m;
  m.dim_ = dim;
  m.kind_ = MetricKind::RoundSphere;
  // Stereographic chart of the unit sphere; |x| = 20 sits within 0.1 of the
  // missing antipode, which is plenty for desk-scale neighborhoods.
  m.box_ = Box::cube(dim, 20.0);
  return m;
}

Metric Metric::poincare_ball(int dim) {
  require(dim == 2 || dim == 3, ErrorCode::InvalidArgument, "metric dimension must be 2 or 3");
  Metric m;
  m.dim_ = dim;
  m.kind_ = MetricKind::PoincareBall;
  // Declared box stays strictly inside the unit ball (corner norm < 1).
  m.box_ = Box::cube(dim, dim == 2 ? 0.70 : 0.57);
  return m;
}

Metric Metric::conformal_flat(int dim, Expr lambda) {
  require(dim == 2 || dim == 3, ErrorCode::InvalidArgument, "metric dimension must be 2 or 3");
  Metric m;
  m.dim_ = dim;
  m.kind_ = MetricKind::ConformalFlat;
  m.box_ = Box::cube(dim, 100.0);
  m.lambda_constant_ = lambda.is_constant();
  if (m.lambda_constant_) {
    m.lambda_value_ = lambda.eval(std::vector<double>(static_cast<size_t>(dim), 0.0));
    require(m.lambda_value_ > 0.0, ErrorCode::NonPositiveDefinite,
            "conformal factor must be positive");
  }
  m.lambda_ = std::move(lambda);
  return m;
}

Metric Metric::custom(int dim, std::vector<std::vector<Expr>> entries) {
  require(dim == 2 || dim == 3, ErrorCode::InvalidArgument, "metric dimension must be 2 or 3");
  require(static_cast<int>(entries.size()) == dim, ErrorCode::InvalidArgument,
          "custom metric needs dim x dim entries");
  for (const auto& row : entries)
    require(static_cast<int>(row.size()) == dim, ErrorCode::InvalidArgument,
            "custom metric needs dim x dim entries");
  Metric m;
  m.dim_ = dim;
  m.kind_ = MetricKind::Custom;
  m.box_ = Box::cube(dim, 100.0);
  m.entries_ = std::move(entries);
  return m;
}

Metric& Metric::set_domain(const Box& box) {
  require(box.dim == dim_, ErrorCode::InvalidArgument, "domain box dimension mismatch");
  box_ = box;
  return *this;
}

bool Metric::contains(const Pt& x) const {
  if (!finite(x) || !box_.contains(x)) return false;
  if (kind_ == MetricKind::PoincareBall) {
    double r2 = 0.0;
    for (int i = 0; i < dim_; ++i) r2 += x[i] * x[i];
    if (r2 >= 1.0) return false;
  }
  return true;
}

double Metric::conformal_lambda(const Pt& x) const {
  switch (kind_) {
    case MetricKind::Euclidean: return 1.0;
    case MetricKind::RoundSphere: {
      double r2 = x.head(dim_ == 2 ? 2 : 3).squaredNorm();
      double s = 1.0 + r2;
      return 4.0 / (s * s);
    }
    case MetricKind::PoincareBall: {
      double r2 = x.head(dim_ == 2 ? 2 : 3).squaredNorm();
      double s = 1.0 - r2;
      return 4.0 / (s * s);
    }
    case MetricKind::ConformalFlat: {
      if (lambda_constant_) return lambda_value_;
      double vars[3] = {x[0], x[1], x[2]};
      return lambda_.eval(std::span<const double>(vars, static_cast<size_t>(dim_)));
    }
    case MetricKind::Custom: break;
  }
  fail(ErrorCode::Internal, "conformal factor requested for non-conformal metric");
}

Mat Metric::eval(const Pt& x) const {
  Mat g = Mat::Identity();
  if (kind_ == MetricKind::Custom) {
    double vars[3] = {x[0], x[1], x[2]};
    std::span<const double> v(vars, static_cast<size_t>(dim_));
    // Upper triangle evaluated once and mirrored, so symmetry is exact.
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j) {
        double gij = entries_[static_cast<size_t>(i)][static_cast<size_t>(j)].eval(v);
        g(i, j) = gij;
        g(j, i) = gij;
      }
    return g;
  }
  double lam = conformal_lambda(x);
  for (int i = 0; i < dim_; ++i) g(i, i) = lam;
  return g;
}

double Metric::volume_element(const Pt& x) const {
  double det;
  if (kind_ != MetricKind::Custom) {
    double lam = conformal_lambda(x);
    det = dim_ == 2 ? lam * lam : lam * lam * lam;
  } else {
    Mat g = eval(x);
    det = dim_ == 2 ? g.topLeftCorner<2, 2>().determinant()
                    : g.topLeftCorner<3, 3>().determinant();
  }
  require(det > 0.0, ErrorCode::NonPositiveDefinite,
          "metric determinant is not positive at a sampled point");
  return std::sqrt(det);
}

double Metric::min_eigenvalue(const Pt& x) const {
  Mat g = eval(x);
  if (dim_ == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g.topLeftCorner<2, 2>());
    return es.eigenvalues().minCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(g);
  return es.eigenvalues().minCoeff();
}

double Metric::norm(const Pt& x, const Vec& v) const {
  Mat g = eval(x);
  double q = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) q += g(i, j) * v[i] * v[j];
  return std::sqrt(std::max(q, 0.0));
}

Vec Metric::conformal_log_gradient(const Pt& x) const {
  // phi = log(lambda)/2; closed forms for the catalog charts.
  Vec grad = Vec::Zero();
  switch (kind_) {
    case MetricKind::Euclidean: return grad;
    case MetricKind::RoundSphere: {
      double s = 1.0 + x.head(3).squaredNorm();
      for (int i = 0; i < dim_; ++i) grad[i] = -2.0 * x[i] / s;
      return grad;
    }
    case MetricKind::PoincareBall: {
      double s = 1.0 - x.head(3).squaredNorm();
      for (int i = 0; i < dim_; ++i) grad[i] = 2.0 * x[i] / s;
      return grad;
    }
    case MetricKind::ConformalFlat: {
      if (lambda_constant_) return grad;
      double lam = conformal_lambda(x);
      for (int i = 0; i < dim_; ++i) {
        Pt xp = x, xm = x;
        xp[i] += kChristoffelStep;
        xm[i] -= kChristoffelStep;
        grad[i] = (conformal_lambda(xp) - conformal_lambda(xm)) / (2.0 * kChristoffelStep * 2.0 * lam);
      }
      return grad;
    }
    case MetricKind::Custom: break;
  }
  fail(ErrorCode::Internal, "log gradient requested for custom metric");
}

Vec Metric::geodesic_acceleration(const Pt& x, const Vec& v) const {
  Vec accel = Vec::Zero();
  if (kind_ == MetricKind::Euclidean) return accel;
  if (kind_ != MetricKind::Custom) {
    // Conformal metric g = e^{2 phi} I:
    //   Gamma^k_ij = d_j phi delta_ik + d_i phi delta_jk - d_k phi delta_ij
    //   a^k = -2 (grad phi . v) v^k + |v|^2 d_k phi
    Vec grad = conformal_log_gradient(x);
    double gv = 0.0, vv = 0.0;
    for (int i = 0; i < dim_; ++i) {
      gv += grad[i] * v[i];
      vv += v[i] * v[i];
    }
    for (int k = 0; k < dim_; ++k) accel[k] = -2.0 * gv * v[k] + vv * grad[k];
    return accel;
  }

  // Custom metric: central differences of g, then
  //   a = -g^{-1} (A - B/2),  A_l = (d_i g_jl) v^i v^j,  B_l = (d_l g_ij) v^i v^j
  Mat dg[3];
  for (int k = 0; k < dim_; ++k) {
    Pt xp = x, xm = x;
    xp[k] += kChristoffelStep;
    xm[k] -= kChristoffelStep;
    dg[k] = (eval(xp) - eval(xm)) / (2.0 * kChristoffelStep);
  }
  Vec rhs = Vec::Zero();
  for (int l = 0; l < dim_; ++l) {
    double a = 0.0, b = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) {
        a += dg[i](j, l) * v[i] * v[j];
        b += dg[l](i, j) * v[i] * v[j];
      }
    rhs[l] = a - 0.5 * b;
  }
  Mat g = eval(x);
  if (dim_ == 2) {
    Eigen::Vector2d y = g.topLeftCorner<2, 2>().ldlt().solve(rhs.head<2>());
    accel[0] = -y[0];
    accel[1] = -y[1];
  } else {
    Eigen::Vector3d y = g.ldlt().solve(rhs);
    accel = -y;
  }
  return accel;
}

bool Metric::flat() const {
  return kind_ == MetricKind::Euclidean ||
         (kind_ == MetricKind::ConformalFlat && lambda_constant_);
}

double Metric::constant_conformal_factor() const {
  require(flat(), ErrorCode::Internal, "constant conformal factor of a non-flat metric");
  return lambda_value_;
}

bool Metric::has_closed_form_geodesics() const {
  return flat() || kind_ == MetricKind::RoundSphere || kind_ == MetricKind::PoincareBall;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with adaptive steps, trimmed to land on checkpoints.

namespace {

struct Ode6 {
  double y[6];
};

void geodesic_rhs(const Metric& m, const Ode6& y, Ode6& dy) {
  Pt x(y.y[0], y.y[1], y.y[2]);
  Vec v(y.y[3], y.y[4], y.y[5]);
  Vec a = m.geodesic_acceleration(x, v);
  dy.y[0] = v[0];
  dy.y[1] = v[1];
  dy.y[2] = v[2];
  dy.y[3] = a[0];
  dy.y[4] = a[1];
  dy.y[5] = a[2];
}

constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

// One trial step; returns the scaled error norm and the candidate state.
double dopri_step(const Metric& m, const Ode6& y, double h, Ode6& out, const OdeOptions& opts) {
  Ode6 k1, k2, k3, k4, k5, k6, k7, t;
  geodesic_rhs(m, y, k1);
  for (int i = 0; i < 6; ++i) t.y[i] = y.y[i] + h * kA21 * k1.y[i];
  geodesic_rhs(m, t, k2);
  for (int i = 0; i < 6; ++i) t.y[i] = y.y[i] + h * (kA31 * k1.y[i] + kA32 * k2.y[i]);
  geodesic_rhs(m, t, k3);
  for (int i = 0; i < 6; ++i)
    t.y[i] = y.y[i] + h * (kA41 * k1.y[i] + kA42 * k2.y[i] + kA43 * k3.y[i]);
  geodesic_rhs(m, t, k4);
  for (int i = 0; i < 6; ++i)
    t.y[i] = y.y[i] + h * (kA51 * k1.y[i] + kA52 * k2.y[i] + kA53 * k3.y[i] + kA54 * k4.y[i]);
  geodesic_rhs(m, t, k5);
  for (int i = 0; i < 6; ++i)
    t.y[i] = y.y[i] + h * (kA61 * k1.y[i] + kA62 * k2.y[i] + kA63 * k3.y[i] + kA64 * k4.y[i] +
                           kA65 * k5.y[i]);
  geodesic_rhs(m, t, k6);
  for (int i = 0; i < 6; ++i)
    out.y[i] = y.y[i] + h * (kB1 * k1.y[i] + kB3 * k3.y[i] + kB4 * k4.y[i] + kB5 * k5.y[i] +
                             kB6 * k6.y[i]);
  geodesic_rhs(m, out, k7);

  double err = 0.0;
  for (int i = 0; i < 6; ++i) {
    double e = h * (kE1 * k1.y[i] + kE3 * k3.y[i] + kE4 * k4.y[i] + kE5 * k5.y[i] +
                    kE6 * k6.y[i] + kE7 * k7.y[i]);
    double scale = opts.abs_tol + opts.rel_tol * std::max(std::abs(y.y[i]), std::abs(out.y[i]));
    err += (e / scale) * (e / scale);
  }
  return std::sqrt(err / 6.0);
}

}  // namespace

Vec normalize_direction(const Metric& metric, const Pt& x, const Vec& v) {
  require(finite(v), ErrorCode::InvalidArgument, "direction has non-finite components");
  Vec u = v;
  for (int i = metric.dim(); i < 3; ++i) u[i] = 0.0;
  double n = metric.norm(x, u);
  require(n > 0.0, ErrorCode::InvalidArgument, "direction has zero g-norm");
  return u / n;
}

std::vector<GeodesicState> integrate_geodesic(const Metric& metric, const Pt& start,
                                              const Vec& unit_dir, std::span<const double> stops,
                                              const OdeOptions& opts) {
  require(metric.contains(start), ErrorCode::TrajectoryLeftChart,
          "geodesic start point lies outside the chart domain");
  std::vector<GeodesicState> out;
  out.reserve(stops.size());

  Ode6 y;
  y.y[0] = start[0];
  y.y[1] = start[1];
  y.y[2] = start[2];
  y.y[3] = unit_dir[0];
  y.y[4] = unit_dir[1];
  y.y[5] = unit_dir[2];

  double s = 0.0;
  double total = stops.empty() ? 0.0 : stops.back();
  double h = std::max(total / 128.0, 1e-6);
  long steps = 0;

  for (double target : stops) {
    require(target >= s - 1e-15, ErrorCode::InvalidArgument, "geodesic stops must be ascending");
    while (s < target - 1e-15) {
      double htry = std::min(h, target - s);
      Ode6 ynext;
      double err = dopri_step(metric, y, htry, ynext, opts);
      if (++steps > opts.max_steps)
        fail(ErrorCode::StepFailure, "geodesic integrator exceeded the step budget");
      if (err <= 1.0) {
        y = ynext;
        s += htry;
        Pt x(y.y[0], y.y[1], y.y[2]);
        if (!metric.contains(x))
          fail(ErrorCode::TrajectoryLeftChart, "geodesic left the chart domain");
      }
      double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h = htry * std::clamp(factor, 0.2, 5.0);
      if (h < 1e-14 * std::max(1.0, total))
        fail(ErrorCode::StepFailure, "geodesic integrator step size underflow");
    }
    GeodesicState st;
    st.x = Pt(y.y[0], y.y[1], y.y[2]);
    st.v = Vec(y.y[3], y.y[4], y.y[5]);
    out.push_back(st);
  }
  return out;
}

Pt geodesic_shoot_ode(const Metric& metric, const Pt& start, const Vec& velocity, double length,
                      const OdeOptions& opts) {
  require(std::isfinite(length) && length >= 0.0, ErrorCode::InvalidArgument,
          "geodesic length must be nonnegative");
  Vec dir = normalize_direction(metric, start, velocity);
  if (length == 0.0) return start;
  double stops[1] = {length};
  return integrate_geodesic(metric, start, dir, stops, opts)[0].x;
}

// ---------------------------------------------------------------------------
// Closed forms for the catalog charts.

namespace {

// Stereographic chart <-> unit sphere in R^{n+1}; x = u / (1 - w).
void sphere_lift(const Pt& x, int dim, Vec& u, double& w) {
  double r2 = 0.0;
  for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
  double s = 1.0 + r2;
  u = Vec::Zero();
  for (int i = 0; i < dim; ++i) u[i] = 2.0 * x[i] / s;
  w = (r2 - 1.0) / s;
}

void sphere_lift_tangent(const Pt& x, const Vec& t, int dim, Vec& du, double& dw) {
  double r2 = 0.0, xt = 0.0;
  for (int i = 0; i < dim; ++i) {
    r2 += x[i] * x[i];
    xt += x[i] * t[i];
  }
  double s = 1.0 + r2;
  du = Vec::Zero();
  for (int i = 0; i < dim; ++i) du[i] = 2.0 * t[i] / s - 4.0 * x[i] * xt / (s * s);
  dw = 4.0 * xt / (s * s);
}

// Ball chart <-> hyperboloid w^2 - |u|^2 = 1; x = u / (1 + w).
void ball_lift(const Pt& x, int dim, Vec& u, double& w) {
  double r2 = 0.0;
  for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
  double s = 1.0 - r2;
  u = Vec::Zero();
  for (int i = 0; i < dim; ++i) u[i] = 2.0 * x[i] / s;
  w = (1.0 + r2) / s;
}

void ball_lift_tangent(const Pt& x, const Vec& t, int dim, Vec& du, double& dw) {
  double r2 = 0.0, xt = 0.0;
  for (int i = 0; i < dim; ++i) {
    r2 += x[i] * x[i];
    xt += x[i] * t[i];
  }
  double s = 1.0 - r2;
  du = Vec::Zero();
  for (int i = 0; i < dim; ++i) du[i] = 2.0 * t[i] / s + 4.0 * x[i] * xt / (s * s);
  dw = 4.0 * xt / (s * s);
}

}  // namespace

Pt closed_form_exp(const Metric& metric, const Pt& start, const Vec& unit_dir, double r) {
  switch (metric.kind()) {
    case MetricKind::Euclidean:
    case MetricKind::ConformalFlat:
      return start + r * unit_dir;
    case MetricKind::RoundSphere: {
      Vec cu, vu;
      double cw, vw;
      sphere_lift(start, metric.dim(), cu, cw);
      sphere_lift_tangent(start, unit_dir, metric.dim(), vu, vw);
      double c = std::cos(r), s = std::sin(r);
      Vec yu = c * cu + s * vu;
      double yw = c * cw + s * vw;
      require(1.0 - yw > 1e-12, ErrorCode::TrajectoryLeftChart,
              "geodesic reached the missing point of the stereographic chart");
      Pt out = yu / (1.0 - yw);
      require(metric.contains(out), ErrorCode::TrajectoryLeftChart,
              "geodesic endpoint lies outside the chart domain");
      return out;
    }
    case MetricKind::PoincareBall: {
      Vec cu, vu;
      double cw, vw;
      ball_lift(start, metric.dim(), cu, cw);
      ball_lift_tangent(start, unit_dir, metric.dim(), vu, vw);
      double c = std::cosh(r), s = std::sinh(r);
      Vec yu = c * cu + s * vu;
      double yw = c * cw + s * vw;
      Pt out = yu / (1.0 + yw);
      require(metric.contains(out), ErrorCode::TrajectoryLeftChart,
              "geodesic endpoint lies outside the chart domain");
      return out;
    }
    case MetricKind::Custom: break;
  }
  fail(ErrorCode::Internal, "no closed-form exponential for this metric");
}

Pt geodesic_shoot(const Metric& metric, const Pt& start, const Vec& velocity, double length,
                  const OdeOptions& opts) {
  require(std::isfinite(length) && length >= 0.0, ErrorCode::InvalidArgument,
          "geodesic length must be nonnegative");
  require(metric.contains(start), ErrorCode::TrajectoryLeftChart,
          "geodesic start point lies outside the chart domain");
  if (metric.flat()) {
    Vec dir = normalize_direction(metric, start, velocity);
    Pt end = start + length * dir;
    require(metric.contains(end), ErrorCode::TrajectoryLeftChart,
            "geodesic endpoint lies outside the chart domain");
    return end;
  }
  return geodesic_shoot_ode(metric, start, velocity, length, opts);
}

Vec log_map_numeric(const Metric& metric, const Pt& a, const Pt& b, const OdeOptions& opts) {
  const int n = metric.dim();
  auto exp1 = [&](const Vec& w) -> std::optional<Pt> {
    double len = metric.norm(a, w);
    if (len < 1e-300) return a;
    try {
      return geodesic_shoot_ode(metric, a, w / len, len, opts);
    } catch (const Error&) {
      return std::nullopt;  // trial trajectory left the chart
    }
  };

  Vec w = b - a;
  for (int i = n; i < 3; ++i) w[i] = 0.0;
  double btol = 1e-11 * (1.0 + b.head(3).norm());

  for (int iter = 0; iter < 60; ++iter) {
    std::optional<Pt> e = exp1(w);
    require(e.has_value(), ErrorCode::OutsideNormalRange,
            "log-map shooting trajectory left the chart");
    Vec res = *e - b;
    double rn = res.head(3).norm();
    if (rn <= btol) return w;

    // FD Jacobian of the time-1 exponential, then a damped Newton update.
    Mat jac = Mat::Identity();
    double h = 1e-6 * (1.0 + w.head(3).norm());
    for (int i = 0; i < n; ++i) {
      Vec wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      std::optional<Pt> ep = exp1(wp), em = exp1(wm);
      require(ep.has_value() && em.has_value(), ErrorCode::OutsideNormalRange,
              "log-map Jacobian probe left the chart");
      Vec col = (*ep - *em) / (2.0 * h);
      for (int r = 0; r < n; ++r) jac(r, i) = col[r];
    }
    Vec delta = Vec::Zero();
    if (n == 2) {
      Eigen::Vector2d d = jac.topLeftCorner<2, 2>().fullPivLu().solve(res.head<2>());
      delta[0] = d[0];
      delta[1] = d[1];
    } else {
      delta = jac.fullPivLu().solve(res);
    }

    double damp = 1.0;
    bool improved = false;
    for (int back = 0; back < 12; ++back) {
      Vec trial = w - damp * delta;
      std::optional<Pt> et = exp1(trial);
      if (et.has_value() && (*et - b).head(3).norm() < rn) {
        w = trial;
        improved = true;
        break;
      }
      damp *= 0.5;
    }
    if (!improved)
      fail(ErrorCode::OutsideNormalRange, "log-map Newton iteration stalled");
  }
  fail(ErrorCode::OutsideNormalRange, "log-map Newton iteration did not converge");
}

double geodesic_distance(const Metric& metric, const Pt& a, const Pt& b) {
  require(metric.contains(a) && metric.contains(b), ErrorCode::InvalidArgument,
          "distance endpoints must lie in the chart domain");
  const int n = metric.dim();
  Vec d = b - a;
  for (int i = n; i < 3; ++i) d[i] = 0.0;
  if (d.head(3).norm() == 0.0) return 0.0;

  switch (metric.kind()) {
    case MetricKind::Euclidean:
      return d.head(3).norm();
    case MetricKind::ConformalFlat:
      if (metric.flat()) return std::sqrt(metric.constant_conformal_factor()) * d.head(3).norm();
      break;
    case MetricKind::RoundSphere: {
      Vec ua, ub;
      double wa, wb;
      sphere_lift(a, n, ua, wa);
      sphere_lift(b, n, ub, wb);
      double dot = ua.dot(ub) + wa * wb;
      return std::acos(std::clamp(dot, -1.0, 1.0));
    }
    case MetricKind::PoincareBall: {
      Vec ua, ub;
      double wa, wb;
      ball_lift(a, n, ua, wa);
      ball_lift(b, n, ub, wb);
      double m = wa * wb - ua.dot(ub);
      return std::acosh(std::max(m, 1.0));
    }
    case MetricKind::Custom: break;
  }
  Vec w = log_map_numeric(metric, a, b);
  return metric.norm(a, w);
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Ok: return "ok";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::TrajectoryLeftChart: return "trajectory_left_chart";
    case ErrorCode::StepFailure: return "step_failure";
    case ErrorCode::RadiusTooLarge: return "radius_too_large";
    case ErrorCode::OutsideNormalRange: return "outside_normal_range";
    case ErrorCode::DegenerateTangent: return "degenerate_tangent";
    case ErrorCode::NonPositiveDefinite: return "non_positive_definite";
    case ErrorCode::EmptyShell: return "empty_shell";
    case ErrorCode::SolverNotConverged: return "solver_not_converged";
    case ErrorCode::NotNormalized: return "not_normalized";
    case ErrorCode::NotDifferentiable: return "not_differentiable";
    case ErrorCode::ImageLeftChart: return "image_left_chart";
    case ErrorCode::UnsupportedExponent: return "unsupported_exponent";
    case ErrorCode::IoError: return "io_error";
    case ErrorCode::Internal: return "internal";
  }
  return "?";
}

}  // namespace ringmod
