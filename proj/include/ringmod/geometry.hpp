#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ringmod/expr.hpp"

namespace ringmod {

// Chart points and tangent vectors live in R^3 with trailing coordinates
// zeroed when the dimension is 2. The metric carries the actual dimension.
using Pt = Eigen::Vector3d;
using Vec = Eigen::Vector3d;
using Mat = Eigen::Matrix3d;

inline Pt make_pt(double x, double y, double z = 0.0) { return Pt(x, y, z); }

// Axis-aligned chart domain box.
struct Box {
  Pt lo = Pt::Zero();
  Pt hi = Pt::Zero();
  int dim = 0;

  static Box cube(int dim, double half_width);
  bool contains(const Pt& x) const;
};

enum class MetricKind { Euclidean, RoundSphere, PoincareBall, ConformalFlat, Custom };

const char* metric_kind_name(MetricKind kind);

// Smooth Riemannian metric in a single chart. Catalog kinds:
//   euclidean       g = I
//   round-sphere    unit sphere, stereographic chart: g = 4/(1+|x|^2)^2 I
//   poincare-ball   g = 4/(1-|x|^2)^2 I on |x| < 1
//   conformal-flat  g = lambda(x) I, lambda a positive scalar expression
//   custom          symmetric matrix of expressions in x1..xn
class Metric {
 public:
  Metric() = default;  // inert until assigned from a factory

  static Metric euclidean(int dim);
  static Metric round_sphere(int dim);
  static Metric poincare_ball(int dim);
  static Metric conformal_flat(int dim, Expr lambda);
  static Metric custom(int dim, std::vector<std::vector<Expr>> entries);

  int dim() const { return dim_; }
  MetricKind kind() const { return kind_; }
  const Box& domain() const { return box_; }
  Metric& set_domain(const Box& box);

  bool contains(const Pt& x) const;

  // Metric tensor g_ij(x); symmetric by construction.
  Mat eval(const Pt& x) const;

  // sqrt(det g); throws NonPositiveDefinite when det <= 0.
  double volume_element(const Pt& x) const;

  // Smallest eigenvalue of g(x), for positive-definiteness checks.
  double min_eigenvalue(const Pt& x) const;

  double norm(const Pt& x, const Vec& v) const;

  // Geodesic acceleration a^k = -Gamma^k_ij v^i v^j. Closed-form Christoffel
  // symbols for catalog kinds; central differences of g (h = 1e-5) for custom.
  Vec geodesic_acceleration(const Pt& x, const Vec& v) const;

  // Euclidean and constant conformal-flat charts: geodesics are straight
  // chart lines, no solver needed.
  bool flat() const;
  double constant_conformal_factor() const;  // valid when flat()

  bool has_closed_form_geodesics() const;  // flat, round sphere, poincare ball

 private:
  double conformal_lambda(const Pt& x) const;
  Vec conformal_log_gradient(const Pt& x) const;  // grad of phi = log(lambda)/2

  int dim_ = 0;
  MetricKind kind_ = MetricKind::Euclidean;
  Box box_;
  Expr lambda_;
  std::vector<std::vector<Expr>> entries_;
  bool lambda_constant_ = false;
  double lambda_value_ = 1.0;
};

struct GeodesicState {
  Pt x = Pt::Zero();
  Vec v = Vec::Zero();  // unit-speed velocity dx/ds
};

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  long max_steps = 2000000;
};

// Integrates the arclength-parametrized geodesic from `start` with g-unit
// initial direction `unit_dir`, returning the state at each arclength in
// `stops` (ascending, nonnegative). Throws TrajectoryLeftChart / StepFailure.
std::vector<GeodesicState> integrate_geodesic(const Metric& metric, const Pt& start,
                                              const Vec& unit_dir, std::span<const double> stops,
                                              const OdeOptions& opts = {});

// Normalizes v to unit g-norm at x; throws InvalidArgument on zero/non-finite v.
Vec normalize_direction(const Metric& metric, const Pt& x, const Vec& v);

// Endpoint of the arclength geodesic through (start, velocity); the velocity
// is normalized internally, so only its direction matters.
Pt geodesic_shoot(const Metric& metric, const Pt& start, const Vec& velocity, double length,
                  const OdeOptions& opts = {});

// Same, but always through the ODE solver (cross-check path for catalog
// metrics whose public operations use closed forms).
Pt geodesic_shoot_ode(const Metric& metric, const Pt& start, const Vec& velocity, double length,
                      const OdeOptions& opts = {});

// Geodesic distance. Closed forms for catalog kinds; Newton shooting on the
// log map otherwise (throws OutsideNormalRange when that fails to converge).
double geodesic_distance(const Metric& metric, const Pt& a, const Pt& b);

// Closed-form exponential map for metrics with has_closed_form_geodesics().
Pt closed_form_exp(const Metric& metric, const Pt& start, const Vec& unit_dir, double r);

// Initial velocity w with exp_a(w) = b (time-1 parametrization), solved by
// Newton shooting. Used for distances on custom metrics.
Vec log_map_numeric(const Metric& metric, const Pt& a, const Pt& b, const OdeOptions& opts = {});

}  // namespace ringmod
