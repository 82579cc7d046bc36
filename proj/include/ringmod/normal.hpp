#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ringmod/geometry.hpp"

namespace ringmod {

// Predicate selecting the domain D; sampled at cell centers, no clipping.
class DomainIndicator {
 public:
  DomainIndicator();  // full space

  static DomainIndicator full();
  // normal . x > offset
  static DomainIndicator halfspace(const Vec& normal, double offset);
  // expr(x) > 0
  static DomainIndicator expression(Expr expr, int dim);
  static DomainIndicator function(std::function<bool(const Pt&)> fn, std::string description);

  bool contains(const Pt& x) const { return fn_(x); }
  const std::string& description() const { return description_; }

 private:
  std::function<bool(const Pt&)> fn_;
  std::string description_;
};

// Exponential-map chart at a center point. Directions are Euclidean unit
// vectors in normal coordinates (direction cosines); the g-orthonormal frame
// at the center maps them to chart velocities, so geodesic spheres about the
// center are round spheres in these coordinates.
class NormalNeighborhood {
 public:
  NormalNeighborhood() = default;  // inert until assigned from the builder

  const Metric& metric() const { return metric_; }
  const Pt& center() const { return center_; }
  double radius_max() const { return radius_max_; }
  const Mat& frame() const { return frame_; }

  // exp(r, theta): chart point at geodesic distance r along direction theta.
  // Catalog metrics use closed forms; custom metrics integrate the geodesic.
  Pt exp(double r, const Vec& theta) const;

  // Same through the ODE solver regardless of metric kind (cross-check path).
  Pt exp_ode(double r, const Vec& theta) const;

  // States (position and unit radial velocity) along one ray at the given
  // ascending radii; one integration per ray on solver-backed metrics.
  std::vector<GeodesicState> ray(const Vec& theta, std::span<const double> radii) const;

  // Normal-coordinate point y (|y| = r, direction y/|y|), arbitrary y.
  Pt exp_point(const Vec& y) const;

  // Monotone bound on the spectral distance between the pulled-back metric in
  // normal coordinates and the identity over the closed ball of radius r.
  double metric_deviation(double r) const;

  friend NormalNeighborhood build_normal_neighborhood(const Metric& metric, const Pt& center,
                                                      double radius);

 private:
  Metric metric_;
  Pt center_ = Pt::Zero();
  double radius_max_ = 0.0;
  Mat frame_ = Mat::Identity();  // E = g(center)^{-1/2}
  std::vector<double> deviation_radii_;
  std::vector<double> deviation_values_;  // prefix-max, nondecreasing
};

// Validates the requested radius by marching rays outward and watching the
// normal-coordinate volume distortion sqrt(det G); focusing below 0.1 raises
// RadiusTooLarge. Also tabulates metric_deviation.
NormalNeighborhood build_normal_neighborhood(const Metric& metric, const Pt& center,
                                             double radius);

// Geodesic ring A(P0, eps, eps0) intersected with a domain D.
struct GeodesicRing {
  double eps = 0.0;
  double eps0 = 0.0;
  DomainIndicator domain;

  GeodesicRing(double eps_, double eps0_, DomainIndicator domain_ = DomainIndicator::full());
};

// Induced-area density of the geodesic sphere S(P0, r) at angular parameters
// u (1 angle for n=2, polar+azimuth for n=3), per unit solid angle of the
// direction sphere. Integrating it against solid-angle weights gives g-area.
double sphere_area_element(const NormalNeighborhood& nbhd, double r,
                           std::span<const double> angles);

// Direction-cosine parametrization of S^{n-1} and its flat angular density
// (1 in 2d, sin(polar) in 3d).
Vec direction_from_angles(int dim, std::span<const double> angles);
double angular_density(int dim, std::span<const double> angles);

}  // namespace ringmod
