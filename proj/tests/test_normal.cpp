#include <doctest.h>

#include <cmath>
#include <random>

#include "ringmod/error.hpp"
#include "ringmod/quadrature.hpp"

using namespace ringmod;

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vec random_direction(std::mt19937_64& rng, int dim) {
  if (dim == 2) {
    double a = 2.0 * M_PI * u01(rng);
    return Vec(std::cos(a), std::sin(a), 0.0);
  }
  double polar = std::acos(2.0 * u01(rng) - 1.0);
  double az = 2.0 * M_PI * u01(rng);
  return Vec(std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az), std::cos(polar));
}

}  // namespace

TEST_CASE("euclidean normal neighborhood is the identity chart") {
  Metric m = Metric::euclidean(2);
  Pt center = make_pt(0.25, -0.5);
  NormalNeighborhood nbhd = build_normal_neighborhood(m, center, 1.0);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    Vec theta = random_direction(rng, 2);
    double r = u01(rng);
    Pt p = nbhd.exp(r, theta);
    CHECK((p - (center + r * theta)).norm() < 1e-14);
  }
  CHECK(nbhd.metric_deviation(0.5) < 1e-9);
  CHECK(nbhd.metric_deviation(1.0) < 1e-10);
}

TEST_CASE("radial distance consistency on catalog metrics") {
  // |d(exp(r, theta), center) - r| <= 1e-6 r over random rays.
  struct Case {
    Metric metric;
    Pt center;
    double radius;
  };
  Case cases[] = {
      {Metric::euclidean(2), make_pt(0.1, 0.2), 1.0},
      {Metric::round_sphere(2), make_pt(0.05, -0.1), 0.5},
      {Metric::poincare_ball(2), make_pt(0.1, 0.0), 0.5},
      {Metric::round_sphere(3), make_pt(0.0, 0.05, 0.1), 0.4},
      {Metric::poincare_ball(3), make_pt(0.05, 0.0, 0.05), 0.4},
  };
  std::mt19937_64 rng(17);
  for (const auto& c : cases) {
    NormalNeighborhood nbhd = build_normal_neighborhood(c.metric, c.center, c.radius);
    for (int i = 0; i < 100; ++i) {
      double r = c.radius * (0.05 + 0.95 * u01(rng));
      Vec theta = random_direction(rng, c.metric.dim());
      Pt p = nbhd.exp(r, theta);
      double d = geodesic_distance(c.metric, p, c.center);
      CHECK(std::abs(d - r) <= 1e-6 * r);
    }
  }
}

TEST_CASE("ODE exponential map agrees with the closed-form fast path") {
  Metric m = Metric::round_sphere(2);
  NormalNeighborhood nbhd = build_normal_neighborhood(m, make_pt(0.1, 0.05), 0.5);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 10; ++i) {
    Vec theta = random_direction(rng, 2);
    double r = 0.5 * (0.1 + 0.9 * u01(rng));
    CHECK((nbhd.exp(r, theta) - nbhd.exp_ode(r, theta)).norm() < 1e-8);
  }
}

TEST_CASE("metric deviation is small near the center and monotone") {
  for (auto kind : {MetricKind::RoundSphere, MetricKind::PoincareBall}) {
    Metric m = kind == MetricKind::RoundSphere ? Metric::round_sphere(2) : Metric::poincare_ball(2);
    NormalNeighborhood nbhd = build_normal_neighborhood(m, Pt::Zero(), 0.4);
    double dev_01 = nbhd.metric_deviation(0.1);
    CHECK(dev_01 <= 0.02);
    CHECK(dev_01 > 0.0);
    // Tangential eigenvalue of the pulled-back sphere metric is (sin r / r)^2.
    if (kind == MetricKind::RoundSphere) {
      double s = std::sin(0.1) / 0.1;
      CHECK(dev_01 == doctest::Approx(1.0 - s * s).epsilon(0.5));
    }
    double prev = 0.0;
    for (double r : {0.05, 0.1, 0.2, 0.3, 0.4}) {
      double d = nbhd.metric_deviation(r);
      CHECK(d >= prev);
      prev = d;
    }
  }
}

TEST_CASE("solver-backed neighborhood satisfies the exp-distance invariant") {
  Metric m = Metric::conformal_flat(2, Expr::parse("1 + x1^2 + x2^2", {"x1", "x2"}));
  NormalNeighborhood nbhd = build_normal_neighborhood(m, Pt::Zero(), 0.3);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    double r = 0.3 * (0.2 + 0.8 * u01(rng));
    Vec theta = random_direction(rng, 2);
    Pt p = nbhd.exp(r, theta);
    double d = geodesic_distance(m, Pt::Zero(), p);
    CHECK(std::abs(d - r) <= 1e-6 * r);
  }
}

TEST_CASE("focusing radial geodesics raise RadiusTooLarge") {
  Metric m = Metric::round_sphere(2);
  CHECK_THROWS_AS(build_normal_neighborhood(m, Pt::Zero(), 3.0), Error);
  CHECK_NOTHROW(build_normal_neighborhood(m, Pt::Zero(), 2.0));
}

TEST_CASE("sphere area elements") {
  // Flat circle: 1 per radian at r = 1.
  Metric m2 = Metric::euclidean(2);
  NormalNeighborhood n2 = build_normal_neighborhood(m2, Pt::Zero(), 1.5);
  double angles1[1] = {0.3};
  CHECK(sphere_area_element(n2, 1.0, std::span<const double>(angles1, 1)) ==
        doctest::Approx(1.0).epsilon(1e-9));

  // Flat 2-sphere of radius 2: total area 16 pi.
  Metric m3 = Metric::euclidean(3);
  NormalNeighborhood n3 = build_normal_neighborhood(m3, Pt::Zero(), 2.5);
  AngularGrid grid = AngularGrid::build(3, 32);
  double total = 0.0;
  for (const auto& node : grid.nodes) {
    double u[2] = {node.u[0], node.u[1]};
    total += sphere_area_element(n3, 2.0, std::span<const double>(u, 2)) * node.weight;
  }
  CHECK(total == doctest::Approx(16.0 * M_PI).epsilon(1e-9));

  // Geodesic circle of radius pi/4 on the unit sphere: length 2 pi sin(pi/4).
  Metric sphere = Metric::round_sphere(2);
  NormalNeighborhood ns = build_normal_neighborhood(sphere, Pt::Zero(), 1.0);
  AngularGrid circle = AngularGrid::build(2, 64);
  double length = 0.0;
  for (const auto& node : circle.nodes) {
    double u[1] = {node.u[0]};
    length += sphere_area_element(ns, M_PI / 4.0, std::span<const double>(u, 1)) * node.weight;
  }
  CHECK(length == doctest::Approx(2.0 * M_PI * std::sin(M_PI / 4.0)).epsilon(1e-6));
}

TEST_CASE("pole parametrization is rejected in 3d") {
  Metric m3 = Metric::euclidean(3);
  NormalNeighborhood n3 = build_normal_neighborhood(m3, Pt::Zero(), 1.0);
  double angles[2] = {0.0, 0.0};
  CHECK_THROWS_AS(sphere_area_element(n3, 0.5, std::span<const double>(angles, 2)), Error);
}

TEST_CASE("geodesic ring validates its bounds") {
  CHECK_THROWS_AS(GeodesicRing(0.0, 1.0), Error);
  CHECK_THROWS_AS(GeodesicRing(1.0, 0.5), Error);
  CHECK_NOTHROW(GeodesicRing(0.5, 1.0));
}
