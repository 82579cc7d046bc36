#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ringmod/error.hpp"
#include "ringmod/quadrature.hpp"

using namespace ringmod;

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ShellGrid flat_grid(int dim, double eps, double eps0, int radial_panels, int angular,
                    DomainIndicator domain = DomainIndicator::full()) {
  Metric m = Metric::euclidean(dim);
  NormalNeighborhood nbhd = build_normal_neighborhood(m, Pt::Zero(), eps0 * 1.05);
  GeodesicRing ring(eps, eps0, std::move(domain));
  GridOptions opts;
  opts.radial_panels = radial_panels;
  opts.angular_nodes = angular;
  return ShellGrid::build(nbhd, ring, opts);
}

}  // namespace

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
  std::vector<double> nodes, weights;
  gauss_legendre(4, nodes, weights);
  double sum_w = 0.0, x6 = 0.0, x7 = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    sum_w += weights[i];
    x6 += weights[i] * std::pow(nodes[i], 6);
    x7 += weights[i] * std::pow(nodes[i], 7);
  }
  CHECK(sum_w == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(x6 == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
  CHECK(std::abs(x7) < 1e-15);

  gauss_legendre(64, nodes, weights);
  double s = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i)
    s += weights[i] * std::sin((nodes[i] + 1.0) * 0.5 * M_PI) * 0.5 * M_PI;
  CHECK(s == doctest::Approx(2.0).epsilon(1e-14));  // integral of sin over [0, pi]
}

TEST_CASE("angular grids carry unit-sphere weights") {
  AngularGrid g2 = AngularGrid::build(2, 64);
  double sum2 = 0.0;
  for (const auto& node : g2.nodes) {
    CHECK(node.weight > 0.0);
    sum2 += node.weight;
  }
  CHECK(sum2 == doctest::Approx(2.0 * M_PI).epsilon(1e-13));

  AngularGrid g3 = AngularGrid::build(3, 24);
  double sum3 = 0.0;
  for (const auto& node : g3.nodes) {
    CHECK(node.weight > 0.0);
    sum3 += node.weight;
  }
  CHECK(sum3 == doctest::Approx(4.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("flat shell areas and ring volumes") {
  ShellGrid grid = flat_grid(2, 0.5, 1.0, 32, 64);
  for (int k = 0; k < grid.shells(); k += 17)
    CHECK(grid.shell_area(k) == doctest::Approx(2.0 * M_PI * grid.radius(k)).epsilon(1e-10));
  CHECK(grid.ring_volume() == doctest::Approx(M_PI * 0.75).epsilon(1e-10));

  ShellGrid grid3 = flat_grid(3, 0.5, 1.0, 16, 16);
  for (int k = 0; k < grid3.shells(); k += 13)
    CHECK(grid3.shell_area(k) ==
          doctest::Approx(4.0 * M_PI * grid3.radius(k) * grid3.radius(k)).epsilon(1e-10));
  CHECK(grid3.ring_volume() ==
        doctest::Approx(4.0 * M_PI / 3.0 * (1.0 - 0.125)).epsilon(1e-10));
}

TEST_CASE("domain indicator masks the grid at cell centers") {
  DomainIndicator upper = DomainIndicator::halfspace(Vec(0, 1, 0), 0.0);
  ShellGrid grid = flat_grid(2, 0.5, 1.0, 16, 64, upper);
  // Offset angular nodes put the boundary between cells: exactly half remain.
  for (int k = 0; k < grid.shells(); k += 11)
    CHECK(grid.shell_area(k) == doctest::Approx(M_PI * grid.radius(k)).epsilon(1e-10));

  double full_circle = flat_grid(2, 0.5, 1.0, 16, 64).integrate_sphere(3, [](const Pt&) {
    return 1.0;
  });
  double half_circle = grid.integrate_sphere(3, [](const Pt&) { return 1.0; });
  CHECK(half_circle == doctest::Approx(0.5 * full_circle).epsilon(1e-10));
}

TEST_CASE("ring integral of 1/d^2 over the flat annulus") {
  ShellGrid grid = flat_grid(2, 0.5, 1.0, 64, 128);
  double value = grid.integrate_ring([](const Pt& p) { return 1.0 / p.squaredNorm(); });
  CHECK(value == doctest::Approx(2.0 * M_PI * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("constant field on a flat 3d sphere") {
  ShellGrid grid = flat_grid(3, 1.5, 2.5, 8, 16);
  // Find the shell closest to r = 2 and integrate d(P, P0)^2 = 4 over it.
  int best = 0;
  for (int k = 0; k < grid.shells(); ++k)
    if (std::abs(grid.radius(k) - 2.0) < std::abs(grid.radius(best) - 2.0)) best = k;
  double r = grid.radius(best);
  double value = grid.integrate_sphere(best, [](const Pt& p) { return p.squaredNorm(); });
  CHECK(value == doctest::Approx(r * r * 4.0 * M_PI * r * r).epsilon(1e-9));
}

TEST_CASE("fubini consistency on random smooth fields") {
  ShellGrid grid = flat_grid(2, 0.5, 1.0, 32, 64);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    double a = u01(rng), b = u01(rng), c = 2.0 * u01(rng);
    auto field = [a, b, c](const Pt& p) {
      return 1.0 + a * p[0] + b * std::sin(c * p[1]) + 0.25 * p.squaredNorm();
    };
    double ring = grid.integrate_ring(field);
    double iterated = 0.0;
    for (int k = 0; k < grid.shells(); ++k)
      iterated += grid.radial_weight(k) * grid.integrate_sphere(k, field);
    CHECK(ring == doctest::Approx(iterated).epsilon(1e-8));
  }
}

TEST_CASE("fubini consistency on the round sphere") {
  Metric m = Metric::round_sphere(2);
  NormalNeighborhood nbhd = build_normal_neighborhood(m, Pt::Zero(), 0.45);
  GeodesicRing ring(0.2, 0.4);
  GridOptions opts;
  opts.radial_panels = 32;
  opts.angular_nodes = 64;
  ShellGrid grid = ShellGrid::build(nbhd, ring, opts);
  auto field = [](const Pt& p) { return 1.0 + p[0] - 0.5 * p[1]; };
  double volume_side = grid.integrate_ring(field);
  double iterated = 0.0;
  for (int k = 0; k < grid.shells(); ++k)
    iterated += grid.radial_weight(k) * grid.integrate_sphere(k, field);
  CHECK(volume_side == doctest::Approx(iterated).epsilon(1e-8));
}

TEST_CASE("grid refinement changes smooth integrals below 1e-6") {
  auto field = [](const Pt& p) { return std::exp(p[0]) + std::cos(p[1]); };
  for (int variant = 0; variant < 2; ++variant) {
    Metric m = variant == 0 ? Metric::euclidean(2) : Metric::round_sphere(2);
    double radius = variant == 0 ? 1.05 : 0.45;
    double eps = variant == 0 ? 0.5 : 0.2, eps0 = variant == 0 ? 1.0 : 0.4;
    NormalNeighborhood nbhd = build_normal_neighborhood(m, Pt::Zero(), radius);
    GeodesicRing ring(eps, eps0);
    GridOptions coarse, fine;
    coarse.radial_panels = 32;
    coarse.angular_nodes = 64;
    fine.radial_panels = 64;
    fine.angular_nodes = 128;
    double a = ShellGrid::build(nbhd, ring, coarse).integrate_ring(field);
    double b = ShellGrid::build(nbhd, ring, fine).integrate_ring(field);
    CHECK(std::abs(a - b) <= 1e-6 * std::abs(b));
  }
}

TEST_CASE("shrinking the domain never increases a nonnegative integral") {
  auto field = [](const Pt& p) { return 1.0 + p.squaredNorm(); };
  double full = flat_grid(2, 0.5, 1.0, 16, 64).integrate_ring(field);
  double half =
      flat_grid(2, 0.5, 1.0, 16, 64, DomainIndicator::halfspace(Vec(0, 1, 0), 0.0))
          .integrate_ring(field);
  double quarter =
      flat_grid(2, 0.5, 1.0, 16, 64,
                DomainIndicator::expression(Expr::parse("x1", {"x1", "x2"}), 2))
          .integrate_ring(field);
  CHECK(half <= full);
  CHECK(quarter <= full);
}

TEST_CASE("field values are clamped at the cap") {
  ShellGrid grid = flat_grid(2, 0.5, 1.0, 8, 32);
  double value = grid.integrate_ring(
      [](const Pt&) { return std::numeric_limits<double>::infinity(); });
  CHECK(value == doctest::Approx(kFieldCap * grid.ring_volume()));
}

TEST_CASE("ring bounds are validated against the neighborhood") {
  Metric m = Metric::euclidean(2);
  NormalNeighborhood nbhd = build_normal_neighborhood(m, Pt::Zero(), 1.0);
  GridOptions opts;
  opts.radial_panels = 4;
  opts.angular_nodes = 16;
  CHECK_THROWS_AS(ShellGrid::build(nbhd, GeodesicRing(0.5, 2.0), opts), Error);
  CHECK_THROWS_AS(ShellGrid::build(nbhd, GeodesicRing(1e-6, 1.0), opts), Error);
}
