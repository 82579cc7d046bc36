#include <doctest.h>

#include <cmath>
#include <random>

#include "ringmod/error.hpp"
#include "ringmod/geometry.hpp"

using namespace ringmod;

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Test-side sphere oracle: lift the stereographic chart to the unit sphere
// in R^3/R^4, rotate along the great circle, project back.
Pt sphere_exp_oracle(const Pt& x, const Vec& chart_dir_gunit, double r, int dim) {
  double r2 = 0.0;
  for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
  double s = 1.0 + r2;
  Eigen::Vector4d c = Eigen::Vector4d::Zero(), v = Eigen::Vector4d::Zero();
  for (int i = 0; i < dim; ++i) c[i] = 2.0 * x[i] / s;
  c[3] = (r2 - 1.0) / s;
  double xt = 0.0;
  for (int i = 0; i < dim; ++i) xt += x[i] * chart_dir_gunit[i];
  for (int i = 0; i < dim; ++i)
    v[i] = 2.0 * chart_dir_gunit[i] / s - 4.0 * x[i] * xt / (s * s);
  v[3] = 4.0 * xt / (s * s);
  Eigen::Vector4d y = std::cos(r) * c + std::sin(r) * v;
  Pt out = Pt::Zero();
  for (int i = 0; i < dim; ++i) out[i] = y[i] / (1.0 - y[3]);
  return out;
}

}  // namespace

TEST_CASE("euclidean geodesics are straight chart lines") {
  Metric m = Metric::euclidean(2);
  Pt end = geodesic_shoot(m, make_pt(0, 0), Vec(1, 0, 0), 1.0);
  CHECK(end[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(end[1] == doctest::Approx(0.0).epsilon(1e-15));

  CHECK(geodesic_distance(m, make_pt(0, 0), make_pt(3, 4)) == doctest::Approx(5.0));
}

TEST_CASE("constant conformal factor scales lengths by sqrt(lambda)") {
  Metric m = Metric::conformal_flat(2, Expr::parse("4", {"x1", "x2"}));
  CHECK(m.flat());
  CHECK(geodesic_distance(m, make_pt(0, 0), make_pt(1, 0)) == doctest::Approx(2.0));
  // Unit-speed shooting covers chart distance length/sqrt(lambda).
  Pt end = geodesic_shoot(m, make_pt(0, 0), Vec(1, 0, 0), 2.0);
  CHECK(end[0] == doctest::Approx(1.0));
}

TEST_CASE("poincare ball geodesics through the origin") {
  Metric m = Metric::poincare_ball(2);
  for (double len : {0.25, 0.5, 1.0}) {
    Pt end = geodesic_shoot(m, make_pt(0, 0), Vec(1, 0, 0), len);
    CHECK(end[0] == doctest::Approx(std::tanh(len / 2.0)).epsilon(1e-8));
    CHECK(std::abs(end[1]) < 1e-10);
  }
  CHECK(geodesic_distance(m, make_pt(0, 0), make_pt(0.5, 0)) ==
        doctest::Approx(2.0 * std::atanh(0.5)));
}

TEST_CASE("round sphere ODE shooting matches the great-circle oracle") {
  Metric m = Metric::round_sphere(2);
  Pt start = make_pt(0.1, 0.0);

  // Meridian direction: radially away from the chart origin, g-normalized.
  Vec dir = normalize_direction(m, start, Vec(1, 0, 0));
  Pt end = geodesic_shoot(m, start, dir, M_PI / 2.0);
  Pt expected = sphere_exp_oracle(start, dir, M_PI / 2.0, 2);
  CHECK((end - expected).norm() < 1e-8);

  // Independent closed-form distance agrees with the shot arclength.
  CHECK(geodesic_distance(m, start, end) == doctest::Approx(M_PI / 2.0).epsilon(1e-8));

  // Chart origin shot to distance pi/2 lands at the equator point (1, 0).
  Pt quarter = geodesic_shoot(m, make_pt(0, 0), Vec(1, 0, 0), M_PI / 2.0);
  CHECK(quarter[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("round sphere distance closed form") {
  Metric m = Metric::round_sphere(2);
  CHECK(geodesic_distance(m, make_pt(0, 0), make_pt(1, 0)) == doctest::Approx(M_PI / 2.0));
  CHECK(geodesic_distance(m, make_pt(0, 0), make_pt(0.2, 0)) ==
        doctest::Approx(2.0 * std::atan(0.2)));
}

TEST_CASE("poincare ODE shooting matches the closed form off-center") {
  Metric m = Metric::poincare_ball(2);
  Pt start = make_pt(0.2, 0.1);
  Vec dir = normalize_direction(m, start, Vec(0.3, -1.0, 0.0));
  for (double len : {0.3, 0.8}) {
    Pt ode = geodesic_shoot_ode(m, start, dir, len);
    Pt closed = closed_form_exp(m, start, dir, len);
    CHECK((ode - closed).norm() < 1e-8);
    CHECK(geodesic_distance(m, start, ode) == doctest::Approx(len).epsilon(1e-8));
  }
}

TEST_CASE("custom metric distances match the equivalent catalog closed form") {
  // Hyperbolic plane entered as a custom expression matrix.
  std::vector<std::vector<Expr>> entries(2, std::vector<Expr>(2));
  entries[0][0] = Expr::parse("4/(1 - x1^2 - x2^2)^2", {"x1", "x2"});
  entries[0][1] = Expr::parse("0", {"x1", "x2"});
  entries[1][0] = Expr::parse("0", {"x1", "x2"});
  entries[1][1] = Expr::parse("4/(1 - x1^2 - x2^2)^2", {"x1", "x2"});
  Metric custom = Metric::custom(2, std::move(entries));
  custom.set_domain(Box::cube(2, 0.7));

  Metric reference = Metric::poincare_ball(2);
  Pt a = make_pt(0.1, -0.05), b = make_pt(0.4, 0.2);
  double numeric = geodesic_distance(custom, a, b);
  double closed = geodesic_distance(reference, a, b);
  CHECK(numeric == doctest::Approx(closed).epsilon(1e-7));
}

TEST_CASE("geodesic distance symmetry and triangle inequality on samples") {
  Metric conformal = Metric::conformal_flat(2, Expr::parse("1 + x1^2 + x2^2", {"x1", "x2"}));
  std::mt19937_64 rng(7);
  Pt pts[3];
  for (int trial = 0; trial < 5; ++trial) {
    for (auto& p : pts) p = make_pt(0.6 * u01(rng) - 0.3, 0.6 * u01(rng) - 0.3);
    double dab = geodesic_distance(conformal, pts[0], pts[1]);
    double dba = geodesic_distance(conformal, pts[1], pts[0]);
    double dac = geodesic_distance(conformal, pts[0], pts[2]);
    double dcb = geodesic_distance(conformal, pts[2], pts[1]);
    CHECK(std::abs(dab - dba) < 1e-9);
    CHECK(dab <= dac + dcb + 1e-9);
  }
  CHECK(geodesic_distance(conformal, pts[0], pts[0]) == 0.0);
}

TEST_CASE("volume elements") {
  CHECK(Metric::euclidean(2).volume_element(make_pt(0.3, 0.4)) == doctest::Approx(1.0));

  Metric conf = Metric::conformal_flat(2, Expr::parse("1 + x1^2 + x2^2", {"x1", "x2"}));
  CHECK(conf.volume_element(make_pt(0.5, 0.0)) == doctest::Approx(1.25));

  Metric ball = Metric::poincare_ball(2);
  double factor = 2.0 / (1.0 - 0.25);
  CHECK(ball.volume_element(make_pt(0.5, 0.0)) == doctest::Approx(factor * factor));
}

TEST_CASE("degenerate custom metric is rejected by the volume element") {
  std::vector<std::vector<Expr>> entries(2, std::vector<Expr>(2));
  entries[0][0] = Expr::parse("1", {"x1", "x2"});
  entries[0][1] = Expr::parse("2", {"x1", "x2"});
  entries[1][0] = Expr::parse("2", {"x1", "x2"});
  entries[1][1] = Expr::parse("1", {"x1", "x2"});  // det = -3
  Metric bad = Metric::custom(2, std::move(entries));
  CHECK_THROWS_AS(bad.volume_element(make_pt(0, 0)), Error);
}

TEST_CASE("metric eval is exactly symmetric and positive definite on samples") {
  std::vector<std::vector<Expr>> entries(2, std::vector<Expr>(2));
  entries[0][0] = Expr::parse("2 + sin(x1)", {"x1", "x2"});
  entries[0][1] = Expr::parse("x1*x2/4", {"x1", "x2"});
  entries[1][0] = Expr::parse("x1*x2/4", {"x1", "x2"});
  entries[1][1] = Expr::parse("2 + cos(x2)", {"x1", "x2"});
  Metric m = Metric::custom(2, std::move(entries));
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    Pt x = make_pt(2.0 * u01(rng) - 1.0, 2.0 * u01(rng) - 1.0);
    Mat g = m.eval(x);
    CHECK(g(0, 1) == g(1, 0));  // exact, shared subexpression
    CHECK(m.min_eigenvalue(x) > 0.0);
  }
}

TEST_CASE("shooting errors") {
  Metric m = Metric::euclidean(2);
  Box small = Box::cube(2, 1.0);
  m.set_domain(small);
  CHECK_THROWS_AS(geodesic_shoot(m, make_pt(0, 0), Vec(1, 0, 0), 5.0), Error);
  CHECK_THROWS_AS(geodesic_shoot(m, make_pt(0, 0), Vec(0, 0, 0), 1.0), Error);
  CHECK_THROWS_AS(geodesic_shoot(m, make_pt(0, 0), Vec(1, 0, 0), -1.0), Error);

  Metric sphere = Metric::round_sphere(2);
  CHECK_THROWS_AS(geodesic_shoot_ode(sphere, make_pt(5, 5), Vec(0, 0, 0), 1.0), Error);
}
