// Exercises the shared-library C surface end to end: handles, error codes,
// numeric results, and the batch runner.
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "ringmod.h"

namespace {

namespace fs = std::filesystem;

struct MetricHandle {
  ringmod_metric* ptr = nullptr;
  explicit MetricHandle(const char* spec) { REQUIRE(ringmod_metric_create(spec, &ptr) == RINGMOD_OK); }
  ~MetricHandle() { ringmod_metric_destroy(ptr); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(ringmod_version()) > 0);
  CHECK(std::string(ringmod_status_name(RINGMOD_OK)) == "ok");
  CHECK(std::string(ringmod_status_name(RINGMOD_ERR_EMPTY_SHELL)) == "empty_shell");
}

TEST_CASE("metric creation, evaluation and errors") {
  MetricHandle euclid("{\"kind\":\"euclidean\",\"dim\":2}");
  CHECK(ringmod_metric_dim(euclid.ptr) == 2);

  double x[2] = {0.3, 0.4};
  double g[4] = {0, 0, 0, 0};
  CHECK(ringmod_metric_eval(euclid.ptr, x, g) == RINGMOD_OK);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(0.0));

  double vol = 0.0;
  CHECK(ringmod_volume_element(euclid.ptr, x, &vol) == RINGMOD_OK);
  CHECK(vol == doctest::Approx(1.0));

  ringmod_metric* bad = nullptr;
  CHECK(ringmod_metric_create("{\"kind\":\"wat\"}", &bad) == RINGMOD_ERR_PARSE);
  CHECK(std::strlen(ringmod_last_error()) > 0);
  CHECK(ringmod_metric_create(nullptr, &bad) == RINGMOD_ERR_INVALID_ARGUMENT);
  CHECK(ringmod_metric_eval(nullptr, x, g) == RINGMOD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("geodesics through the C surface") {
  MetricHandle euclid("{\"kind\":\"euclidean\",\"dim\":2}");
  double a[2] = {0.0, 0.0}, b[2] = {3.0, 4.0}, d = 0.0;
  CHECK(ringmod_geodesic_distance(euclid.ptr, a, b, &d) == RINGMOD_OK);
  CHECK(d == doctest::Approx(5.0));

  double v[2] = {1.0, 0.0}, end[2] = {0, 0};
  CHECK(ringmod_geodesic_shoot(euclid.ptr, a, v, 1.0, end) == RINGMOD_OK);
  CHECK(end[0] == doctest::Approx(1.0));

  MetricHandle ball("{\"kind\":\"poincare-ball\",\"dim\":2}");
  double c[2] = {0.5, 0.0};
  CHECK(ringmod_geodesic_distance(ball.ptr, a, c, &d) == RINGMOD_OK);
  CHECK(d == doctest::Approx(std::log(3.0)));
}

TEST_CASE("neighborhood, grid and modulus pipeline") {
  MetricHandle euclid("{\"kind\":\"euclidean\",\"dim\":2}");
  double center[2] = {0.0, 0.0};
  ringmod_neighborhood* nbhd = nullptr;
  REQUIRE(ringmod_neighborhood_build(euclid.ptr, center, 1.05, &nbhd) == RINGMOD_OK);

  double theta[2] = {1.0, 0.0}, p[2] = {0, 0};
  CHECK(ringmod_neighborhood_exp(nbhd, 0.5, theta, p) == RINGMOD_OK);
  CHECK(p[0] == doctest::Approx(0.5));

  double dev = -1.0;
  CHECK(ringmod_metric_deviation(nbhd, 0.5, &dev) == RINGMOD_OK);
  CHECK(dev == doctest::Approx(0.0).epsilon(1e-10));

  double angles[1] = {0.7}, density = 0.0;
  CHECK(ringmod_sphere_area_element(nbhd, 1.0, angles, &density) == RINGMOD_OK);
  CHECK(density == doctest::Approx(1.0).epsilon(1e-9));

  ringmod_weight* weight = nullptr;
  REQUIRE(ringmod_weight_create("{\"kind\":\"constant\",\"value\":1.0}", 2, &weight) ==
          RINGMOD_OK);

  ringmod_grid* grid = nullptr;
  REQUIRE(ringmod_grid_build(nbhd, 0.5, 1.0, nullptr, 32, 64, 1, &grid) == RINGMOD_OK);
  CHECK(ringmod_grid_shells(grid) == 32 * 4);

  double r = 0.0, area = 0.0, volume = 0.0;
  CHECK(ringmod_grid_shell_radius(grid, 0, &r) == RINGMOD_OK);
  CHECK(ringmod_grid_shell_area(grid, 0, &area) == RINGMOD_OK);
  CHECK(area == doctest::Approx(2.0 * M_PI * r).epsilon(1e-10));
  CHECK(ringmod_grid_ring_volume(grid, &volume) == RINGMOD_OK);
  CHECK(volume == doctest::Approx(0.75 * M_PI).epsilon(1e-8));

  double value = 0.0, gap = -1.0;
  CHECK(ringmod_lower_bound_integral(grid, weight, 2.0, 1, &value) == RINGMOD_OK);
  CHECK(value == doctest::Approx(std::log(2.0) / (2.0 * M_PI)).epsilon(1e-8));
  CHECK(ringmod_surface_modulus(grid, weight, 2.0, 1, 1, &value, &gap) == RINGMOD_OK);
  CHECK(gap <= 1e-3);

  double lhs = 0.0, rhs = 0.0;
  CHECK(ringmod_jensen_eta0(grid, weight, 2.0, 1, &lhs, &rhs) == RINGMOD_OK);
  CHECK(std::abs(rhs - lhs) / lhs <= 1e-4);

  double bound = 0.0, c_est = 0.0;
  CHECK(ringmod_ring_upper_bound(grid, weight, 2.0, 1, &bound, &c_est) == RINGMOD_OK);
  CHECK(c_est == doctest::Approx(1.0));

  // Exponent validation travels through the status codes.
  CHECK(ringmod_lower_bound_integral(grid, weight, 0.5, 1, &value) ==
        RINGMOD_ERR_UNSUPPORTED_EXPONENT);

  ringmod_grid_destroy(grid);
  ringmod_weight_destroy(weight);
  ringmod_neighborhood_destroy(nbhd);
}

TEST_CASE("curve modulus closed form through the C surface") {
  double value = 0.0;
  CHECK(ringmod_curve_modulus_flat_annulus(2, 2.0, 0.5, 1.0, &value) == RINGMOD_OK);
  CHECK(value == doctest::Approx(2.0 * M_PI / std::log(2.0)));
  CHECK(ringmod_curve_modulus_flat_annulus(2, 0.5, 0.5, 1.0, &value) ==
        RINGMOD_ERR_UNSUPPORTED_EXPONENT);
}

TEST_CASE("maps, dilatations and the theorem-2 check") {
  MetricHandle euclid("{\"kind\":\"euclidean\",\"dim\":2}");
  ringmod_map* map = nullptr;
  REQUIRE(ringmod_map_create(euclid.ptr, euclid.ptr,
                             "{\"kind\":\"linear\",\"matrix\":[[2,0],[0,1]]}", &map) ==
          RINGMOD_OK);

  double x[2] = {0.3, 0.1}, out4[4];
  CHECK(ringmod_dilatation_at(map, x, 2.0, 0, out4) == RINGMOD_OK);
  CHECK(out4[0] == doctest::Approx(2.0));
  CHECK(out4[1] == doctest::Approx(1.0));
  CHECK(out4[2] == doctest::Approx(2.0));
  CHECK(out4[3] == doctest::Approx(2.0));

  double center[2] = {0.0, 0.0};
  ringmod_neighborhood* nbhd = nullptr;
  REQUIRE(ringmod_neighborhood_build(euclid.ptr, center, 1.05, &nbhd) == RINGMOD_OK);
  double lhs = 0.0, rhs = 0.0;
  int holds = 0;
  CHECK(ringmod_verify_theorem2(map, nbhd, 0.5, 1.0, 2.0, 24, 48, 1, &lhs, &rhs, &holds) ==
        RINGMOD_OK);
  CHECK(holds == 1);
  CHECK(lhs >= rhs);

  ringmod_neighborhood_destroy(nbhd);
  ringmod_map_destroy(map);
}

TEST_CASE("boundary checkers through the C surface") {
  MetricHandle euclid("{\"kind\":\"euclidean\",\"dim\":2}");
  double center[2] = {0.0, 0.0};
  ringmod_neighborhood* nbhd = nullptr;
  REQUIRE(ringmod_neighborhood_build(euclid.ptr, center, 0.25, &nbhd) == RINGMOD_OK);

  ringmod_weight* weight = nullptr;
  REQUIRE(ringmod_weight_create("{\"kind\":\"radial\",\"expr\":\"3*log(1/r)\"}", 2, &weight) ==
          RINGMOD_OK);

  const char* half = "{\"kind\":\"halfspace\",\"normal\":[0,1],\"offset\":0}";
  double cutoffs[20], partials[20], growth = 0.0;
  int verdict = -1;
  CHECK(ringmod_divergence_check(nbhd, half, weight, 0.25, 20, cutoffs, partials, &verdict,
                                 &growth) == RINGMOD_OK);
  CHECK(verdict == 0);  // diverges
  CHECK(partials[19] > partials[0]);

  int is_o_log = 0;
  double constant = 0.0;
  CHECK(ringmod_log_growth_fit(nbhd, half, weight, 0.25, 20, &is_o_log, &constant) == RINGMOD_OK);
  CHECK(is_o_log == 1);
  CHECK(constant == doctest::Approx(3.0).epsilon(1e-4));

  ringmod_weight_destroy(weight);
  ringmod_neighborhood_destroy(nbhd);
}

TEST_CASE("batch runner through the C surface") {
  fs::path dir = fs::temp_directory_path() / "ringmod_capi_run";
  fs::remove_all(dir);

  const char* config =
      "{\"command\":\"modulus\",\"metric\":{\"kind\":\"euclidean\",\"dim\":2},"
      "\"eps\":0.5,\"eps0\":1.0,\"p\":2.0,"
      "\"grid\":{\"radial_panels\":8,\"angular_nodes\":32}}";
  CHECK(ringmod_run_json(config, dir.string().c_str(), 1, -1) == RINGMOD_OK);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "shells.csv"));
  CHECK(fs::exists(dir / "profile.dat"));

  CHECK(ringmod_run_json("{\"command\":\"bogus\"}", dir.string().c_str(), 1, -1) ==
        RINGMOD_ERR_PARSE);
  CHECK(std::strlen(ringmod_last_error()) > 0);
}
