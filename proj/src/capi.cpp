#include "ringmod.h"

#include <cstring>
#include <string>

#include "ringmod/boundary.hpp"
#include "ringmod/error.hpp"
#include "ringmod/mapping.hpp"
#include "ringmod/runner.hpp"

using namespace ringmod;

struct ringmod_metric {
  Metric metric;
};
struct ringmod_neighborhood {
  NormalNeighborhood nbhd;
};
struct ringmod_grid {
  ShellGrid grid;
};
struct ringmod_weight {
  WeightField weight;
};
struct ringmod_map {
  MapModel map;

  explicit ringmod_map(MapModel m) : map(std::move(m)) {}
};

namespace {

thread_local std::string g_last_error;

ringmod_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Ok: return RINGMOD_OK;
    case ErrorCode::InvalidArgument: return RINGMOD_ERR_INVALID_ARGUMENT;
    case ErrorCode::ParseError: return RINGMOD_ERR_PARSE;
    case ErrorCode::TrajectoryLeftChart: return RINGMOD_ERR_TRAJECTORY_LEFT_CHART;
    case ErrorCode::StepFailure: return RINGMOD_ERR_STEP_FAILURE;
    case ErrorCode::RadiusTooLarge: return RINGMOD_ERR_RADIUS_TOO_LARGE;
    case ErrorCode::OutsideNormalRange: return RINGMOD_ERR_OUTSIDE_NORMAL_RANGE;
    case ErrorCode::DegenerateTangent: return RINGMOD_ERR_DEGENERATE_TANGENT;
    case ErrorCode::NonPositiveDefinite: return RINGMOD_ERR_NON_POSITIVE_DEFINITE;
    case ErrorCode::EmptyShell: return RINGMOD_ERR_EMPTY_SHELL;
    case ErrorCode::SolverNotConverged: return RINGMOD_ERR_SOLVER_NOT_CONVERGED;
    case ErrorCode::NotNormalized: return RINGMOD_ERR_NOT_NORMALIZED;
    case ErrorCode::NotDifferentiable: return RINGMOD_ERR_NOT_DIFFERENTIABLE;
    case ErrorCode::ImageLeftChart: return RINGMOD_ERR_IMAGE_LEFT_CHART;
    case ErrorCode::UnsupportedExponent: return RINGMOD_ERR_UNSUPPORTED_EXPONENT;
    case ErrorCode::IoError: return RINGMOD_ERR_IO;
    case ErrorCode::Internal: return RINGMOD_ERR_INTERNAL;
  }
  return RINGMOD_ERR_INTERNAL;
}

template <typename Fn>
ringmod_status guarded(Fn&& fn) {
  try {
    fn();
    return RINGMOD_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RINGMOD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return RINGMOD_ERR_INTERNAL;
  }
}

Pt read_point(const double* x, int dim) {
  Pt p = Pt::Zero();
  for (int i = 0; i < dim; ++i) p[i] = x[i];
  return p;
}

void check_arg(bool ok, const char* what) {
  require(ok, ErrorCode::InvalidArgument, std::string("null or invalid argument: ") + what);
}

DomainIndicator parse_domain_json(const char* domain_json, int dim) {
  if (domain_json == nullptr || std::strlen(domain_json) == 0) return DomainIndicator::full();
  // Route through the runner's config parser for a single schema.
  std::string wrapped = std::string("{\"domain\":") + domain_json +
                        ",\"metric\":{\"kind\":\"euclidean\",\"dim\":" + std::to_string(dim) +
                        "}}";
  return RunConfig::from_json_text(wrapped).domain;
}

WeightField parse_weight_json(const char* spec_json, int dim) {
  check_arg(spec_json != nullptr, "weight spec");
  std::string wrapped = std::string("{\"weight\":") + spec_json +
                        ",\"metric\":{\"kind\":\"euclidean\",\"dim\":" + std::to_string(dim) +
                        "}}";
  return RunConfig::from_json_text(wrapped).weight;
}

}  // namespace

extern "C" {

const char* ringmod_version(void) { return "1.0.0"; }

const char* ringmod_status_name(ringmod_status status) {
  switch (status) {
    case RINGMOD_OK: return "ok";
    case RINGMOD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case RINGMOD_ERR_PARSE: return "parse_error";
    case RINGMOD_ERR_TRAJECTORY_LEFT_CHART: return "trajectory_left_chart";
    case RINGMOD_ERR_STEP_FAILURE: return "step_failure";
    case RINGMOD_ERR_RADIUS_TOO_LARGE: return "radius_too_large";
    case RINGMOD_ERR_OUTSIDE_NORMAL_RANGE: return "outside_normal_range";
    case RINGMOD_ERR_DEGENERATE_TANGENT: return "degenerate_tangent";
    case RINGMOD_ERR_NON_POSITIVE_DEFINITE: return "non_positive_definite";
    case RINGMOD_ERR_EMPTY_SHELL: return "empty_shell";
    case RINGMOD_ERR_SOLVER_NOT_CONVERGED: return "solver_not_converged";
    case RINGMOD_ERR_NOT_NORMALIZED: return "not_normalized";
    case RINGMOD_ERR_NOT_DIFFERENTIABLE: return "not_differentiable";
    case RINGMOD_ERR_IMAGE_LEFT_CHART: return "image_left_chart";
    case RINGMOD_ERR_UNSUPPORTED_EXPONENT: return "unsupported_exponent";
    case RINGMOD_ERR_IO: return "io_error";
    case RINGMOD_ERR_INTERNAL: return "internal";
  }
  return "?";
}

const char* ringmod_last_error(void) { return g_last_error.c_str(); }

/* --- metrics -------------------------------------------------------------- */

ringmod_status ringmod_metric_create(const char* spec_json, ringmod_metric** out) {
  return guarded([&]() {
    check_arg(spec_json != nullptr && out != nullptr, "metric spec / out");
    std::string wrapped = std::string("{\"metric\":") + spec_json + "}";
    *out = new ringmod_metric{RunConfig::from_json_text(wrapped).metric};
  });
}

void ringmod_metric_destroy(ringmod_metric* metric) { delete metric; }

int ringmod_metric_dim(const ringmod_metric* metric) {
  return metric == nullptr ? 0 : metric->metric.dim();
}

ringmod_status ringmod_metric_eval(const ringmod_metric* metric, const double* x, double* g_out) {
  return guarded([&]() {
    check_arg(metric != nullptr && x != nullptr && g_out != nullptr, "metric/x/g_out");
    const int n = metric->metric.dim();
    Mat g = metric->metric.eval(read_point(x, n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g_out[i * n + j] = g(i, j);
  });
}

ringmod_status ringmod_volume_element(const ringmod_metric* metric, const double* x,
                                      double* out) {
  return guarded([&]() {
    check_arg(metric != nullptr && x != nullptr && out != nullptr, "metric/x/out");
    *out = metric->metric.volume_element(read_point(x, metric->metric.dim()));
  });
}

ringmod_status ringmod_geodesic_shoot(const ringmod_metric* metric, const double* start,
                                      const double* velocity, double length, double* end_out) {
  return guarded([&]() {
    check_arg(metric != nullptr && start != nullptr && velocity != nullptr && end_out != nullptr,
              "metric/start/velocity/end_out");
    const int n = metric->metric.dim();
    Pt end = geodesic_shoot(metric->metric, read_point(start, n), read_point(velocity, n), length);
    for (int i = 0; i < n; ++i) end_out[i] = end[i];
  });
}

ringmod_status ringmod_geodesic_distance(const ringmod_metric* metric, const double* a,
                                         const double* b, double* out) {
  return guarded([&]() {
    check_arg(metric != nullptr && a != nullptr && b != nullptr && out != nullptr,
              "metric/a/b/out");
    const int n = metric->metric.dim();
    *out = geodesic_distance(metric->metric, read_point(a, n), read_point(b, n));
  });
}

/* --- normal neighborhoods -------------------------------------------------- */

ringmod_status ringmod_neighborhood_build(const ringmod_metric* metric, const double* center,
                                          double radius, ringmod_neighborhood** out) {
  return guarded([&]() {
    check_arg(metric != nullptr && center != nullptr && out != nullptr, "metric/center/out");
    *out = new ringmod_neighborhood{build_normal_neighborhood(
        metric->metric, read_point(center, metric->metric.dim()), radius)};
  });
}

void ringmod_neighborhood_destroy(ringmod_neighborhood* nbhd) { delete nbhd; }

ringmod_status ringmod_neighborhood_exp(const ringmod_neighborhood* nbhd, double r,
                                        const double* theta, double* out) {
  return guarded([&]() {
    check_arg(nbhd != nullptr && theta != nullptr && out != nullptr, "nbhd/theta/out");
    const int n = nbhd->nbhd.metric().dim();
    Pt p = nbhd->nbhd.exp(r, read_point(theta, n));
    for (int i = 0; i < n; ++i) out[i] = p[i];
  });
}

ringmod_status ringmod_metric_deviation(const ringmod_neighborhood* nbhd, double r, double* out) {
  return guarded([&]() {
    check_arg(nbhd != nullptr && out != nullptr, "nbhd/out");
    *out = nbhd->nbhd.metric_deviation(r);
  });
}

ringmod_status ringmod_sphere_area_element(const ringmod_neighborhood* nbhd, double r,
                                           const double* angles, double* out) {
  return guarded([&]() {
    check_arg(nbhd != nullptr && angles != nullptr && out != nullptr, "nbhd/angles/out");
    const int n = nbhd->nbhd.metric().dim();
    *out = sphere_area_element(nbhd->nbhd, r,
                               std::span<const double>(angles, static_cast<size_t>(n - 1)));
  });
}

/* --- weights ---------------------------------------------------------------- */

ringmod_status ringmod_weight_create(const char* spec_json, int dim, ringmod_weight** out) {
  return guarded([&]() {
    check_arg(out != nullptr, "out");
    *out = new ringmod_weight{parse_weight_json(spec_json, dim)};
  });
}

void ringmod_weight_destroy(ringmod_weight* weight) { delete weight; }

/* --- grids ------------------------------------------------------------------ */

ringmod_status ringmod_grid_build(const ringmod_neighborhood* nbhd, double eps, double eps0,
                                  const char* domain_json, int radial_panels, int angular_nodes,
                                  int threads, ringmod_grid** out) {
  return guarded([&]() {
    check_arg(nbhd != nullptr && out != nullptr, "nbhd/out");
    GeodesicRing ring(eps, eps0, parse_domain_json(domain_json, nbhd->nbhd.metric().dim()));
    GridOptions opts;
    opts.radial_panels = radial_panels;
    opts.angular_nodes = angular_nodes;
    opts.threads = std::max(1, threads);
    *out = new ringmod_grid{ShellGrid::build(nbhd->nbhd, ring, opts)};
  });
}

void ringmod_grid_destroy(ringmod_grid* grid) { delete grid; }

int ringmod_grid_shells(const ringmod_grid* grid) {
  return grid == nullptr ? 0 : grid->grid.shells();
}

ringmod_status ringmod_grid_shell_radius(const ringmod_grid* grid, int shell, double* out) {
  return guarded([&]() {
    check_arg(grid != nullptr && out != nullptr, "grid/out");
    check_arg(shell >= 0 && shell < grid->grid.shells(), "shell index");
    *out = grid->grid.radius(shell);
  });
}

ringmod_status ringmod_grid_shell_area(const ringmod_grid* grid, int shell, double* out) {
  return guarded([&]() {
    check_arg(grid != nullptr && out != nullptr, "grid/out");
    check_arg(shell >= 0 && shell < grid->grid.shells(), "shell index");
    *out = grid->grid.shell_area(shell);
  });
}

ringmod_status ringmod_grid_ring_volume(const ringmod_grid* grid, double* out) {
  return guarded([&]() {
    check_arg(grid != nullptr && out != nullptr, "grid/out");
    *out = grid->grid.ring_volume();
  });
}

/* --- modulus machinery -------------------------------------------------------- */

ringmod_status ringmod_qnorm_on_sphere(const ringmod_grid* grid, const ringmod_weight* weight,
                                       double p, int shell, double* out) {
  return guarded([&]() {
    check_arg(grid != nullptr && weight != nullptr && out != nullptr, "grid/weight/out");
    ExponentSet exps = ExponentSet::make(grid->grid.dim(), p);
    *out = qnorm_on_sphere(grid->grid, weight->weight, exps, shell);
  });
}

ringmod_status ringmod_lower_bound_integral(const ringmod_grid* grid,
                                            const ringmod_weight* weight, double p, int threads,
                                            double* out) {
  return guarded([&]() {
    check_arg(grid != nullptr && weight != nullptr && out != nullptr, "grid/weight/out");
    ExponentSet exps = ExponentSet::make(grid->grid.dim(), p);
    *out = lower_bound_integral(grid->grid, weight->weight, exps, std::max(1, threads));
  });
}

ringmod_status ringmod_surface_modulus(const ringmod_grid* grid, const ringmod_weight* weight,
                                       double p, int mode, int threads, double* value_out,
                                       double* gap_out) {
  return guarded([&]() {
    check_arg(grid != nullptr && weight != nullptr && value_out != nullptr,
              "grid/weight/value_out");
    check_arg(mode == 0 || mode == 1, "mode");
    ExponentSet exps = ExponentSet::make(grid->grid.dim(), p);
    ModulusEstimate est = surface_family_modulus(
        grid->grid, weight->weight, exps,
        mode == 0 ? ModulusKind::ClosedForm : ModulusKind::ConvexOracle, std::max(1, threads));
    *value_out = est.value;
    if (gap_out != nullptr) *gap_out = est.gap;
  });
}

ringmod_status ringmod_jensen_eta0(const ringmod_grid* grid, const ringmod_weight* weight,
                                   double p, int threads, double* lhs_out, double* rhs_out) {
  return guarded([&]() {
    check_arg(grid != nullptr && weight != nullptr && lhs_out != nullptr && rhs_out != nullptr,
              "grid/weight/lhs_out/rhs_out");
    ExponentSet exps = ExponentSet::make(grid->grid.dim(), p);
    int t = std::max(1, threads);
    JensenResult res = jensen_verify(grid->grid, weight->weight, exps,
                                     eta0_profile(grid->grid, weight->weight, exps, t), t);
    *lhs_out = res.lhs;
    *rhs_out = res.rhs;
  });
}

ringmod_status ringmod_ring_upper_bound(const ringmod_grid* grid, const ringmod_weight* weight,
                                        double p, int threads, double* bound_out,
                                        double* c_estimate_out) {
  return guarded([&]() {
    check_arg(grid != nullptr && weight != nullptr && bound_out != nullptr, "grid/weight/out");
    ExponentSet exps = ExponentSet::make(grid->grid.dim(), p);
    RingBoundResult res = ring_upper_bound(grid->grid, weight->weight, exps, std::max(1, threads));
    *bound_out = res.bound;
    if (c_estimate_out != nullptr) *c_estimate_out = res.c_estimate;
  });
}

ringmod_status ringmod_curve_modulus_flat_annulus(int n, double alpha, double eps, double eps0,
                                                  double* out) {
  return guarded([&]() {
    check_arg(out != nullptr, "out");
    *out = curve_modulus_flat_annulus(n, alpha, eps, eps0);
  });
}

/* --- mappings ------------------------------------------------------------------ */

ringmod_status ringmod_map_create(const ringmod_metric* source, const ringmod_metric* target,
                                  const char* spec_json, ringmod_map** out) {
  return guarded([&]() {
    check_arg(source != nullptr && target != nullptr && spec_json != nullptr && out != nullptr,
              "source/target/spec/out");
    nlohmann::json j = nlohmann::json::parse(spec_json, nullptr, false);
    require(!j.is_discarded(), ErrorCode::ParseError, "map spec is not valid JSON");
    const int n = source->metric.dim();
    require(target->metric.dim() == n, ErrorCode::InvalidArgument,
            "source and target metric dimensions differ");
    std::string kind = j.value("kind", "identity");
    MapModel built = [&]() {
      if (kind == "identity") return MapModel::identity(source->metric, target->metric);
      if (kind == "linear") {
        Mat a = Mat::Identity();
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c)
            a(r, c) =
                j.at("matrix").at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>();
        return MapModel::linear(source->metric, target->metric, a);
      }
      if (kind == "radial-stretch")
        return MapModel::radial_stretch(source->metric, target->metric, j.value("k", 2.0));
      if (kind == "symbolic") {
        std::vector<Expr> comps;
        std::vector<std::string> vars;
        for (int i = 0; i < n; ++i) vars.push_back("x" + std::to_string(i + 1));
        for (const auto& c : j.at("components"))
          comps.push_back(Expr::parse(c.get<std::string>(), vars));
        return MapModel::symbolic(source->metric, target->metric, std::move(comps));
      }
      fail(ErrorCode::ParseError, "unknown map kind '" + kind + "'");
    }();
    *out = new ringmod_map(std::move(built));
  });
}

void ringmod_map_destroy(ringmod_map* map) { delete map; }

ringmod_status ringmod_dilatation_at(const ringmod_map* map, const double* x, double p,
                                     int use_fd, double out4[4]) {
  return guarded([&]() {
    check_arg(map != nullptr && x != nullptr && out4 != nullptr, "map/x/out4");
    const int n = map->map.source().dim();
    ExponentSet exps = ExponentSet::make(n, p);
    DilatationSample d = dilatation_at(map->map, read_point(x, n), exps, use_fd != 0);
    out4[0] = d.big_l;
    out4[1] = d.small_l;
    out4[2] = d.jacobian;
    out4[3] = d.k_p;
  });
}

ringmod_status ringmod_verify_theorem2(const ringmod_map* map, const ringmod_neighborhood* nbhd,
                                       double eps, double eps0, double p, int radial_panels,
                                       int angular_nodes, int threads, double* lhs_out,
                                       double* rhs_out, int* holds_out) {
  return guarded([&]() {
    check_arg(map != nullptr && nbhd != nullptr && lhs_out != nullptr && rhs_out != nullptr &&
                  holds_out != nullptr,
              "map/nbhd/outputs");
    ExponentSet exps = ExponentSet::make(map->map.source().dim(), p);
    GeodesicRing ring(eps, eps0);
    GridOptions opts;
    opts.radial_panels = radial_panels;
    opts.angular_nodes = angular_nodes;
    opts.threads = std::max(1, threads);
    Theorem2Report rep = verify_theorem2(map->map, nbhd->nbhd, ring, exps, opts);
    *lhs_out = rep.lhs;
    *rhs_out = rep.rhs;
    *holds_out = rep.holds ? 1 : 0;
  });
}

/* --- boundary ------------------------------------------------------------------- */

ringmod_status ringmod_divergence_check(const ringmod_neighborhood* nbhd, const char* domain_json,
                                        const ringmod_weight* weight, double delta, int levels,
                                        double* cutoffs_out, double* partial_integrals_out,
                                        int* verdict_out, double* growth_fit_out) {
  return guarded([&]() {
    check_arg(nbhd != nullptr && weight != nullptr, "nbhd/weight");
    DivergenceReport rep =
        divergence_check(nbhd->nbhd, parse_domain_json(domain_json, nbhd->nbhd.metric().dim()),
                         weight->weight, delta, levels);
    for (int j = 0; j < levels; ++j) {
      if (cutoffs_out != nullptr) cutoffs_out[j] = rep.cutoffs[static_cast<size_t>(j)];
      if (partial_integrals_out != nullptr)
        partial_integrals_out[j] = rep.partial_integrals[static_cast<size_t>(j)];
    }
    if (verdict_out != nullptr) *verdict_out = static_cast<int>(rep.verdict);
    if (growth_fit_out != nullptr) *growth_fit_out = rep.growth_fit;
  });
}

ringmod_status ringmod_log_growth_fit(const ringmod_neighborhood* nbhd, const char* domain_json,
                                      const ringmod_weight* weight, double delta, int levels,
                                      int* is_o_log_out, double* constant_out) {
  return guarded([&]() {
    check_arg(nbhd != nullptr && weight != nullptr, "nbhd/weight");
    LogGrowthFit fit =
        log_growth_fit(nbhd->nbhd, parse_domain_json(domain_json, nbhd->nbhd.metric().dim()),
                       weight->weight, delta, levels);
    if (is_o_log_out != nullptr) *is_o_log_out = fit.is_o_log ? 1 : 0;
    if (constant_out != nullptr) *constant_out = fit.constant;
  });
}

/* --- runner ----------------------------------------------------------------------- */

ringmod_status ringmod_run_json(const char* config_json, const char* out_dir, int threads,
                                long long seed) {
  return guarded([&]() {
    check_arg(config_json != nullptr && out_dir != nullptr, "config/out_dir");
    RunConfig cfg = RunConfig::from_json_text(config_json);
    std::optional<std::uint64_t> override;
    if (seed >= 0) override = static_cast<std::uint64_t>(seed);
    run(cfg, out_dir, std::max(1, threads), override);
  });
}

ringmod_status ringmod_run_file(const char* config_path, const char* out_dir, int threads,
                                long long seed) {
  return guarded([&]() {
    check_arg(config_path != nullptr && out_dir != nullptr, "config/out_dir");
    RunConfig cfg = RunConfig::from_file(config_path);
    std::optional<std::uint64_t> override;
    if (seed >= 0) override = static_cast<std::uint64_t>(seed);
    run(cfg, out_dir, std::max(1, threads), override);
  });
}

ringmod_status ringmod_check(const char* out_dir, int threads, uint64_t seed, int* failures_out) {
  return guarded([&]() {
    check_arg(out_dir != nullptr, "out_dir");
    int failures = run_check(out_dir, std::max(1, threads), seed);
    if (failures_out != nullptr) *failures_out = failures;
  });
}

}  // extern "C"
