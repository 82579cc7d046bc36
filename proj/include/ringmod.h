/* ringmod — moduli of geodesic-sphere families on Riemannian charts.
 *
 * C interface to the ringmod core: opaque handles, integer status codes,
 * thread-local error messages. All array arguments use the chart dimension
 * of the owning metric (2 or 3 doubles); matrices are row-major dim x dim.
 */
#ifndef RINGMOD_H
#define RINGMOD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RINGMOD_API __declspec(dllexport)
#else
#define RINGMOD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ringmod_status {
  RINGMOD_OK = 0,
  RINGMOD_ERR_INVALID_ARGUMENT = 1,
  RINGMOD_ERR_PARSE = 2,
  RINGMOD_ERR_TRAJECTORY_LEFT_CHART = 3,
  RINGMOD_ERR_STEP_FAILURE = 4,
  RINGMOD_ERR_RADIUS_TOO_LARGE = 5,
  RINGMOD_ERR_OUTSIDE_NORMAL_RANGE = 6,
  RINGMOD_ERR_DEGENERATE_TANGENT = 7,
  RINGMOD_ERR_NON_POSITIVE_DEFINITE = 8,
  RINGMOD_ERR_EMPTY_SHELL = 9,
  RINGMOD_ERR_SOLVER_NOT_CONVERGED = 10,
  RINGMOD_ERR_NOT_NORMALIZED = 11,
  RINGMOD_ERR_NOT_DIFFERENTIABLE = 12,
  RINGMOD_ERR_IMAGE_LEFT_CHART = 13,
  RINGMOD_ERR_UNSUPPORTED_EXPONENT = 14,
  RINGMOD_ERR_IO = 15,
  RINGMOD_ERR_INTERNAL = 16
} ringmod_status;

typedef struct ringmod_metric ringmod_metric;
typedef struct ringmod_neighborhood ringmod_neighborhood;
typedef struct ringmod_grid ringmod_grid;
typedef struct ringmod_weight ringmod_weight;
typedef struct ringmod_map ringmod_map;

RINGMOD_API const char* ringmod_version(void);
RINGMOD_API const char* ringmod_status_name(ringmod_status status);
/* Message describing the most recent failure on this thread. */
RINGMOD_API const char* ringmod_last_error(void);

/* --- metrics ------------------------------------------------------------ */

/* spec_json: {"kind":"euclidean|round-sphere|poincare-ball|conformal-flat|custom",
 *             "dim":2|3, "lambda":"expr", "g":[["expr",...],...],
 *             "box":{"lo":[...],"hi":[...]}} */
RINGMOD_API ringmod_status ringmod_metric_create(const char* spec_json, ringmod_metric** out);
RINGMOD_API void ringmod_metric_destroy(ringmod_metric* metric);
RINGMOD_API int ringmod_metric_dim(const ringmod_metric* metric);
RINGMOD_API ringmod_status ringmod_metric_eval(const ringmod_metric* metric, const double* x,
                                               double* g_out /* dim*dim */);
RINGMOD_API ringmod_status ringmod_volume_element(const ringmod_metric* metric, const double* x,
                                                  double* out);
RINGMOD_API ringmod_status ringmod_geodesic_shoot(const ringmod_metric* metric,
                                                  const double* start, const double* velocity,
                                                  double length, double* end_out);
RINGMOD_API ringmod_status ringmod_geodesic_distance(const ringmod_metric* metric,
                                                     const double* a, const double* b,
                                                     double* out);

/* --- normal neighborhoods ------------------------------------------------ */

RINGMOD_API ringmod_status ringmod_neighborhood_build(const ringmod_metric* metric,
                                                      const double* center, double radius,
                                                      ringmod_neighborhood** out);
RINGMOD_API void ringmod_neighborhood_destroy(ringmod_neighborhood* nbhd);
RINGMOD_API ringmod_status ringmod_neighborhood_exp(const ringmod_neighborhood* nbhd, double r,
                                                    const double* theta, double* out);
RINGMOD_API ringmod_status ringmod_metric_deviation(const ringmod_neighborhood* nbhd, double r,
                                                    double* out);
RINGMOD_API ringmod_status ringmod_sphere_area_element(const ringmod_neighborhood* nbhd, double r,
                                                       const double* angles /* dim-1 */,
                                                       double* out);

/* --- weights -------------------------------------------------------------- */

/* spec_json: {"kind":"constant","value":c} | {"kind":"radial","expr":"..."} |
 *            {"kind":"symbolic","expr":"..."} */
RINGMOD_API ringmod_status ringmod_weight_create(const char* spec_json, int dim,
                                                 ringmod_weight** out);
RINGMOD_API void ringmod_weight_destroy(ringmod_weight* weight);

/* --- shell grids ---------------------------------------------------------- */

/* domain_json: {"kind":"full"} | {"kind":"halfspace","normal":[...],"offset":o} |
 *              {"kind":"expression","expr":"..."}; NULL means full. */
RINGMOD_API ringmod_status ringmod_grid_build(const ringmod_neighborhood* nbhd, double eps,
                                              double eps0, const char* domain_json,
                                              int radial_panels, int angular_nodes, int threads,
                                              ringmod_grid** out);
RINGMOD_API void ringmod_grid_destroy(ringmod_grid* grid);
RINGMOD_API int ringmod_grid_shells(const ringmod_grid* grid);
RINGMOD_API ringmod_status ringmod_grid_shell_radius(const ringmod_grid* grid, int shell,
                                                     double* out);
RINGMOD_API ringmod_status ringmod_grid_shell_area(const ringmod_grid* grid, int shell,
                                                   double* out);
RINGMOD_API ringmod_status ringmod_grid_ring_volume(const ringmod_grid* grid, double* out);

/* --- modulus machinery ---------------------------------------------------- */

RINGMOD_API ringmod_status ringmod_qnorm_on_sphere(const ringmod_grid* grid,
                                                   const ringmod_weight* weight, double p,
                                                   int shell, double* out);
RINGMOD_API ringmod_status ringmod_lower_bound_integral(const ringmod_grid* grid,
                                                        const ringmod_weight* weight, double p,
                                                        int threads, double* out);
/* mode: 0 = closed form, 1 = convex oracle. gap_out may be NULL. */
RINGMOD_API ringmod_status ringmod_surface_modulus(const ringmod_grid* grid,
                                                   const ringmod_weight* weight, double p,
                                                   int mode, int threads, double* value_out,
                                                   double* gap_out);
RINGMOD_API ringmod_status ringmod_jensen_eta0(const ringmod_grid* grid,
                                               const ringmod_weight* weight, double p,
                                               int threads, double* lhs_out, double* rhs_out);
RINGMOD_API ringmod_status ringmod_ring_upper_bound(const ringmod_grid* grid,
                                                    const ringmod_weight* weight, double p,
                                                    int threads, double* bound_out,
                                                    double* c_estimate_out);
RINGMOD_API ringmod_status ringmod_curve_modulus_flat_annulus(int n, double alpha, double eps,
                                                              double eps0, double* out);

/* --- mappings ------------------------------------------------------------- */

/* spec_json: {"kind":"identity"} | {"kind":"linear","matrix":[[...],...]} |
 *            {"kind":"radial-stretch","k":2.0} |
 *            {"kind":"symbolic","components":["...",...]} */
RINGMOD_API ringmod_status ringmod_map_create(const ringmod_metric* source,
                                              const ringmod_metric* target,
                                              const char* spec_json, ringmod_map** out);
RINGMOD_API void ringmod_map_destroy(ringmod_map* map);
/* out4 = {L, l, J, K_p}. use_fd != 0 forces finite differences. */
RINGMOD_API ringmod_status ringmod_dilatation_at(const ringmod_map* map, const double* x,
                                                 double p, int use_fd, double out4[4]);
/* holds_out: 1 when lhs >= rhs within tolerance. */
RINGMOD_API ringmod_status ringmod_verify_theorem2(const ringmod_map* map,
                                                   const ringmod_neighborhood* nbhd, double eps,
                                                   double eps0, double p, int radial_panels,
                                                   int angular_nodes, int threads,
                                                   double* lhs_out, double* rhs_out,
                                                   int* holds_out);

/* --- boundary checkers ---------------------------------------------------- */

/* verdict_out: 0 diverges, 1 converges, 2 inconclusive. Arrays must hold
 * `levels` doubles; any of the outputs may be NULL. */
RINGMOD_API ringmod_status ringmod_divergence_check(const ringmod_neighborhood* nbhd,
                                                    const char* domain_json,
                                                    const ringmod_weight* weight, double delta,
                                                    int levels, double* cutoffs_out,
                                                    double* partial_integrals_out,
                                                    int* verdict_out, double* growth_fit_out);
RINGMOD_API ringmod_status ringmod_log_growth_fit(const ringmod_neighborhood* nbhd,
                                                  const char* domain_json,
                                                  const ringmod_weight* weight, double delta,
                                                  int levels, int* is_o_log_out,
                                                  double* constant_out);

/* --- batch runner ---------------------------------------------------------- */

/* Executes a JSON run configuration, writing summary.csv, shells.csv and
 * profile.dat under out_dir. seed < 0 keeps the config's seed. */
RINGMOD_API ringmod_status ringmod_run_json(const char* config_json, const char* out_dir,
                                            int threads, long long seed);
RINGMOD_API ringmod_status ringmod_run_file(const char* config_path, const char* out_dir,
                                            int threads, long long seed);
/* Built-in verification suite; failures_out receives the failed-check count. */
RINGMOD_API ringmod_status ringmod_check(const char* out_dir, int threads, uint64_t seed,
                                         int* failures_out);

#ifdef __cplusplus
}
#endif

#endif /* RINGMOD_H */
