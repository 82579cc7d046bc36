#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ringmod/quadrature.hpp"

namespace ringmod {

// Exponent bookkeeping for the p-modulus of sphere families:
//   q = p/(n-1) > 1,  s = (n-1)/(p-n+1),  alpha = p/(p-n+1) = q*s,
// with the identity s*(q-1) = 1 that collapses per-shell infima to 1/||Q||_s.
struct ExponentSet {
  int n = 0;
  double p = 0.0;
  double q = 0.0;
  double s = 0.0;
  double alpha = 0.0;

  static ExponentSet make(int n, double p);

  // alpha > p holds exactly for p < n (equality at p = n).
  bool alpha_exceeds_p() const { return alpha > p; }
};

// Positive measurable weight Q (or a dilatation field K). Radial weights are
// evaluated through the geodesic distance from the ring center, which grid
// cells know exactly, so ops pass it as a hint.
class WeightField {
 public:
  WeightField() = default;  // constant 1

  static WeightField constant(double value);
  static WeightField radial(Expr expr);    // variable "r"
  static WeightField radial_function(std::function<double(double)> fn, std::string description);
  static WeightField symbolic(Expr expr, int dim);  // variables x1..xn
  static WeightField function(std::function<double(const Pt&)> fn, std::string description);

  // r_hint: geodesic distance of p from the ring center (NaN when unknown;
  // required by radial weights).
  double eval(const Pt& p, double r_hint) const;
  bool is_radial() const { return kind_ == Kind::Radial; }
  const std::string& description() const { return description_; }

 private:
  enum class Kind { Constant, Radial, Symbolic, Function };
  Kind kind_ = Kind::Constant;
  double value_ = 1.0;
  Expr expr_;
  int dim_ = 0;
  std::function<double(double)> radial_fn_;
  std::function<double(const Pt&)> fn_;
  std::string description_ = "constant:1";
};

// Nonnegative density sampled on the cells of a ShellGrid.
struct Density {
  int shells = 0;
  int angular = 0;
  std::vector<double> values;  // shells x angular, shell-major

  double& at(int k, int i) {
    return values[static_cast<size_t>(k) * static_cast<size_t>(angular) + static_cast<size_t>(i)];
  }
  double at(int k, int i) const {
    return values[static_cast<size_t>(k) * static_cast<size_t>(angular) + static_cast<size_t>(i)];
  }
};

// Radial profile eta on (eps, eps0); `grid_normalized` means the grid's
// radial rule integrates it to 1 exactly.
struct RadialProfile {
  std::function<double(double)> eval;
  std::string description;
};

enum class ModulusKind { ClosedForm, ConvexOracle };

struct ModulusEstimate {
  double value = 0.0;
  ModulusKind kind = ModulusKind::ClosedForm;
  std::string resolution;
  double gap = 0.0;  // relative difference to the paired estimate (oracle kind)
};

struct PgdOptions {
  int max_iters = 10000;
  double rel_obj_tol = 1e-10;
};

// ---------------------------------------------------------------------------
// Per-shell quantities.

// L^s norm of Q over D(P0, r_k) = D n S(P0, r_k). Throws EmptyShell when the
// domain mask removes the whole shell.
double qnorm_on_sphere(const ShellGrid& grid, const WeightField& q_field, const ExponentSet& exps,
                       int shell_index);

// All shells at once (parallel over shells, deterministic output).
std::vector<double> qnorm_profile(const ShellGrid& grid, const WeightField& q_field,
                                  const ExponentSet& exps, int threads = 1);

// I(P0, eps, eps0) = integral of dr / ||Q||_s(P0, r): the sharp lower bound
// for the p-modulus of the sphere family.
double lower_bound_integral(const ShellGrid& grid, const WeightField& q_field,
                            const ExponentSet& exps, int threads = 1);
double lower_bound_integral_from_profile(const ShellGrid& grid,
                                         const std::vector<double>& qnorms);

// Extremal density rho0 = [Q / ||Q||_s(P0, d(P, P0))]^{1/(p-n+1)}.
Density extremal_density(const ShellGrid& grid, const WeightField& q_field,
                         const ExponentSet& exps, int threads = 1);

// Weighted p-energy of rho over the ring: integral of rho^p / Q dV.
double objective_value(const ShellGrid& grid, const WeightField& q_field, const ExponentSet& exps,
                       const Density& rho);

// Per-shell infimum of the area problem
//   min  integral alpha^q / Q dA   s.t.  integral alpha dA = 1, alpha >= 0.
// Closed form: 1/||Q||_s. Oracle: projected gradient descent on the discrete
// program (throws SolverNotConverged past max_iters).
double per_shell_infimum(const ShellGrid& grid, const WeightField& q_field,
                         const ExponentSet& exps, int shell_index, ModulusKind mode,
                         const PgdOptions& opts = {});

// Oracle solution with the minimizer exposed (masked cells only).
struct PerShellSolution {
  double value = 0.0;
  std::vector<int> cell_indices;   // angular indices of the cells inside D
  std::vector<double> argmin;      // optimal alpha per listed cell
  int iterations = 0;
};

PerShellSolution per_shell_oracle_solution(const ShellGrid& grid, const WeightField& q_field,
                                           const ExponentSet& exps, int shell_index,
                                           const PgdOptions& opts = {});

// Discrete modulus of the sphere family: closed form returns I; the oracle
// minimizes objective_value over densities with unit (n-1)-energy on every
// shell and records the relative gap to the closed form.
ModulusEstimate surface_family_modulus(const ShellGrid& grid, const WeightField& q_field,
                                       const ExponentSet& exps, ModulusKind kind, int threads = 1,
                                       const PgdOptions& opts = {});

// ---------------------------------------------------------------------------
// Weighted-Jensen machinery.

struct JensenResult {
  double lhs = 0.0;  // 1 / I^s
  double rhs = 0.0;  // integral of Q^s eta^alpha(d(P,P0)) dV
  bool holds = false;
};

// Checks 1/I^s <= integral Q^s eta^alpha dV for a normalized eta; equality is
// attained by eta0(t) = 1/(I ||Q||_s(P0,t)). Throws NotNormalized when the
// grid's radial rule does not integrate eta to 1 within 1e-6.
JensenResult jensen_verify(const ShellGrid& grid, const WeightField& q_field,
                           const ExponentSet& exps, const RadialProfile& eta, int threads = 1);

// The canonical equality profile, tabulated from grid qnorms (piecewise
// linear between shell radii; integrates to 1 under the grid's radial rule).
RadialProfile eta0_profile(const ShellGrid& grid, const WeightField& q_field,
                           const ExponentSet& exps, int threads = 1);

// Rescales an arbitrary nonnegative profile so the grid's radial rule
// integrates it to exactly 1.
RadialProfile normalize_profile(const ShellGrid& grid, std::function<double(double)> fn,
                                std::string description);

// ---------------------------------------------------------------------------
// Ring upper bound (separating-surface side).

struct RingBoundResult {
  double bound = 0.0;       // c_estimate / I^s
  double c_estimate = 0.0;  // (1 + metric_deviation(eps0))^{p*s}, -> 1 as eps0 -> 0
  double integral = 0.0;    // I
};

RingBoundResult ring_upper_bound(const ShellGrid& grid, const WeightField& q_field,
                                 const ExponentSet& exps, int threads = 1);

// ---------------------------------------------------------------------------
// Flat-annulus curve modulus (verification oracle for the duality bound).

// Closed-form alpha-modulus of curves joining the boundary spheres of the
// annulus {eps < |x| < eps0} in R^n; for alpha = n this is the classical
// omega_{n-1} * ln(eps0/eps)^{1-n}. Requires alpha > 1.
double curve_modulus_flat_annulus(int n, double alpha, double eps, double eps0);

struct CurveModulusBrute {
  double value = 0.0;        // admissible (upper) certificate
  double dual_bound = 0.0;   // lower bound from the Lagrangian dual
  double gap = 0.0;          // relative duality gap at termination
  int iterations = 0;
};

// Brute-force discrete modulus: density per polar cell, admissibility rows
// over radial and spiral polygonal curves, solved by projected dual ascent.
CurveModulusBrute curve_modulus_flat_annulus_bruteforce(int n, double alpha, double eps,
                                                        double eps0, int radial_cells = 64,
                                                        int angular_cells = 96,
                                                        int max_iters = 20000,
                                                        double rel_gap_tol = 1e-3);

}  // namespace ringmod
