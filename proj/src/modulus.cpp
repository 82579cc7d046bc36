#include "ringmod/modulus.hpp"

#include <algorithm>
#include <cmath>

#include "ringmod/error.hpp"
#include "ringmod/parallel.hpp"

namespace ringmod {

ExponentSet ExponentSet::make(int n, double p) {
  require(n == 2 || n == 3, ErrorCode::InvalidArgument, "dimension must be 2 or 3");
  require(std::isfinite(p) && p > n - 1, ErrorCode::UnsupportedExponent,
          "modulus exponent requires p > n-1");
  ExponentSet e;
  e.n = n;
  e.p = p;
  e.q = p / (n - 1);
  e.s = (n - 1) / (p - n + 1);
  e.alpha = p / (p - n + 1);
  require(e.q > 1.0, ErrorCode::Internal, "exponent identity q > 1 failed");
  require(std::abs(e.s * (e.q - 1.0) - 1.0) < 1e-12, ErrorCode::Internal,
          "exponent identity s(q-1) = 1 failed");
  require(std::abs(e.alpha - e.q * e.s) < 1e-12 * e.alpha, ErrorCode::Internal,
          "exponent identity alpha = q*s failed");
  return e;
}

WeightField WeightField::constant(double value) {
  require(std::isfinite(value) && value > 0.0, ErrorCode::InvalidArgument,
          "constant weight must be positive");
  WeightField w;
  w.kind_ = Kind::Constant;
  w.value_ = value;
  w.description_ = "constant:" + std::to_string(value);
  return w;
}

WeightField WeightField::radial(Expr expr) {
  WeightField w;
  w.kind_ = Kind::Radial;
  w.description_ = "radial:" + expr.text();
  w.radial_fn_ = [expr](double r) {
    double vars[1] = {r};
    return expr.eval(std::span<const double>(vars, 1));
  };
  return w;
}

WeightField WeightField::radial_function(std::function<double(double)> fn,
                                         std::string description) {
  WeightField w;
  w.kind_ = Kind::Radial;
  w.radial_fn_ = std::move(fn);
  w.description_ = std::move(description);
  return w;
}

WeightField WeightField::symbolic(Expr expr, int dim) {
  WeightField w;
  w.kind_ = Kind::Symbolic;
  w.dim_ = dim;
  w.description_ = "symbolic:" + expr.text();
  w.expr_ = std::move(expr);
  return w;
}

WeightField WeightField::function(std::function<double(const Pt&)> fn, std::string description) {
  WeightField w;
  w.kind_ = Kind::Function;
  w.fn_ = std::move(fn);
  w.description_ = std::move(description);
  return w;
}

double WeightField::eval(const Pt& p, double r_hint) const {
  double v = 0.0;
  switch (kind_) {
    case Kind::Constant: v = value_; break;
    case Kind::Radial:
      require(std::isfinite(r_hint), ErrorCode::InvalidArgument,
              "radial weight needs the distance to the ring center");
      v = radial_fn_(r_hint);
      break;
    case Kind::Symbolic: {
      double vars[3] = {p[0], p[1], p[2]};
      v = expr_.eval(std::span<const double>(vars, static_cast<size_t>(dim_)));
      break;
    }
    case Kind::Function: v = fn_(p); break;
  }
  require(!(v != v) && v > 0.0, ErrorCode::InvalidArgument,
          "weight field must be positive where sampled (" + description_ + ")");
  return v;
}

namespace {

double clamp_weight(double q) { return std::min(q, kFieldCap); }

// Per-shell masked data extracted once for the optimization paths.
struct ShellSlice {
  std::vector<double> area;
  std::vector<double> volume;
  std::vector<double> weight;  // Q at the cell, clamped
};

ShellSlice shell_slice(const ShellGrid& grid, const WeightField& q_field, int k) {
  ShellSlice s;
  double r = grid.radius(k);
  for (int i = 0; i < grid.angular(); ++i) {
    if (!grid.inside(k, i)) continue;
    s.area.push_back(grid.area_weight(k, i));
    s.volume.push_back(grid.volume_weight(k, i));
    s.weight.push_back(clamp_weight(q_field.eval(grid.point(k, i), r)));
  }
  if (s.area.empty())
    fail(ErrorCode::EmptyShell, "domain indicator removed the whole shell at r = " +
                                    std::to_string(r));
  return s;
}

double qnorm_from_slice(const ShellSlice& s, const ExponentSet& e) {
  double acc = 0.0;
  for (size_t j = 0; j < s.area.size(); ++j)
    acc += clamp_field_value(std::pow(s.weight[j], e.s)) * s.area[j];
  require(acc > 0.0, ErrorCode::EmptyShell, "shell carries no positive area");
  return std::pow(acc, 1.0 / e.s);
}

// Projection onto the weighted simplex {a >= 0, sum c_j a_j = 1}, c_j > 0.
// h(tau) = sum c_j max(0, y_j - tau c_j) is convex decreasing piecewise
// linear; Newton from the unclipped root converges monotonically.
void project_weighted_simplex(std::vector<double>& y, const std::vector<double>& c) {
  const size_t m = y.size();
  double cy = 0.0, cc = 0.0;
  for (size_t j = 0; j < m; ++j) {
    cy += c[j] * y[j];
    cc += c[j] * c[j];
  }
  double tau = (cy - 1.0) / cc;
  for (int iter = 0; iter < 200; ++iter) {
    double h = 0.0, slope = 0.0;
    for (size_t j = 0; j < m; ++j) {
      double a = y[j] - tau * c[j];
      if (a > 0.0) {
        h += c[j] * a;
        slope += c[j] * c[j];
      }
    }
    if (h <= 1.0 + 1e-14 || slope == 0.0) break;
    tau += (h - 1.0) / slope;
  }
  double total = 0.0;
  for (size_t j = 0; j < m; ++j) {
    y[j] = std::max(0.0, y[j] - tau * c[j]);
    total += c[j] * y[j];
  }
  require(total > 0.0, ErrorCode::Internal, "simplex projection collapsed");
  for (size_t j = 0; j < m; ++j) y[j] /= total;
}

struct PgdResult {
  double value = 0.0;
  std::vector<double> argmin;
  int iterations = 0;
};

// min sum obj_j a_j^q  s.t.  sum con_j a_j = 1, a >= 0  (obj, con > 0, q > 1)
// by projected gradient descent with Barzilai-Borwein steps and a monotone
// backtracking safeguard.
PgdResult pgd_min_shell(const std::vector<double>& obj, const std::vector<double>& con, double q,
                        const PgdOptions& opts) {
  const size_t m = obj.size();
  double con_total = 0.0;
  for (double c : con) con_total += c;

  std::vector<double> a(m, 1.0 / con_total);
  auto objective = [&](const std::vector<double>& x) {
    double f = 0.0;
    for (size_t j = 0; j < m; ++j) f += obj[j] * std::pow(x[j], q);
    return f;
  };
  auto gradient = [&](const std::vector<double>& x, std::vector<double>& g) {
    for (size_t j = 0; j < m; ++j) g[j] = q * obj[j] * std::pow(x[j], q - 1.0);
  };

  std::vector<double> grad(m), prev_a, prev_grad, cand(m);
  gradient(a, grad);
  double f = objective(a);

  // Initial step from a diagonal curvature estimate at the uniform point.
  double curv = 0.0;
  double abar = 1.0 / con_total;
  for (size_t j = 0; j < m; ++j)
    curv = std::max(curv, q * std::abs(q - 1.0) * obj[j] * std::pow(abar, q - 2.0));
  double step = curv > 0.0 ? 1.0 / curv : 1.0;

  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    if (iter > 0) {
      double num = 0.0, den = 0.0;
      for (size_t j = 0; j < m; ++j) {
        double da = a[j] - prev_a[j];
        double dg = grad[j] - prev_grad[j];
        num += da * da;
        den += da * dg;
      }
      if (den > 0.0 && num > 0.0) step = std::clamp(num / den, 1e-16, 1e16);
    }

    prev_a = a;
    prev_grad = grad;

    double f_new = f;
    bool moved = false;
    double t = step;
    for (int back = 0; back < 60; ++back) {
      for (size_t j = 0; j < m; ++j) cand[j] = a[j] - t * grad[j];
      project_weighted_simplex(cand, con);
      f_new = objective(cand);
      if (f_new <= f) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;  // stationary: projection returns the same point

    double drop = f - f_new;
    a.swap(cand);
    f = f_new;
    gradient(a, grad);
    if (drop <= opts.rel_obj_tol * std::max(std::abs(f), 1e-300)) {
      ++iter;
      PgdResult res;
      res.value = f;
      res.argmin = std::move(a);
      res.iterations = iter;
      return res;
    }
  }
  if (iter >= opts.max_iters)
    fail(ErrorCode::SolverNotConverged,
         "per-shell projected gradient descent exhausted its iteration budget");
  PgdResult res;
  res.value = f;
  res.argmin = std::move(a);
  res.iterations = iter;
  return res;
}

}  // namespace

double qnorm_on_sphere(const ShellGrid& grid, const WeightField& q_field, const ExponentSet& exps,
                       int shell_index) {
  require(shell_index >= 0 && shell_index < grid.shells(), ErrorCode::InvalidArgument,
          "shell index out of range");
  return qnorm_from_slice(shell_slice(grid, q_field, shell_index), exps);
}

std::vector<double> qnorm_profile(const ShellGrid& grid, const WeightField& q_field,
                                  const ExponentSet& exps, int threads) {
  std::vector<double> out(static_cast<size_t>(grid.shells()), 0.0);
  parallel_for(grid.shells(), threads, [&](int k) {
    out[static_cast<size_t>(k)] = qnorm_from_slice(shell_slice(grid, q_field, k), exps);
  });
  return out;
}

double lower_bound_integral_from_profile(const ShellGrid& grid,
                                         const std::vector<double>& qnorms) {
  double acc = 0.0;
  for (int k = 0; k < grid.shells(); ++k)
    acc += grid.radial_weight(k) / qnorms[static_cast<size_t>(k)];
  return acc;
}

double lower_bound_integral(const ShellGrid& grid, const WeightField& q_field,
                            const ExponentSet& exps, int threads) {
  return lower_bound_integral_from_profile(grid, qnorm_profile(grid, q_field, exps, threads));
}

Density extremal_density(const ShellGrid& grid, const WeightField& q_field,
                         const ExponentSet& exps, int threads) {
  auto qnorms = qnorm_profile(grid, q_field, exps, threads);
  Density rho;
  rho.shells = grid.shells();
  rho.angular = grid.angular();
  rho.values.assign(static_cast<size_t>(rho.shells) * static_cast<size_t>(rho.angular), 0.0);
  const double expo = 1.0 / (exps.p - exps.n + 1);
  parallel_for(grid.shells(), threads, [&](int k) {
    double r = grid.radius(k);
    double qn = qnorms[static_cast<size_t>(k)];
    for (int i = 0; i < grid.angular(); ++i) {
      if (!grid.inside(k, i)) continue;
      double q = clamp_weight(q_field.eval(grid.point(k, i), r));
      rho.at(k, i) = std::pow(q / qn, expo);
    }
  });
  return rho;
}

double objective_value(const ShellGrid& grid, const WeightField& q_field, const ExponentSet& exps,
                       const Density& rho) {
  require(rho.shells == grid.shells() && rho.angular == grid.angular(),
          ErrorCode::InvalidArgument, "density does not match the grid");
  double acc = 0.0;
  for (int k = 0; k < grid.shells(); ++k) {
    double r = grid.radius(k);
    for (int i = 0; i < grid.angular(); ++i) {
      if (!grid.inside(k, i)) continue;
      double q = clamp_weight(q_field.eval(grid.point(k, i), r));
      double v = rho.at(k, i);
      require(v >= 0.0, ErrorCode::InvalidArgument, "density must be nonnegative");
      acc += clamp_field_value(std::pow(v, exps.p) / q) * grid.volume_weight(k, i);
    }
  }
  return acc;
}

double per_shell_infimum(const ShellGrid& grid, const WeightField& q_field,
                         const ExponentSet& exps, int shell_index, ModulusKind mode,
                         const PgdOptions& opts) {
  require(shell_index >= 0 && shell_index < grid.shells(), ErrorCode::InvalidArgument,
          "shell index out of range");
  ShellSlice s = shell_slice(grid, q_field, shell_index);
  if (mode == ModulusKind::ClosedForm) return 1.0 / qnorm_from_slice(s, exps);

  std::vector<double> obj(s.area.size());
  for (size_t j = 0; j < obj.size(); ++j) obj[j] = s.area[j] / s.weight[j];
  return pgd_min_shell(obj, s.area, exps.q, opts).value;
}

PerShellSolution per_shell_oracle_solution(const ShellGrid& grid, const WeightField& q_field,
                                           const ExponentSet& exps, int shell_index,
                                           const PgdOptions& opts) {
  require(shell_index >= 0 && shell_index < grid.shells(), ErrorCode::InvalidArgument,
          "shell index out of range");
  ShellSlice s = shell_slice(grid, q_field, shell_index);
  std::vector<double> obj(s.area.size());
  for (size_t j = 0; j < obj.size(); ++j) obj[j] = s.area[j] / s.weight[j];
  PgdResult r = pgd_min_shell(obj, s.area, exps.q, opts);

  PerShellSolution sol;
  sol.value = r.value;
  sol.argmin = std::move(r.argmin);
  sol.iterations = r.iterations;
  for (int i = 0; i < grid.angular(); ++i)
    if (grid.inside(shell_index, i)) sol.cell_indices.push_back(i);
  return sol;
}

ModulusEstimate surface_family_modulus(const ShellGrid& grid, const WeightField& q_field,
                                       const ExponentSet& exps, ModulusKind kind, int threads,
                                       const PgdOptions& opts) {
  ModulusEstimate est;
  est.kind = kind;
  est.resolution = grid.resolution_tag();

  auto qnorms = qnorm_profile(grid, q_field, exps, threads);
  double closed = lower_bound_integral_from_profile(grid, qnorms);
  if (kind == ModulusKind::ClosedForm) {
    est.value = closed;
    est.gap = 0.0;
    return est;
  }

  // Oracle: minimize the volume-weighted p-energy over densities whose
  // (n-1)-energy is 1 on every shell; the problems decouple shell by shell.
  std::vector<double> shell_min(static_cast<size_t>(grid.shells()), 0.0);
  parallel_for(grid.shells(), threads, [&](int k) {
    ShellSlice s = shell_slice(grid, q_field, k);
    std::vector<double> obj(s.area.size());
    for (size_t j = 0; j < obj.size(); ++j) obj[j] = s.volume[j] / s.weight[j];
    shell_min[static_cast<size_t>(k)] = pgd_min_shell(obj, s.area, exps.q, opts).value;
  });
  double oracle = 0.0;
  for (double v : shell_min) oracle += v;

  est.value = oracle;
  est.gap = std::abs(oracle - closed) / std::max(closed, 1e-300);
  return est;
}

RadialProfile eta0_profile(const ShellGrid& grid, const WeightField& q_field,
                           const ExponentSet& exps, int threads) {
  auto qnorms = qnorm_profile(grid, q_field, exps, threads);
  double integral = lower_bound_integral_from_profile(grid, qnorms);

  std::vector<double> radii(static_cast<size_t>(grid.shells()));
  std::vector<double> values(static_cast<size_t>(grid.shells()));
  for (int k = 0; k < grid.shells(); ++k) {
    radii[static_cast<size_t>(k)] = grid.radius(k);
    values[static_cast<size_t>(k)] = 1.0 / (integral * qnorms[static_cast<size_t>(k)]);
  }

  RadialProfile eta;
  eta.description = "eta0";
  eta.eval = [radii = std::move(radii), values = std::move(values)](double r) {
    if (r <= radii.front()) return values.front();
    if (r >= radii.back()) return values.back();
    auto it = std::upper_bound(radii.begin(), radii.end(), r);
    size_t hi = static_cast<size_t>(it - radii.begin());
    double t = (r - radii[hi - 1]) / (radii[hi] - radii[hi - 1]);
    return values[hi - 1] + t * (values[hi] - values[hi - 1]);
  };
  return eta;
}

RadialProfile normalize_profile(const ShellGrid& grid, std::function<double(double)> fn,
                                std::string description) {
  double z = 0.0;
  for (int k = 0; k < grid.shells(); ++k) z += grid.radial_weight(k) * fn(grid.radius(k));
  require(z > 0.0, ErrorCode::InvalidArgument, "profile integrates to zero; cannot normalize");
  RadialProfile eta;
  eta.description = std::move(description);
  eta.eval = [fn = std::move(fn), z](double r) { return fn(r) / z; };
  return eta;
}

JensenResult jensen_verify(const ShellGrid& grid, const WeightField& q_field,
                           const ExponentSet& exps, const RadialProfile& eta, int threads) {
  // eta must satisfy the normalization (2.3) under the grid's radial rule.
  double z = 0.0;
  for (int k = 0; k < grid.shells(); ++k) {
    double v = eta.eval(grid.radius(k));
    require(v >= 0.0, ErrorCode::InvalidArgument, "eta must be nonnegative");
    z += grid.radial_weight(k) * v;
  }
  require(std::abs(z - 1.0) <= 1e-6, ErrorCode::NotNormalized,
          "eta integrates to " + std::to_string(z) + ", expected 1");

  std::vector<double> qnorms(static_cast<size_t>(grid.shells()));
  std::vector<double> qs_volume(static_cast<size_t>(grid.shells()));
  parallel_for(grid.shells(), threads, [&](int k) {
    ShellSlice s = shell_slice(grid, q_field, k);
    qnorms[static_cast<size_t>(k)] = qnorm_from_slice(s, exps);
    double w = 0.0;
    for (size_t j = 0; j < s.area.size(); ++j)
      w += clamp_field_value(std::pow(s.weight[j], exps.s)) * s.volume[j];
    qs_volume[static_cast<size_t>(k)] = w;
  });

  double integral = lower_bound_integral_from_profile(grid, qnorms);
  JensenResult out;
  out.lhs = std::pow(integral, -exps.s);
  out.rhs = 0.0;
  for (int k = 0; k < grid.shells(); ++k)
    out.rhs += std::pow(eta.eval(grid.radius(k)), exps.alpha) * qs_volume[static_cast<size_t>(k)];
  out.holds = out.rhs >= out.lhs - 1e-7 * std::max(out.lhs, 1.0);
  return out;
}

RingBoundResult ring_upper_bound(const ShellGrid& grid, const WeightField& q_field,
                                 const ExponentSet& exps, int threads) {
  RingBoundResult res;
  res.integral = lower_bound_integral(grid, q_field, exps, threads);
  double dev = grid.neighborhood().metric_deviation(grid.eps0());
  res.c_estimate = std::pow(1.0 + dev, exps.p * exps.s);
  res.bound = res.c_estimate * std::pow(res.integral, -exps.s);
  return res;
}

}  // namespace ringmod
