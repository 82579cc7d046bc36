#include "ringmod/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "ringmod/error.hpp"

namespace ringmod {

const char* divergence_verdict_name(DivergenceVerdict v) {
  switch (v) {
    case DivergenceVerdict::Diverges: return "diverges";
    case DivergenceVerdict::Converges: return "converges";
    case DivergenceVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

// Verdict heuristics over dyadic tail increments (documented, not theorems):
// geometric decay with a sub-1e-6 projected tail reads as convergent;
// non-summable decay (ratios near 1, e.g. harmonic increments from a log-log
// primitive) reads as divergent.
constexpr double kDivergeRatio = 0.93;
constexpr double kConvergeRatio = 0.90;
constexpr double kCauchyTail = 1e-6;

double sphere_norm_nodes(const NormalNeighborhood& nbhd, const DomainIndicator& domain,
                         const WeightField& k_field, double r, const AngularGrid& angular,
                         double exponent) {
  double acc = 0.0;
  int inside = 0;
  for (const auto& node : angular.nodes) {
    Pt x = nbhd.exp(r, node.theta);
    if (!domain.contains(x)) continue;
    ++inside;
    double u[2] = {node.u[0], node.u[1]};
    double density = sphere_area_element(nbhd, r, std::span<const double>(u, 2));
    double k = std::min(k_field.eval(x, r), kFieldCap);
    acc += clamp_field_value(std::pow(k, exponent)) * density * node.weight;
  }
  require(inside > 0, ErrorCode::EmptyShell,
          "domain indicator removed the whole sphere at r = " + std::to_string(r));
  return std::pow(acc, 1.0 / exponent);
}

}  // namespace

double boundary_sphere_norm(const NormalNeighborhood& nbhd, const DomainIndicator& domain,
                            const WeightField& k_field, double r, int angular_nodes) {
  const int n = nbhd.metric().dim();
  if (angular_nodes <= 0) angular_nodes = n == 2 ? 256 : 64;
  AngularGrid angular = AngularGrid::build(n, angular_nodes);
  return sphere_norm_nodes(nbhd, domain, k_field, r, angular, n - 1.0);
}

DivergenceReport divergence_check(const NormalNeighborhood& nbhd, const DomainIndicator& domain,
                                  const WeightField& k_field, double delta, int levels,
                                  int angular_nodes, int radial_panels_per_segment) {
  const int n = nbhd.metric().dim();
  require(delta > 0.0 && delta <= nbhd.radius_max() * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "divergence check needs 0 < delta <= radius_max");
  require(levels >= 4, ErrorCode::InvalidArgument, "divergence ladder needs at least 4 levels");
  if (angular_nodes <= 0) angular_nodes = n == 2 ? 256 : 64;
  AngularGrid angular = AngularGrid::build(n, angular_nodes);

  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre(4, gl_nodes, gl_weights);

  DivergenceReport report;
  report.center = nbhd.center();
  report.delta = delta;

  // Segment integrals of dr / ||K||_{n-1} over (t_j, t_{j-1}), t_0 = delta.
  std::vector<double> segments;
  double upper = delta;
  for (int j = 1; j <= levels; ++j) {
    double lower = delta * std::pow(2.0, -j);
    double seg = 0.0;
    double panel = (upper - lower) / radial_panels_per_segment;
    for (int pnl = 0; pnl < radial_panels_per_segment; ++pnl) {
      double a = lower + pnl * panel;
      for (size_t q = 0; q < gl_nodes.size(); ++q) {
        double r = a + (gl_nodes[q] + 1.0) * 0.5 * panel;
        double w = gl_weights[q] * 0.5 * panel;
        seg += w / sphere_norm_nodes(nbhd, domain, k_field, r, angular, n - 1.0);
      }
    }
    segments.push_back(seg);
    report.cutoffs.push_back(lower);
    report.shell_norms.push_back(sphere_norm_nodes(nbhd, domain, k_field, lower, angular, n - 1.0));
    report.partial_integrals.push_back(
        (report.partial_integrals.empty() ? 0.0 : report.partial_integrals.back()) + seg);
    upper = lower;
  }

  // Least-squares slope of I_j against ln(1/t_j).
  {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = levels;
    for (int j = 0; j < m; ++j) {
      double x = std::log(1.0 / report.cutoffs[static_cast<size_t>(j)]);
      double y = report.partial_integrals[static_cast<size_t>(j)];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double denom = m * sxx - sx * sx;
    report.growth_fit = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
  }

  // Ratio of consecutive increments over the deepest part of the ladder.
  int tail_count = std::min(5, levels - 1);
  double ratio_sum = 0.0;
  for (int j = levels - tail_count; j < levels; ++j)
    ratio_sum += segments[static_cast<size_t>(j)] / segments[static_cast<size_t>(j - 1)];
  double mean_ratio = ratio_sum / tail_count;

  if (mean_ratio >= kDivergeRatio) {
    report.verdict = DivergenceVerdict::Diverges;
  } else if (mean_ratio <= kConvergeRatio) {
    double tail = segments.back() * mean_ratio / (1.0 - mean_ratio);
    report.verdict =
        tail < kCauchyTail ? DivergenceVerdict::Converges : DivergenceVerdict::Inconclusive;
  } else {
    report.verdict = DivergenceVerdict::Inconclusive;
  }
  return report;
}

LogGrowthFit log_growth_fit(const NormalNeighborhood& nbhd, const DomainIndicator& domain,
                            const WeightField& k_field, double delta, int levels,
                            int angular_nodes) {
  const int n = nbhd.metric().dim();
  require(delta > 0.0 && delta <= nbhd.radius_max() * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "log-growth fit needs 0 < delta <= radius_max");
  if (angular_nodes <= 0) angular_nodes = n == 2 ? 256 : 64;
  AngularGrid angular = AngularGrid::build(n, angular_nodes);

  LogGrowthFit fit;
  for (int j = 1; j <= levels; ++j) {
    double r = delta * std::pow(2.0, -j);
    if (r >= 0.3) continue;  // log(1/r) must be safely positive for the ratio
    double sup = 0.0;
    bool any = false;
    for (const auto& node : angular.nodes) {
      Pt x = nbhd.exp(r, node.theta);
      if (!domain.contains(x)) continue;
      any = true;
      sup = std::max(sup, std::min(k_field.eval(x, r), kFieldCap));
    }
    require(any, ErrorCode::EmptyShell, "domain indicator removed the whole sphere");
    fit.radii.push_back(r);
    fit.ratios.push_back(sup / std::log(1.0 / r));
  }
  require(fit.ratios.size() >= 4, ErrorCode::InvalidArgument,
          "log-growth fit needs at least 4 usable dyadic radii below 0.3");

  size_t m = fit.ratios.size();
  double first_half_max = 0.0;
  for (size_t j = 0; j < m / 2; ++j) first_half_max = std::max(first_half_max, fit.ratios[j]);
  double last_step = fit.ratios[m - 1] / std::max(fit.ratios[m - 2], 1e-300);

  fit.is_o_log =
      fit.ratios[m - 1] <= 1.05 * std::max(first_half_max, 1e-12) && last_step <= 1.15;
  fit.constant = *std::max_element(fit.ratios.end() - std::min<size_t>(3, m), fit.ratios.end());
  return fit;
}

}  // namespace ringmod
