#pragma once

#include <string>
#include <vector>

#include "ringmod/modulus.hpp"

namespace ringmod {

enum class DivergenceVerdict { Diverges, Converges, Inconclusive };

const char* divergence_verdict_name(DivergenceVerdict v);

// Evidence for the boundary divergence condition
//   int_0^delta dr / ||K||_{n-1}(P0, r) = infinity
// collected along a decreasing ladder of lower cutoffs t_j.
struct DivergenceReport {
  Pt center = Pt::Zero();
  double delta = 0.0;
  std::vector<double> cutoffs;            // t_j, decreasing
  std::vector<double> shell_norms;        // ||K||_{n-1}(P0, t_j)
  std::vector<double> partial_integrals;  // I_j over (t_j, delta), nondecreasing
  DivergenceVerdict verdict = DivergenceVerdict::Inconclusive;
  double growth_fit = 0.0;  // least-squares slope of I_j against ln(1/t_j)
};

// ||K||_{n-1}(P0, r) over D n S(P0, r): the L^{n-1} sphere norm from the
// boundary-extension condition (exponent n-1, not the modulus s).
double boundary_sphere_norm(const NormalNeighborhood& nbhd, const DomainIndicator& domain,
                            const WeightField& k_field, double r, int angular_nodes = 0);

// Tail integrals along the dyadic ladder t_j = delta * 2^{-j}, j = 1..levels.
// Divergence is undecidable from finitely many samples; the verdict is an
// explicit heuristic: geometric increment decay with a tiny projected tail
// reads as convergent, non-summable decay as divergent, anything else as
// inconclusive.
DivergenceReport divergence_check(const NormalNeighborhood& nbhd, const DomainIndicator& domain,
                                  const WeightField& k_field, double delta, int levels = 20,
                                  int angular_nodes = 0, int radial_panels_per_segment = 8);

struct LogGrowthFit {
  bool is_o_log = false;
  double constant = 0.0;  // bound on sup K / log(1/r) over the sampled radii
  std::vector<double> radii;
  std::vector<double> ratios;
};

// Fits sup of K on shells against log(1/r) over the dyadic radii
// r = delta * 2^{-j}: the K(P,f) = O(log 1/r) sufficient condition.
LogGrowthFit log_growth_fit(const NormalNeighborhood& nbhd, const DomainIndicator& domain,
                            const WeightField& k_field, double delta, int levels = 20,
                            int angular_nodes = 0);

}  // namespace ringmod
