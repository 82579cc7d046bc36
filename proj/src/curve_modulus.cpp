#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ringmod/error.hpp"
#include "ringmod/modulus.hpp"

namespace ringmod {

double curve_modulus_flat_annulus(int n, double alpha, double eps, double eps0) {
  require(n == 2 || n == 3, ErrorCode::InvalidArgument, "dimension must be 2 or 3");
  require(std::isfinite(alpha) && alpha > 1.0, ErrorCode::UnsupportedExponent,
          "curve modulus closed form requires alpha > 1");
  require(0.0 < eps && eps < eps0, ErrorCode::InvalidArgument, "need 0 < eps < eps0");

  // Radial extremal density rho(r) ~ r^{(1-n)/(alpha-1)}; Hoelder gives
  //   M = omega_{n-1} * ( int_eps^eps0 r^{(n-1)/(1-alpha)} dr )^{1-alpha}.
  const double omega = n == 2 ? 2.0 * M_PI : 4.0 * M_PI;
  const double m = (n - 1.0) / (1.0 - alpha);
  double inner;
  if (std::abs(m + 1.0) < 1e-14)
    inner = std::log(eps0 / eps);
  else
    inner = (std::pow(eps0, m + 1.0) - std::pow(eps, m + 1.0)) / (m + 1.0);
  return omega * std::pow(inner, 1.0 - alpha);
}

namespace {

// Sparse admissibility row: one polygonal curve crossing a list of cells.
struct CurveRow {
  std::vector<int> cells;
  std::vector<double> lengths;
};

struct DiscreteProblem {
  std::vector<double> cell_volume;
  std::vector<CurveRow> rows;
};

// Polar cell grid on the annulus with radial curves (one per angular column)
// plus clockwise and counterclockwise spiral polylines.
DiscreteProblem build_problem(int n, double eps, double eps0, int radial_cells,
                              int angular_cells) {
  DiscreteProblem prob;
  const double dr = (eps0 - eps) / radial_cells;

  if (n == 2) {
    const int m_ang = angular_cells;
    const double dphi = 2.0 * M_PI / m_ang;
    prob.cell_volume.assign(static_cast<size_t>(radial_cells * m_ang), 0.0);
    auto cell = [&](int k, int j) { return k * m_ang + ((j % m_ang) + m_ang) % m_ang; };
    for (int k = 0; k < radial_cells; ++k) {
      double r0 = eps + k * dr, r1 = r0 + dr;
      double vol = dphi * 0.5 * (r1 * r1 - r0 * r0);
      for (int j = 0; j < m_ang; ++j)
        prob.cell_volume[static_cast<size_t>(cell(k, j))] = vol;
    }
    for (int j = 0; j < m_ang; ++j) {
      CurveRow radial;
      for (int k = 0; k < radial_cells; ++k) {
        radial.cells.push_back(cell(k, j));
        radial.lengths.push_back(dr);
      }
      prob.rows.push_back(std::move(radial));
      for (int drift : {1, -1}) {
        CurveRow spiral;
        for (int k = 0; k < radial_cells; ++k) {
          double rbar = eps + (k + 0.5) * dr;
          spiral.cells.push_back(cell(k, j + drift * k));
          spiral.lengths.push_back(std::sqrt(dr * dr + rbar * dphi * rbar * dphi));
        }
        prob.rows.push_back(std::move(spiral));
      }
    }
    return prob;
  }

  const int m_pol = std::max(4, angular_cells / 2);
  const int m_az = angular_cells;
  const double dth = M_PI / m_pol;
  const double dphi = 2.0 * M_PI / m_az;
  prob.cell_volume.assign(static_cast<size_t>(radial_cells * m_pol * m_az), 0.0);
  auto cell = [&](int k, int i, int j) {
    return (k * m_pol + i) * m_az + ((j % m_az) + m_az) % m_az;
  };
  for (int k = 0; k < radial_cells; ++k) {
    double r0 = eps + k * dr, r1 = r0 + dr;
    double rad = (r1 * r1 * r1 - r0 * r0 * r0) / 3.0;
    for (int i = 0; i < m_pol; ++i) {
      double vol = rad * (std::cos(i * dth) - std::cos((i + 1) * dth)) * dphi;
      for (int j = 0; j < m_az; ++j) prob.cell_volume[static_cast<size_t>(cell(k, i, j))] = vol;
    }
  }
  for (int i = 0; i < m_pol; ++i) {
    double sin_th = std::sin((i + 0.5) * dth);
    for (int j = 0; j < m_az; ++j) {
      CurveRow radial;
      for (int k = 0; k < radial_cells; ++k) {
        radial.cells.push_back(cell(k, i, j));
        radial.lengths.push_back(dr);
      }
      prob.rows.push_back(std::move(radial));
      for (int drift : {1, -1}) {
        CurveRow spiral;
        for (int k = 0; k < radial_cells; ++k) {
          double rbar = eps + (k + 0.5) * dr;
          double arc = rbar * sin_th * dphi;
          spiral.cells.push_back(cell(k, i, j + drift * k));
          spiral.lengths.push_back(std::sqrt(dr * dr + arc * arc));
        }
        prob.rows.push_back(std::move(spiral));
      }
    }
  }
  return prob;
}

}  // namespace

// Lagrangian dual ascent: for multipliers mu >= 0 over admissibility rows,
//   rho_c(mu) = ((L^T mu)_c / (alpha v_c))^{1/(alpha-1)}
// maximizes the dual; the row-wise scaled primal density certifies an upper
// bound, and the run stops when the relative duality gap closes.
CurveModulusBrute curve_modulus_flat_annulus_bruteforce(int n, double alpha, double eps,
                                                        double eps0, int radial_cells,
                                                        int angular_cells, int max_iters,
                                                        double rel_gap_tol) {
  require(alpha > 1.0, ErrorCode::UnsupportedExponent, "brute-force oracle requires alpha > 1");
  require(radial_cells >= 4 && angular_cells >= 8, ErrorCode::InvalidArgument,
          "brute-force grid too coarse");
  DiscreteProblem prob = build_problem(n, eps, eps0, radial_cells, angular_cells);
  const size_t n_cells = prob.cell_volume.size();
  const size_t n_rows = prob.rows.size();
  const double expo = 1.0 / (alpha - 1.0);

  std::vector<double> mu(n_rows, 1.0);
  std::vector<double> lt_mu(n_cells), rho(n_cells), row_len(n_rows), grad(n_rows);

  auto eval_dual = [&]() {
    std::fill(lt_mu.begin(), lt_mu.end(), 0.0);
    for (size_t g = 0; g < n_rows; ++g) {
      const CurveRow& row = prob.rows[g];
      for (size_t t = 0; t < row.cells.size(); ++t)
        lt_mu[static_cast<size_t>(row.cells[t])] += mu[g] * row.lengths[t];
    }
    double energy = 0.0;
    for (size_t c = 0; c < n_cells; ++c) {
      rho[c] = std::pow(lt_mu[c] / (alpha * prob.cell_volume[c]), expo);
      energy += prob.cell_volume[c] * std::pow(rho[c], alpha);
    }
    double dual = (1.0 - alpha) * energy;
    for (size_t g = 0; g < n_rows; ++g) {
      const CurveRow& row = prob.rows[g];
      double len = 0.0;
      for (size_t t = 0; t < row.cells.size(); ++t)
        len += rho[static_cast<size_t>(row.cells[t])] * row.lengths[t];
      row_len[g] = len;
      grad[g] = 1.0 - len;
      dual += mu[g];
    }
    return std::make_pair(dual, energy);
  };

  CurveModulusBrute out;
  double best_primal = std::numeric_limits<double>::infinity();
  double best_dual = -std::numeric_limits<double>::infinity();
  double step = 1.0;
  auto [dual, energy] = eval_dual();

  int iter = 0;
  for (; iter < max_iters; ++iter) {
    double min_len = *std::min_element(row_len.begin(), row_len.end());
    if (min_len > 0.0) {
      double primal = energy / std::pow(min_len, alpha);
      best_primal = std::min(best_primal, primal);
    }
    best_dual = std::max(best_dual, dual);
    double gap = (best_primal - best_dual) / std::max(best_primal, 1e-300);
    if (gap <= rel_gap_tol) break;

    std::vector<double> mu_save = mu;
    for (size_t g = 0; g < n_rows; ++g) mu[g] = std::max(0.0, mu[g] + step * grad[g]);
    auto [dual_new, energy_new] = eval_dual();
    if (dual_new >= dual) {
      dual = dual_new;
      energy = energy_new;
      step *= 1.25;
    } else {
      mu.swap(mu_save);
      step *= 0.5;
      auto restored = eval_dual();
      dual = restored.first;
      energy = restored.second;
      if (step < 1e-14) break;
    }
  }

  require(std::isfinite(best_primal) && best_dual > 0.0, ErrorCode::SolverNotConverged,
          "curve-modulus dual ascent failed to produce certificates");
  out.value = best_primal;
  out.dual_bound = best_dual;
  out.gap = (best_primal - best_dual) / best_primal;
  out.iterations = iter;
  return out;
}

}  // namespace ringmod
