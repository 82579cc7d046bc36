#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ringmod/normal.hpp"

namespace ringmod {

// Scalar field on chart points. Values are clamped to +-1e12 inside the
// integration routines (admissible densities may be extended by infinity).
using ScalarField = std::function<double(const Pt&)>;

constexpr double kFieldCap = 1e12;

inline double clamp_field_value(double v) {
  if (v > kFieldCap) return kFieldCap;
  if (v < -kFieldCap) return -kFieldCap;
  return v;
}

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

// Quadrature nodes on the direction sphere S^{n-1}. Weights carry the flat
// angular density, so they sum to 2*pi (n=2) or 4*pi (n=3).
//   n=2: uniform midpoint rule in angle (spectrally accurate, periodic).
//   n=3: Gauss-Legendre in the polar angle x uniform midpoint in azimuth.
struct AngularGrid {
  struct Node {
    Vec theta = Vec::Zero();
    double weight = 0.0;
    double u[2] = {0.0, 0.0};  // angular parameters
    double sigma = 1.0;        // flat angular density at u
  };

  int dim = 0;
  int resolution = 0;  // node count (n=2) or polar count (n=3, azimuth = 2x)
  std::vector<Node> nodes;

  static AngularGrid build(int dim, int resolution);
};

struct GridOptions {
  int radial_panels = 0;  // 0 = default (128)
  int angular_nodes = 0;  // 0 = default (256 for n=2, 64 polar for n=3)
  int radial_order = 4;
  int threads = 1;
  bool store_tangents = false;  // keep per-cell frame vectors (push-forward needs them)
};

// Discretized geodesic ring: tensor grid of radial quadrature nodes and
// angular nodes, with per-cell g-area and g-volume weights and the domain
// mask sampled at cell centers. Area weights come from the induced metric on
// each sphere; volume weights come from the full chart Jacobian of the
// geodesic polar map, so ring integrals agree with iterated sphere integrals
// only up to quadrature error (a real consistency check, not an identity).
class ShellGrid {
 public:
  static ShellGrid build(const NormalNeighborhood& nbhd, const GeodesicRing& ring,
                         const GridOptions& opts = {});

  int dim() const { return dim_; }
  int shells() const { return static_cast<int>(radii_.size()); }
  int angular() const { return static_cast<int>(angular_.nodes.size()); }
  double eps() const { return eps_; }
  double eps0() const { return eps0_; }
  double radius(int k) const { return radii_[static_cast<size_t>(k)]; }
  double radial_weight(int k) const { return radial_weights_[static_cast<size_t>(k)]; }
  const NormalNeighborhood& neighborhood() const { return nbhd_; }
  const DomainIndicator& domain() const { return domain_; }
  const AngularGrid& angular_grid() const { return angular_; }
  const GridOptions& options() const { return opts_; }
  std::string resolution_tag() const;

  const Pt& point(int k, int i) const { return points_[index(k, i)]; }
  bool inside(int k, int i) const { return mask_[index(k, i)] != 0; }
  double area_weight(int k, int i) const { return area_w_[index(k, i)]; }
  double volume_weight(int k, int i) const { return volume_w_[index(k, i)]; }
  double area_density(int k, int i) const { return area_density_[index(k, i)]; }

  // Masked totals.
  double shell_area(int k) const { return shell_area_[static_cast<size_t>(k)]; }
  double ring_volume() const { return ring_volume_; }

  // Per-cell frame vectors, present when built with store_tangents.
  bool has_tangents() const { return !radial_vel_.empty(); }
  const Vec& radial_velocity(int k, int i) const { return radial_vel_[index(k, i)]; }
  const Vec& angular_tangent(int k, int i, int a) const {
    return tangents_[2 * index(k, i) + static_cast<size_t>(a)];
  }

  // Sum of f * dA over shell k (mask applied, values clamped).
  double integrate_sphere(int k, const ScalarField& f) const;
  // Sum of f * dV over all cells (mask applied, values clamped).
  double integrate_ring(const ScalarField& f) const;

  // Grid with the same combinatorics whose geometry was produced elsewhere
  // (e.g. pushed forward through a map); used by the mapping module.
  static ShellGrid from_raw(const NormalNeighborhood& nbhd, const GeodesicRing& ring,
                            const GridOptions& opts, const AngularGrid& angular,
                            std::vector<double> radii, std::vector<double> radial_weights,
                            std::vector<Pt> points, std::vector<double> area_w,
                            std::vector<double> volume_w, std::vector<double> area_density,
                            std::vector<uint8_t> mask);

 private:
  ShellGrid() : ring_(1.0, 2.0) {}

  size_t index(int k, int i) const {
    return static_cast<size_t>(k) * static_cast<size_t>(angular()) + static_cast<size_t>(i);
  }
  void finalize_totals();

  int dim_ = 0;
  double eps_ = 0.0, eps0_ = 0.0;
  NormalNeighborhood nbhd_;
  GeodesicRing ring_;
  DomainIndicator domain_;
  AngularGrid angular_;
  GridOptions opts_;
  std::vector<double> radii_;
  std::vector<double> radial_weights_;
  std::vector<Pt> points_;
  std::vector<double> area_w_;
  std::vector<double> volume_w_;
  std::vector<double> area_density_;
  std::vector<uint8_t> mask_;
  std::vector<Vec> radial_vel_;
  std::vector<Vec> tangents_;  // 2 slots per cell; slot 1 unused for n=2
  std::vector<double> shell_area_;
  double ring_volume_ = 0.0;
};

}  // namespace ringmod
