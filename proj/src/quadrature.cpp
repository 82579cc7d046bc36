#include "ringmod/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "ringmod/error.hpp"
#include "ringmod/parallel.hpp"

namespace ringmod {

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  require(order >= 1, ErrorCode::InvalidArgument, "quadrature order must be positive");
  nodes.assign(static_cast<size_t>(order), 0.0);
  weights.assign(static_cast<size_t>(order), 0.0);
  // Newton on P_n from the Chebyshev initial guess; symmetric pairs.
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    pp = order * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    nodes[static_cast<size_t>(i)] = -x;
    weights[static_cast<size_t>(i)] = w;
    nodes[static_cast<size_t>(order - 1 - i)] = x;
    weights[static_cast<size_t>(order - 1 - i)] = w;
  }
}

AngularGrid AngularGrid::build(int dim, int resolution) {
  require(dim == 2 || dim == 3, ErrorCode::InvalidArgument, "angular grid dimension must be 2 or 3");
  require(resolution >= 4, ErrorCode::InvalidArgument, "angular resolution too small");
  AngularGrid grid;
  grid.dim = dim;
  grid.resolution = resolution;

  if (dim == 2) {
    grid.nodes.reserve(static_cast<size_t>(resolution));
    for (int j = 0; j < resolution; ++j) {
      Node node;
      node.u[0] = (j + 0.5) * 2.0 * M_PI / resolution;  // offset keeps mask cuts between nodes
      node.weight = 2.0 * M_PI / resolution;
      node.sigma = 1.0;
      node.theta = Vec(std::cos(node.u[0]), std::sin(node.u[0]), 0.0);
      grid.nodes.push_back(node);
    }
    return grid;
  }

  const int n_polar = resolution;
  const int n_azimuth = 2 * resolution;
  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre(n_polar, gl_nodes, gl_weights);
  grid.nodes.reserve(static_cast<size_t>(n_polar * n_azimuth));
  for (int i = 0; i < n_polar; ++i) {
    double polar = (gl_nodes[static_cast<size_t>(i)] + 1.0) * 0.5 * M_PI;
    double w_polar = gl_weights[static_cast<size_t>(i)] * 0.5 * M_PI;
    double sp = std::sin(polar), cp = std::cos(polar);
    for (int j = 0; j < n_azimuth; ++j) {
      Node node;
      node.u[0] = polar;
      node.u[1] = (j + 0.5) * 2.0 * M_PI / n_azimuth;
      node.sigma = sp;
      node.weight = w_polar * sp * 2.0 * M_PI / n_azimuth;
      node.theta = Vec(sp * std::cos(node.u[1]), sp * std::sin(node.u[1]), cp);
      grid.nodes.push_back(node);
    }
  }
  return grid;
}

std::string ShellGrid::resolution_tag() const {
  return std::to_string(shells()) + "x" + std::to_string(angular());
}

ShellGrid ShellGrid::build(const NormalNeighborhood& nbhd, const GeodesicRing& ring,
                           const GridOptions& opts_in) {
  const Metric& metric = nbhd.metric();
  const int n = metric.dim();

  GridOptions opts = opts_in;
  if (opts.radial_panels <= 0) opts.radial_panels = 128;
  if (opts.angular_nodes <= 0) opts.angular_nodes = (n == 2) ? 256 : 64;
  require(opts.radial_order >= 2, ErrorCode::InvalidArgument, "radial order must be >= 2");

  require(ring.eps0 <= nbhd.radius_max() * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "ring outer radius exceeds the neighborhood radius");
  require(ring.eps >= 1e-3 * ring.eps0, ErrorCode::InvalidArgument,
          "ring is too thin: eps must be >= 1e-3 * eps0");

  ShellGrid grid;
  grid.dim_ = n;
  grid.eps_ = ring.eps;
  grid.eps0_ = ring.eps0;
  grid.nbhd_ = nbhd;
  grid.ring_ = ring;
  grid.domain_ = ring.domain;
  grid.opts_ = opts;
  grid.angular_ = AngularGrid::build(n, opts.angular_nodes);

  // Composite Gauss-Legendre radii: `radial_panels` panels of fixed order.
  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre(opts.radial_order, gl_nodes, gl_weights);
  const double panel = (ring.eps0 - ring.eps) / opts.radial_panels;
  for (int pnl = 0; pnl < opts.radial_panels; ++pnl) {
    double a = ring.eps + pnl * panel;
    for (int q = 0; q < opts.radial_order; ++q) {
      grid.radii_.push_back(a + (gl_nodes[static_cast<size_t>(q)] + 1.0) * 0.5 * panel);
      grid.radial_weights_.push_back(gl_weights[static_cast<size_t>(q)] * 0.5 * panel);
    }
  }

  const int n_shells = grid.shells();
  const int n_ang = grid.angular();
  const size_t cells = static_cast<size_t>(n_shells) * static_cast<size_t>(n_ang);
  grid.points_.assign(cells, Pt::Zero());
  grid.area_w_.assign(cells, 0.0);
  grid.volume_w_.assign(cells, 0.0);
  grid.area_density_.assign(cells, 0.0);
  grid.mask_.assign(cells, 0);
  if (opts.store_tangents) {
    grid.radial_vel_.assign(cells, Vec::Zero());
    grid.tangents_.assign(2 * cells, Vec::Zero());
  }

  const double h_ang = metric.has_closed_form_geodesics() ? 1e-5 : 1e-3;

  // One base ray plus 2(n-1) angular-offset rays per node; tangents by
  // central differences in the angular parameters.
  parallel_for(n_ang, opts.threads, [&](int i) {
    const AngularGrid::Node& node = grid.angular_.nodes[static_cast<size_t>(i)];
    std::span<const double> radii(grid.radii_);

    auto states = nbhd.ray(node.theta, radii);
    std::vector<GeodesicState> offsets[4];
    for (int a = 0; a < n - 1; ++a) {
      for (int sgn = 0; sgn < 2; ++sgn) {
        double u[2] = {node.u[0], node.u[1]};
        u[a] += (sgn == 0 ? h_ang : -h_ang);
        Vec theta = direction_from_angles(n, std::span<const double>(u, 2));
        offsets[2 * a + sgn] = nbhd.ray(theta, radii);
      }
    }

    for (int k = 0; k < n_shells; ++k) {
      const size_t idx = static_cast<size_t>(k) * static_cast<size_t>(n_ang) +
                         static_cast<size_t>(i);
      const Pt& x = states[static_cast<size_t>(k)].x;
      grid.points_[idx] = x;
      grid.mask_[idx] = grid.domain_.contains(x) ? 1 : 0;

      Mat g = metric.eval(x);
      Vec tangents[2];
      for (int a = 0; a < n - 1; ++a)
        tangents[a] = (offsets[2 * a][static_cast<size_t>(k)].x -
                       offsets[2 * a + 1][static_cast<size_t>(k)].x) /
                      (2.0 * h_ang);

      double det_area;
      if (n == 2) {
        det_area = tangents[0].dot(g * tangents[0]);
      } else {
        double a00 = tangents[0].dot(g * tangents[0]);
        double a01 = tangents[0].dot(g * tangents[1]);
        double a11 = tangents[1].dot(g * tangents[1]);
        det_area = a00 * a11 - a01 * a01;
      }
      require(det_area > 0.0, ErrorCode::DegenerateTangent,
              "induced sphere metric is degenerate at a grid cell");
      double area_density = std::sqrt(det_area) / node.sigma;

      // Full chart Jacobian of (r, u) -> x for the volume weight.
      const Vec& radial = states[static_cast<size_t>(k)].v;
      Mat jac = Mat::Identity();
      for (int row = 0; row < n; ++row) {
        jac(row, 0) = radial[row];
        for (int a = 0; a < n - 1; ++a) jac(row, 1 + a) = tangents[a][row];
      }
      double det_jac = n == 2 ? jac.topLeftCorner<2, 2>().determinant()
                              : jac.topLeftCorner<3, 3>().determinant();
      double vol_density = metric.volume_element(x) * std::abs(det_jac) / node.sigma;

      grid.area_density_[idx] = area_density;
      grid.area_w_[idx] = area_density * node.weight;
      grid.volume_w_[idx] =
          vol_density * node.weight * grid.radial_weights_[static_cast<size_t>(k)];
      if (opts.store_tangents) {
        grid.radial_vel_[idx] = radial;
        for (int a = 0; a < n - 1; ++a) grid.tangents_[2 * idx + static_cast<size_t>(a)] = tangents[a];
      }
    }
  });

  grid.finalize_totals();
  return grid;
}

void ShellGrid::finalize_totals() {
  shell_area_.assign(static_cast<size_t>(shells()), 0.0);
  ring_volume_ = 0.0;
  for (int k = 0; k < shells(); ++k) {
    double area = 0.0;
    for (int i = 0; i < angular(); ++i) {
      size_t idx = index(k, i);
      if (!mask_[idx]) continue;
      area += area_w_[idx];
      ring_volume_ += volume_w_[idx];
    }
    shell_area_[static_cast<size_t>(k)] = area;
  }
}

double ShellGrid::integrate_sphere(int k, const ScalarField& f) const {
  require(k >= 0 && k < shells(), ErrorCode::InvalidArgument, "shell index out of range");
  double sum = 0.0;
  for (int i = 0; i < angular(); ++i) {
    size_t idx = index(k, i);
    if (!mask_[idx]) continue;
    sum += clamp_field_value(f(points_[idx])) * area_w_[idx];
  }
  return sum;
}

double ShellGrid::integrate_ring(const ScalarField& f) const {
  double sum = 0.0;
  for (int k = 0; k < shells(); ++k)
    for (int i = 0; i < angular(); ++i) {
      size_t idx = index(k, i);
      if (!mask_[idx]) continue;
      sum += clamp_field_value(f(points_[idx])) * volume_w_[idx];
    }
  return sum;
}

ShellGrid ShellGrid::from_raw(const NormalNeighborhood& nbhd, const GeodesicRing& ring,
                              const GridOptions& opts, const AngularGrid& angular,
                              std::vector<double> radii, std::vector<double> radial_weights,
                              std::vector<Pt> points, std::vector<double> area_w,
                              std::vector<double> volume_w, std::vector<double> area_density,
                              std::vector<uint8_t> mask) {
  ShellGrid grid;
  grid.dim_ = nbhd.metric().dim();
  grid.eps_ = ring.eps;
  grid.eps0_ = ring.eps0;
  grid.nbhd_ = nbhd;
  grid.ring_ = ring;
  grid.domain_ = ring.domain;
  grid.opts_ = opts;
  grid.angular_ = angular;
  grid.radii_ = std::move(radii);
  grid.radial_weights_ = std::move(radial_weights);
  grid.points_ = std::move(points);
  grid.area_w_ = std::move(area_w);
  grid.volume_w_ = std::move(volume_w);
  grid.area_density_ = std::move(area_density);
  grid.mask_ = std::move(mask);
  grid.finalize_totals();
  return grid;
}

}  // namespace ringmod
