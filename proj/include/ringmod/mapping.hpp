#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ringmod/modulus.hpp"

namespace ringmod {

// Homeomorphism between charts in local coordinates, with source and target
// metrics. Catalog maps carry analytic differentials; symbolic and
// function-backed maps fall back to Richardson-extrapolated differences.
class MapModel {
 public:
  static MapModel identity(Metric source, Metric target);
  static MapModel linear(Metric source, Metric target, const Mat& a);
  // x -> |x|^{k-1} x (k >= 1; k = 2 doubles the radial stretch rate)
  static MapModel radial_stretch(Metric source, Metric target, double k);
  static MapModel symbolic(Metric source, Metric target, std::vector<Expr> components);
  static MapModel from_functions(Metric source, Metric target,
                                 std::function<Pt(const Pt&)> forward,
                                 std::function<Mat(const Pt&)> jacobian,  // may be null
                                 std::string description);

  const Metric& source() const { return source_; }
  const Metric& target() const { return target_; }
  const std::string& description() const { return description_; }

  Pt forward(const Pt& x) const;

  bool has_analytic_jacobian() const;
  Mat jacobian_analytic(const Pt& x) const;
  // Central differences with steps h and h/2, Richardson-combined; throws
  // NotDifferentiable when the two estimates disagree by more than 10%.
  Mat jacobian_fd(const Pt& x) const;
  Mat jacobian(const Pt& x) const;

 private:
  MapModel() = default;

  enum class Kind { Identity, Linear, RadialStretch, Symbolic, Function };
  Kind kind_ = Kind::Identity;
  Metric source_, target_;
  Mat matrix_ = Mat::Identity();
  double stretch_ = 1.0;
  std::vector<Expr> components_;
  std::function<Pt(const Pt&)> forward_;
  std::function<Mat(const Pt&)> jacobian_;
  std::string description_;
};

// Pointwise dilatation data: L and l are the extreme metric-normalized
// singular values of the differential, J the volume distortion, and
//   K_p = L^p / J  when J != 0;  1 when L = 0;  infinity otherwise.
struct DilatationSample {
  Pt point = Pt::Zero();
  double big_l = 0.0;
  double small_l = 0.0;
  double jacobian = 0.0;
  double k_p = 0.0;

  bool finitely_bilipschitz() const {
    return small_l > 0.0 && big_l >= small_l && std::isfinite(big_l);
  }
};

DilatationSample dilatation_at(const MapModel& map, const Pt& point, const ExponentSet& exps,
                               bool use_finite_differences = false);

// Lipschitz / bilipschitz / finitely-bilipschitz classification on a
// geodesic ball or ring (eps = 0 includes the center point). Estimates come
// from pairwise distance quotients: neighbor pairs on the sample grid plus
// 1000 seeded long-range pairs.
struct ClassifyReport {
  bool lipschitz = false;
  double lip_estimate = 0.0;  // max sampled quotient
  bool bilipschitz = false;
  double lstar_estimate = 0.0;  // min sampled quotient
  bool finitely_bilipschitz = false;
  std::vector<Pt> failures;  // points where 0 < l <= L < infinity fails
  int samples = 0;
};

ClassifyReport classify_map(const MapModel& map, const NormalNeighborhood& nbhd, double eps,
                            double eps0, int resolution = 16, std::uint64_t seed = 0x5eed);

// Numeric check of the lower-Q-homeomorphism inequality with Q = K_p(., f):
// rhs is the radial lower-bound integral of the source family, lhs the
// convex-oracle modulus of the pushed-forward family.
struct Theorem2Report {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double gap = 0.0;  // (lhs - rhs) / rhs
  bool kp_unbounded = false;
  bool finitely_bilipschitz = false;
};

Theorem2Report verify_theorem2(const MapModel& map, const NormalNeighborhood& source_nbhd,
                               const GeodesicRing& ring, const ExponentSet& exps,
                               const GridOptions& opts = {});

// Push the grid through the map: image points, image-surface area weights
// from the composed parametrization in the target metric, image volume
// weights from the composed chart Jacobian. The source grid must be built
// with store_tangents. Throws ImageLeftChart when f leaves the target chart.
ShellGrid push_forward_grid(const ShellGrid& source, const MapModel& map);

// K_p(., f) as a weight field (values may be infinite; integration clamps).
WeightField dilatation_weight(const MapModel& map, const ExponentSet& exps,
                              bool use_finite_differences = false);

}  // namespace ringmod
