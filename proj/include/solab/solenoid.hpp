#pragma once

// Suspension solenoids of circle maps. The mapping torus is [0,1] x S^1 with
// (1, x) ~ (0, f(x)), so flowing forward for unit time from the transversal
// T = {0} x S^1 applies f once. Transversal measures are induced from an
// invariant measure of the base map.

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "solab/circle_dynamics.hpp"

namespace solab {

/// Holonomy-invariant measure on the global transversal, stored as the base
/// invariant measure it is induced from.
class TransversalMeasure {
 public:
  enum class Kind { kLebesgue, kCantor, kAtomic };

  /// Lebesgue for a rigid rotation, mu_K for a Denjoy map. Morse-Smale maps
  /// have no canonical measure (use atomic()).
  static TransversalMeasure canonical(const BaseMap& base);
  /// Atoms at fixed points of the base map; any other point is rejected as
  /// non-invariant.
  static TransversalMeasure atomic(const BaseMap& base, std::vector<double> points, std::vector<double> weights);

  Kind kind() const { return kind_; }
  double total() const { return scale_; }
  TransversalMeasure scaled(double c) const;

  /// Measure of an arc of the transversal.
  Measured arc(const Arc& a) const;

  /// Integral of exp(i (phase + freq * v)) over base coordinates y in
  /// [y0, y1), where v = frac(z - origin) and z is the transversal point with
  /// base coordinate y, or its image under the base map when `pushed`.
  std::complex<double> integrate_exp(double origin, double phase, double freq, double y0, double y1, bool pushed) const;

  /// Integral of v = frac(z - origin) over [y0, y1), z as in integrate_exp.
  double integrate_fiber(double origin, double y0, double y1, bool pushed) const;

  /// Integral of fn over transversal points with base coordinate in
  /// [y0, y1). Continuous measures use 3-point Gauss-Legendre on the pieces
  /// where both x and its image depend affinely on the base coordinate,
  /// further split at `breaks`; atomic measures sum over atoms.
  double integrate(const std::function<double(const CirclePoint&)>& fn, double y0, double y1,
                   std::span<const double> breaks = {}) const;

  const std::vector<double>& atom_points() const { return points_; }
  const std::vector<double>& atom_weights() const { return weights_; }
  const BaseMap& base() const { return base_; }

 private:
  explicit TransversalMeasure(BaseMap base) : base_(std::move(base)) {}
  BaseMap base_;
  Kind kind_ = Kind::kLebesgue;
  double scale_ = 1.0;
  std::vector<double> points_, weights_;
};

/// Point of the mapping torus: time in [0,1) over a transversal point.
struct SolenoidPoint {
  double time = 0.0;
  CirclePoint fiber;
};

/// Time interval (a, b) over an arc of the transversal.
struct FlowBox {
  double t0 = 0.0;
  double t1 = 1.0;
  Arc arc{0.0, 1.0};
};

class SuspensionSolenoid {
 public:
  explicit SuspensionSolenoid(BaseMap base) : base_(std::move(base)) {}

  /// The Poincare return map of T, which is the base map itself.
  const BaseMap& return_map() const { return base_; }

  /// Flow for time s (any sign).
  SolenoidPoint flow(const SolenoidPoint& p, double s) const;
  /// R_T^m on the transversal.
  CirclePoint holonomy(const CirclePoint& x, std::int64_t m) const;
  /// Image of an arc of T under R_T^m (base maps are monotone).
  Arc holonomy_arc(const Arc& a, std::int64_t m) const;

 private:
  BaseMap base_;
};

/// Daval measure of a flow box: time length times transversal measure.
double daval_measure(const TransversalMeasure& mu, const FlowBox& box);

/// Fraction of time the leaf through x0 spends in each box over the first
/// n returns (total time n).
std::vector<double> schwartzman_measure_estimate(const SuspensionSolenoid& s, double x0, std::int64_t n,
                                                 const std::vector<FlowBox>& boxes);

struct ErgodicityReport {
  std::vector<std::vector<double>> averages;  // per starting point, per box
  double dispersion = 0.0;                    // max over boxes of (max - min) across starts
  int clusters = 0;                           // greedy clusters of averages at the given radius
  bool uniquely_ergodic_empirical = false;    // dispersion <= radius
};

/// Dispersion of leaf averages across starting points. OpenMP over starts.
ErgodicityReport ergodicity_probe(const SuspensionSolenoid& s, const std::vector<FlowBox>& boxes,
                                  const std::vector<double>& starts, std::int64_t n, double radius);

}  // namespace solab
