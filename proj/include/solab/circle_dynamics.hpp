#pragma once

// Base circle dynamics: rigid rotations, Denjoy counterexamples built from a
// gap schedule inserted along a rotation orbit, and Morse-Smale maps with
// finitely many fixed points.
//
// Circle coordinates are in [0,1). A Denjoy map lives on the "new" circle
// obtained by inserting a gap I_n of length l_n/(1+L) at every orbit point
// {n alpha} of the base circle; Psi is the monotone map from the base circle
// into the new circle, pi = Psi^{-1} collapses the gaps.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "solab/vec.hpp"

namespace solab {

/// Continued-fraction convergent p/q.
struct Convergent {
  std::int64_t p = 0;
  std::int64_t q = 1;
};

class RotationNumber {
 public:
  explicit RotationNumber(double value);
  /// [0; a1, a2, ...], terms must be >= 1.
  static RotationNumber from_continued_fraction(std::span<const int> terms);
  static RotationNumber golden();

  double value() const { return value_; }
  const std::vector<Convergent>& convergents() const { return convergents_; }
  /// Continued fraction did not terminate before denominators reached 1e8,
  /// and no convergent with q <= 1e6 lies within 1e-14 of the value.
  bool irrational_to_precision() const { return irrational_; }
  /// Every stored convergent satisfies |value - p/q| > 1/q^3 (beyond q = 1).
  bool well_approximable_flag() const { return diophantine_flag_; }

 private:
  double value_ = 0;
  std::vector<Convergent> convergents_;
  bool irrational_ = false;
  bool diophantine_flag_ = false;
};

/// Gap lengths l_n = c / (1 + n^2), n in Z, truncated at |n| <= n_max.
struct GapSchedule {
  double constant = default_constant();
  std::int64_t n_max = 100000;
  double tolerance = 1e-5;

  /// The constant making the total gap length L equal to 1.
  static double default_constant();
  double length(std::int64_t n) const { return constant / (1.0 + static_cast<double>(n) * static_cast<double>(n)); }
  /// L = sum over all n of l_n = c pi coth(pi).
  double total() const;
  /// sum over |n| > n_max of l_n, bounded in closed form by 2c(pi/2 - atan(n_max)).
  double tail_bound() const;
};

/// A point of a circle in orbit-stable form. For a Denjoy map `base` is the
/// semiconjugacy coordinate pi(x); points inside gap I_n carry the gap index
/// and the normalized position u in [0,1] across the gap. For the other maps
/// `base` is the circle coordinate itself and `gap` is unset.
struct CirclePoint {
  double base = 0.0;
  std::optional<std::int64_t> gap;
  double u = 0.0;
};

/// Value with a rigorous error radius.
struct Measured {
  double value = 0.0;
  double error = 0.0;
};

/// Arc of the circle from `start` going counterclockwise for `length` in [0,1].
struct Arc {
  double start = 0.0;
  double length = 0.0;
  bool contains(double x) const;
};

class RigidRotation {
 public:
  explicit RigidRotation(double alpha);
  double alpha() const { return alpha_; }
  CirclePoint step(const CirclePoint& p) const;
  CirclePoint step_back(const CirclePoint& p) const;
  double position(const CirclePoint& p) const { return p.base; }
  CirclePoint locate(double x) const;
  /// Lift displacement window start: displacements are taken mod 1 into [w, w+1).
  double displacement_window() const { return 0.0; }

 private:
  double alpha_;
};

class DenjoyMap {
 public:
  /// Throws ConstructionError when the tail bound exceeds the schedule
  /// tolerance or alpha is not irrational to working precision.
  DenjoyMap(const RotationNumber& alpha, const GapSchedule& gaps);

  double alpha() const { return alpha_; }
  const RotationNumber& rotation_number() const { return rotation_; }
  const GapSchedule& gaps() const { return gaps_; }
  /// Uniform error radius of positions in the new circle due to truncation.
  double position_error() const { return tail_ / (1.0 + total_); }

  /// Psi: base circle -> new circle (value at base y, the left limit at gaps).
  double psi(double y) const;
  /// Lift of Psi to R -> R.
  double psi_lift(double y) const;
  /// pi: new circle -> base circle (collapses each gap to its orbit point).
  double semiconjugacy(double x) const;
  double semiconjugacy_lift(double x) const;

  /// Gap I_n as an arc of the new circle.
  Arc gap(std::int64_t n) const;

  CirclePoint locate(double x) const;
  double position(const CirclePoint& p) const;
  CirclePoint step(const CirclePoint& p) const;
  CirclePoint step_back(const CirclePoint& p) const;
  double displacement_window() const { return 0.0; }

  /// h and h^{-1} on the new circle.
  double apply(double x) const { return position(step(locate(x))); }
  double apply_inverse(double x) const { return position(step_back(locate(x))); }

  /// Monotone C^1 cubic carrying I_n onto I_{n+1} in normalized coordinates;
  /// slopes at the ends make h' = 1 there.
  double gap_transfer(std::int64_t n, double u) const;
  double gap_transfer_inverse(std::int64_t n, double u) const;

  /// Calls fn(ya, yb, za, slope) for the pieces of [y0, y1) (y1 - y0 <= 1)
  /// on which the lift of Psi is affine: psi_lift(y) = za + slope (y - ya).
  void for_each_affine_piece(double y0, double y1, const std::function<void(double, double, double, double)>& fn) const;

  /// Number of tabulated orbit points (2 n_max + 1).
  std::size_t orbit_size() const { return sorted_base_.size(); }
  /// Distance from y to the nearest tabulated orbit point.
  double distance_to_orbit(double y) const;

 private:
  std::size_t rank_below(double y) const;  // # tabulated orbit points < y
  double orbit_point(std::int64_t n) const;

  RotationNumber rotation_;
  GapSchedule gaps_;
  double alpha_;
  double total_;
  double tail_;
  double spread_ = 0.0;  // untabulated gap mass, spread uniformly
  double scale_;  // 1/(1+L)
  std::vector<double> sorted_base_;          // sorted {n alpha}
  std::vector<std::int64_t> sorted_index_;   // n for each sorted entry
  std::vector<double> prefix_;               // prefix_[k] = sum of lengths of the first k entries
  std::vector<std::uint32_t> rank_of_;       // rank_of_[n + n_max]
};

using DenjoyRef = std::shared_ptr<const DenjoyMap>;

DenjoyRef denjoy_build(const RotationNumber& alpha, const GapSchedule& gaps);

/// f(x) = x + amplitude/(2 pi k) sin(2 pi k (x - phase)): fixed points at
/// phase + j/(2k), repelling for even j and attracting for odd j.
class MorseSmaleMap {
 public:
  MorseSmaleMap(int attractors, double amplitude = 0.5, double phase = 0.0);
  CirclePoint step(const CirclePoint& p) const;
  CirclePoint step_back(const CirclePoint& p) const;
  double position(const CirclePoint& p) const { return p.base; }
  CirclePoint locate(double x) const;
  double displacement_window() const { return -0.5; }

  double lift(double x) const;
  double lift_inverse(double x) const;
  std::vector<double> fixed_points() const;
  std::vector<double> attractors() const;
  std::vector<double> repellers() const;
  int attractor_count() const { return k_; }

 private:
  int k_;
  double amplitude_;
  double phase_;
};

/// One of the supported base maps.
class BaseMap {
 public:
  using Variant = std::variant<RigidRotation, DenjoyRef, MorseSmaleMap>;
  BaseMap(RigidRotation r) : v_(std::move(r)) {}
  BaseMap(DenjoyRef d) : v_(std::move(d)) {}
  BaseMap(MorseSmaleMap m) : v_(std::move(m)) {}

  const Variant& variant() const { return v_; }
  const DenjoyMap* denjoy() const;
  const char* name() const;

  CirclePoint step(const CirclePoint& p) const;
  CirclePoint step_back(const CirclePoint& p) const;
  double position(const CirclePoint& p) const;
  CirclePoint locate(double x) const;
  double displacement_window() const;
  /// Lift displacement between a point and its image.
  double lift_displacement(const CirclePoint& from, const CirclePoint& to) const;
  double apply(double x) const { return position(step(locate(x))); }

 private:
  Variant v_;
};

/// Partition of the Cantor set into arcs K_i = K cap Psi([c_i, c_{i+1})) in
/// cyclic order.
struct CantorPartition {
  std::vector<double> base_bounds;      // c_1 < ... < c_r, c_1 + 1 (r + 1 entries, unwrapped)
  std::vector<double> position_bounds;  // Psi(c_i), same layout (unwrapped)
  std::vector<double> weights;          // lambda_i

  std::size_t size() const { return weights.size(); }
  double start_position() const { return position_bounds.front(); }
  /// Branch of a point by its semiconjugacy coordinate.
  std::size_t branch_of_base(double y) const;
  /// Branch of a point of the new circle.
  std::size_t branch_of_position(double x) const;
  /// Position measured from the partition start, in [0,1).
  double fiber_coordinate(double x) const;
  /// Arc of the new circle spanned by branch i.
  Arc branch_arc(std::size_t i) const;
};

/// mu_K(arc) = Lebesgue(pi(arc)); the error covers truncation.
Measured invariant_measure_arc(const DenjoyMap& map, const Arc& arc);

/// Boundaries are Psi-images of base points off the tabulated orbit, so
/// mu_K(K_i) = lambda_i exactly.
CantorPartition partition_by_weights(const DenjoyMap& map, std::span<const double> weights, int max_retries = 16);

/// (h^N(x0) - x0)/N on the lift.
double rotation_number_estimate(const BaseMap& map, double x0, std::int64_t n);

/// Largest value of N |estimate_N - rho| over N = 1..n_max along one orbit.
/// The circle-homeomorphism bound guarantees this stays below 1.
double rotation_bound_ratio(const BaseMap& map, double x0, std::int64_t n_max, double rho);

/// Piecewise-constant vector observable on the new circle: value[i] on
/// [breaks[i], breaks[i+1]) with the last piece wrapping to breaks[0] + 1.
struct StepObservable {
  std::vector<double> breaks;
  std::vector<Vec> values;

  static StepObservable constant(const Vec& c);
  static StepObservable arc_indicator(const Arc& arc);
  /// Indicator vector of the partition branches (component i = 1 on K_i).
  static StepObservable partition_indicator(const CantorPartition& part);

  Vec operator()(double x) const;
  int dim() const { return values.front().dim(); }
};

/// (1/N) sum_{k<N} obs(h^k x0).
Vec birkhoff_average(const BaseMap& map, const StepObservable& obs, double x0, std::int64_t n);

struct BirkhoffSweep {
  std::vector<Vec> averages;  // one per starting point
  Vec mean;
  /// max over starts and components of |average - reference|.
  double worst_deviation(const Vec& reference) const;
};

/// Averages from many starting points; OpenMP over starts.
BirkhoffSweep birkhoff_sweep(const BaseMap& map, const StepObservable& obs, std::span<const double> starts, std::int64_t n);
/// Serial reference of birkhoff_sweep.
BirkhoffSweep birkhoff_sweep_serial(const BaseMap& map, const StepObservable& obs, std::span<const double> starts, std::int64_t n);

/// Points of the Cantor set K: Psi of equally spaced base points shifted off the orbit.
std::vector<double> sample_cantor_points(const DenjoyMap& map, int count, double offset = 0.123456789);

}  // namespace solab
