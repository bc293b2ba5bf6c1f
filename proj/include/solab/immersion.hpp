#pragma once

// Realization of real homology classes of T^n by measured solenoids.
//
// Every leaf passes once per return through a base box B at p0. Over the
// return starting at transversal point x the leaf first runs along the loop
// of its branch i(x), translated by delta * v(x) * nu (v = fiber coordinate),
// from A = p0 + b e1 to p0 + C_i, and then spends the last `window` of time
// inside B moving from fiber offset v(x) to v(f(x)) with the isotopy profile
// rho(t) = 1 - smoothstep(t / window).

#include <memory>
#include <string>
#include <vector>

#include "solab/circle_dynamics.hpp"
#include "solab/solenoid.hpp"
#include "solab/torus_homology.hpp"

namespace solab {

/// Integer classes of the cycles loops are drawn in. The default library is
/// the lattice basis.
struct CycleLibrary {
  std::vector<HomologyVector> classes;

  static CycleLibrary standard(int n);
  int dim() const { return classes.front().dim(); }
};

struct ImmersionLayout {
  Vec base_point{0.1, 0.1};    // p0; its dimension sets n
  double box_length = 0.05;    // b, length of B along e1
  double ribbon_width = 0.01;  // delta
  double window = 0.1;         // time spent in B per return (c)
  double lane_spacing = 0.05;  // spacing of branch-specific spur lengths and levels
  int window_samples = 6;      // PL segments per passage through B

  void validate(int branches) const;
};

/// One branch: its (signed) class and the loop core drawn from A to p0 + C.
struct Branch {
  HomologyVector cls;
  int library_index = 0;
  int orientation = 1;        // -1 when the library cycle was reversed
  std::vector<Vec> core;      // vertices relative to p0: core.front() = b e1, core.back() = C
  double core_length = 0.0;
};

/// Positive decomposition a = scale * sum_i lambda_i C_i over the library.
struct Decomposition {
  std::vector<double> coefficients;  // signed coefficients over the library classes
  std::vector<double> weights;       // lambda_i of the kept branches, sum 1
  std::vector<int> branch_library_index;
  std::vector<int> orientation;
  double scale = 1.0;
};

Decomposition decompose(const HomologyVector& a, const CycleLibrary& library);

class ImmersedSolenoid {
 public:
  ImmersedSolenoid(BaseMap base, TransversalMeasure measure, CantorPartition partition, std::vector<Branch> branches,
                   ImmersionLayout layout);

  int dim() const { return layout_.base_point.dim(); }
  /// Embed mode: n >= 3, loops pairwise disjoint outside B.
  bool embedded() const { return dim() >= 3; }

  const BaseMap& base() const { return base_; }
  const SuspensionSolenoid& suspension() const { return suspension_; }
  const TransversalMeasure& measure() const { return measure_; }
  const CantorPartition& partition() const { return partition_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const ImmersionLayout& layout() const { return layout_; }
  const Decomposition& decomposition() const { return decomposition_; }
  void set_decomposition(Decomposition d) { decomposition_ = std::move(d); }

  /// Same geometry with another invariant measure of the same base map.
  ImmersedSolenoid with_measure(TransversalMeasure mu) const;
  /// Same solenoid with the immersion translated by v.
  ImmersedSolenoid translated(const Vec& v) const;

  std::size_t branch_of(const CirclePoint& x) const;
  /// Fiber coordinate v in [0,1) of a transversal point.
  double fiber(const CirclePoint& x) const;
  /// Ribbon offset delta * v * nu.
  Vec offset(double v) const;
  /// Unit normal used for ribbon offsets, and the out-of-plane direction in embed mode.
  const Vec& normal() const { return nu_; }
  const Vec& binormal() const { return mu_; }
  /// Measure of the transversal arc K_i.
  double branch_measure(std::size_t i) const;
  /// Loop start A = p0 + b e1.
  Vec loop_start() const;

  /// Position of the B passage at window time tau in [0, window], between
  /// fiber offsets v_from and v_to, relative to p0 (plus the lattice shift).
  Vec window_point(double tau, double v_from, double v_to) const;

  /// sum_i mu(K_i) C_i, the current predicted by the construction.
  HomologyVector predicted_current() const;

  /// Sampled minimal distance between cores of different branches outside
  /// the trapping box (the corridor holding B and the spurs).
  double branch_separation() const;
  /// Whether a point (relative to p0, any lift) lies in the trapping box.
  bool in_trapping_box(const Vec& rel) const;

 private:
  BaseMap base_;
  SuspensionSolenoid suspension_;
  TransversalMeasure measure_;
  CantorPartition partition_;
  std::vector<Branch> branches_;
  ImmersionLayout layout_;
  Decomposition decomposition_;
  Vec nu_, mu_;
};

using SolenoidRef = std::shared_ptr<const ImmersedSolenoid>;

/// Loop core for class C in lane i of r (vertices relative to p0).
std::vector<Vec> staircase_loop(const HomologyVector& c, int lane, int lanes, const ImmersionLayout& layout);

/// Builds the branches for the given classes in lanes 0..r-1.
std::vector<Branch> build_branches(const std::vector<HomologyVector>& classes, const ImmersionLayout& layout);

/// Realizes a by a measured Denjoy solenoid: decomposition over the library,
/// partition by the weights, measure mu_K scaled so the current is a.
ImmersedSolenoid realize(const HomologyVector& a, const CycleLibrary& library, const DenjoyRef& map,
                         const ImmersionLayout& layout = {});

/// Partition of the circle for a non-Denjoy base at the given cyclic
/// boundary positions (weights are the measures of the arcs).
CantorPartition partition_at(const TransversalMeasure& mu, std::vector<double> bounds);

/// A traced leaf: PL lift plus the branch visited at each return.
struct LeafTrace {
  PLPath path;
  std::vector<std::uint8_t> branch;     // branch index per return
  std::vector<double> fiber;            // fiber coordinate v per return
  std::int64_t first_return = 0;
  std::vector<HomologyVector> classes;  // branch classes (for increments)

  std::size_t returns() const { return branch.size(); }
  const HomologyVector& increment(std::size_t k) const { return classes[branch[k]]; }
  HomologyVector increment_sum() const;
};

/// Lift of the return of the leaf through x: loop vertices from
/// A + offset(v(x)) followed by window samples, ending at
/// A + C_i + offset(v(f(x))). Times run from 0 to 1 (last entry is 1).
struct ReturnPath {
  std::vector<Vec> vertices;
  std::vector<double> times;
  std::size_t branch = 0;
  double fiber = 0.0;
  double next_fiber = 0.0;
};
ReturnPath return_path(const ImmersedSolenoid& s, const CirclePoint& x);

/// Traces the leaf through x0 (a point of the invariant set) over returns
/// [k0, k1). The time parameter advances by exactly 1 per return.
LeafTrace trace_leaf(const ImmersedSolenoid& s, double x0, std::int64_t k0, std::int64_t k1,
                     Parametrization mode = Parametrization::kTime);

/// Ribbon-level crossing family between two branches of one solenoid.
struct BranchCrossing {
  std::size_t branch_a = 0, branch_b = 0;
  Vec point;
  int sign = 0;
  double weight = 0.0;  // mu(K_a) mu(K_b)
};

struct CrossingInventory {
  std::vector<BranchCrossing> families;
  bool transverse = true;
  std::string diagnostics;
  int signed_total(std::size_t a, std::size_t b) const;
};

/// Crossings between the loop centerlines (core + offset at the middle of
/// each branch's fiber range) of all branch pairs, including a branch with
/// itself. Empty in embed mode.
CrossingInventory crossing_inventory(const ImmersedSolenoid& s);

}  // namespace solab
