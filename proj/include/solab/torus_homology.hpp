#pragma once

// Homology arithmetic on the flat torus T^n = R^n / Z^n: parametrized PL
// paths given by their lift, geodesic closings, calibrating functions and the
// stable norm.

#include <functional>
#include <vector>

#include "solab/vec.hpp"

namespace solab {

enum class Parametrization { kTime, kArcLength };

const char* to_string(Parametrization p);

/// Piecewise-linear curve in T^n given by its lift to R^n. Each vertex
/// carries a parameter value; between vertices the lift is interpolated
/// linearly in the parameter.
class PLPath {
 public:
  PLPath() = default;

  /// Arc-length parametrized path starting at parameter `start`.
  static PLPath arc_length(std::vector<Vec> vertices, double start = 0.0);
  /// Time parametrized path with explicit per-vertex times.
  static PLPath timed(std::vector<Vec> vertices, std::vector<double> times);

  Parametrization parametrization() const { return mode_; }
  int dim() const { return vertices_.empty() ? 0 : vertices_.front().dim(); }
  std::size_t size() const { return vertices_.size(); }
  const std::vector<Vec>& vertices() const { return vertices_; }
  const std::vector<double>& params() const { return params_; }
  double param_begin() const { return params_.front(); }
  double param_end() const { return params_.back(); }

  /// Lift point at parameter u (clamped search, u must lie in range).
  Vec lift_at(double u) const;
  double length() const;
  /// Lift displacement between the two ends.
  Vec displacement() const { return vertices_.back() - vertices_.front(); }
  bool is_loop(double tol = 1e-9) const;

  /// The same geometry re-parametrized by arc length.
  PLPath to_arc_length() const;
  /// Lift translated by v.
  PLPath translated(const Vec& v) const;

 private:
  void validate() const;

  std::vector<Vec> vertices_;
  std::vector<double> params_;
  Parametrization mode_ = Parametrization::kTime;
};

/// How the short closing arc from c(t) back to c(s) is chosen.
struct ClosingStrategy {
  enum class Rule {
    /// Minimal torus geodesic; ties broken towards the lexicographically
    /// smallest displacement.
    kMinimalGeodesic,
    /// Lexicographically largest displacement among all with |d| <= sqrt(n)/2.
    /// Admissible but generally not minimal; used to test closing independence.
    kLargestAdmissible,
  };
  Rule rule = Rule::kMinimalGeodesic;
};

/// Closing displacement d with d = from - to (mod Z^n), per strategy.
Vec closing_displacement(const Vec& to, const Vec& from, const ClosingStrategy& strategy = {});

/// Integer class of the lift segment start -> end closed by the strategy.
HomologyVector close_lift(const Vec& start, const Vec& end, const ClosingStrategy& strategy = {});

/// [c_{s,t}] for a PL path: the piece c|[s,t] juxtaposed with the closing arc.
HomologyVector close_curve(const PLPath& path, double s, double t, const ClosingStrategy& strategy = {});

/// Bump profile used by the partition-of-unity construction. The bump is the
/// product over coordinates of a 1D profile supported on |x| < radius.
struct BumpProfile {
  enum class Shape {
    kTent,        // 1 - |x|/R
    kPolynomial,  // (1 - (x/R)^2)^(smoothness + 1), C^smoothness
  };
  Shape shape = Shape::kTent;
  double radius = 1.0;
  int smoothness = 0;

  double profile(double x) const;
};

/// Equivariant map Phi: R^n -> H_1(T^n, R) with Phi(x + m) = Phi(x) + m.
class CalibratingFunction {
 public:
  enum class Kind { kIdentityLift, kPartitionOfUnity };

  /// Phi(x) = x - base.
  static CalibratingFunction identity_lift(const Vec& base);

  Kind kind() const { return kind_; }
  int dim() const { return base_.dim(); }
  const Vec& base() const { return base_; }
  const BumpProfile& bump() const { return bump_; }

  Vec operator()(const Vec& x) const;

  /// Measured sup over a sample grid of one fundamental domain of |Phi(x) - (x - base)|.
  double sup_deviation_from_identity(int samples_per_axis = 41) const;
  /// Measured sup of the operator norm of dPhi (central differences).
  double sup_differential(int samples_per_axis = 41) const;

 private:
  friend CalibratingFunction build_calibrating_pou(const BumpProfile&, const Vec&);
  Kind kind_ = Kind::kIdentityLift;
  BumpProfile bump_;
  Vec base_;
};

/// Sum over lattice points g of psi_g(x) g, psi_g the normalized translates of
/// the bump centred at base + g. Requires 1/2 < radius <= 1 so the translates
/// cover R^n while the support meets the base fibre only at the base point.
CalibratingFunction build_calibrating_pou(const BumpProfile& bump, const Vec& base);

/// Phi(c(t)) - Phi(c(s)).
HomologyVector calibrate(const CalibratingFunction& phi, const PLPath& path, double s, double t);

struct StableNormEstimate {
  double value = 0.0;             // last term of the sequence
  std::vector<double> sequence;   // l(k a) / k for k = 1..n_max
};

/// Minimal length of a loop in the integer class m on the flat torus.
double minimal_loop_length(const HomologyVector& m);

/// Stable norm via l(k a)/k; real classes are rounded to the nearest integer
/// class at each multiple.
StableNormEstimate stable_norm(const HomologyVector& a, int n_max);

}  // namespace solab
