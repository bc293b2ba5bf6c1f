#pragma once

// Asymptotic cycle estimators for parametrized curves in T^n: closing,
// calibrating function, closed 1-forms, circle-valued maps and signed
// hypersurface crossings. Also cluster-set estimation and leaf sweeps.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "solab/forms.hpp"
#include "solab/immersion.hpp"
#include "solab/torus_homology.hpp"

namespace solab {

/// A curve given by its lift: a linear flow x0 + t v or a PL path.
class CurveSampler {
 public:
  static CurveSampler linear_flow(const Vec& x0, const Vec& v, double begin, double end);
  static CurveSampler path(PLPath p);

  bool is_linear() const { return !path_.has_value(); }
  int dim() const { return x0_.dim(); }
  double begin() const { return begin_; }
  double end() const { return end_; }
  Parametrization parametrization() const;

  Vec lift(double u) const;
  /// Lift vertices of c|[s,t], endpoints included.
  std::vector<Vec> piece(double s, double t) const;
  /// Same geometry traversed backwards: u -> -u.
  CurveSampler reversed() const;

 private:
  Vec x0_, v_;
  std::optional<PLPath> path_;
  double begin_ = 0.0, end_ = 0.0;
};

enum class Estimator { kClosing, kCalibrating, kForm, kCircleMap, kCrossing };

const char* to_string(Estimator e);
constexpr int kEstimatorCount = 5;

struct Horizon {
  double s = 0.0, t = 0.0;
};

/// s = 0 and t = t_max / 2^(count-1-k), k = 0..count-1.
std::vector<Horizon> geometric_horizons(double t_max, int count, double s_ratio = 0.0);

struct AsymptoticEstimate {
  Horizon horizon;
  HomologyVector value;
  Estimator tag = Estimator::kClosing;
};

struct EstimateSeries {
  Estimator tag = Estimator::kClosing;
  std::vector<AsymptoticEstimate> estimates;
  bool converged = false;
  std::optional<HomologyVector> limit;  // the final value when converged
  std::string diagnostics;
};

struct ConvergenceRule {
  int window = 5;          // successive horizons
  double tolerance = 0.01; // max distance to the final value in the window
};

/// Applies the Cauchy window to the series and sets converged / limit.
void declare_convergence(EstimateSeries& series, const ConvergenceRule& rule);

/// Data for the non-closing estimators. Defaults are fixed functions of
/// the dimension and seed.
struct EstimatorConfig {
  int dim = 2;
  std::uint64_t seed = 1;
  CalibratingFunction calibrating = CalibratingFunction::identity_lift(Vec(2));
  std::vector<TestForm> forms;                 // forms[j] has class e_j
  std::vector<TrigPolynomial> circle_maps;     // f_j = x_j + psi_j mod 1
  int crossing_retries = 16;

  static EstimatorConfig standard(int n, std::uint64_t seed = 1);
};

/// [c_{s,t}] / (t - s) by the estimator for one horizon.
HomologyVector estimate(const CurveSampler& c, const Horizon& h, Estimator e, const EstimatorConfig& cfg);

EstimateSeries asymptotic_class_closing(const CurveSampler& c, const std::vector<Horizon>& hs,
                                        const ConvergenceRule& rule = {});
EstimateSeries asymptotic_class_calibrating(const CurveSampler& c, const CalibratingFunction& phi,
                                            const std::vector<Horizon>& hs, const ConvergenceRule& rule = {});
/// forms[j] must have cohomology class e_j.
EstimateSeries asymptotic_class_form(const CurveSampler& c, const std::vector<TestForm>& forms,
                                     const std::vector<Horizon>& hs, const ConvergenceRule& rule = {});

/// Lift displacement of f o c for f(x) = m.x + psi(x) (mod 1), obtained by
/// unwrapping samples of f o c, divided by t - s.
double circle_map_rate(const CurveSampler& c, const Horizon& h, const Vec& m, const TrigPolynomial& psi);
/// circle_maps[j] is psi_j of f_j = x_j + psi_j.
EstimateSeries asymptotic_class_circle_map(const CurveSampler& c, const std::vector<TrigPolynomial>& circle_maps,
                                           const std::vector<Horizon>& hs, const ConvergenceRule& rule = {});

struct CrossingRate {
  double rate = 0.0;
  std::int64_t signed_count = 0;
  double level = 0.5;
  int retries = 0;
};

/// Signed crossings of c|[s,t] with {x_j = level} per unit parameter. The
/// level is taken from 0.5 + k g (mod 1), g the golden ratio conjugate,
/// skipping levels met tangentially or at a vertex.
CrossingRate crossing_rate(const CurveSampler& c, const Horizon& h, int j, int max_retries = 16);
EstimateSeries asymptotic_class_crossing(const CurveSampler& c, const std::vector<Horizon>& hs,
                                         const ConvergenceRule& rule = {}, int max_retries = 16);

struct EstimatorReport {
  std::vector<EstimateSeries> series;  // indexed by Estimator
  double max_disagreement = 0.0;       // pairwise, at the final horizon
};

EstimatorReport five_estimators(const CurveSampler& c, const std::vector<Horizon>& hs, const EstimatorConfig& cfg,
                                const ConvergenceRule& rule = {});

/// All (curve, horizon, estimator) evaluations, parallel over the triples;
/// the serial reference gives identical values.
std::vector<EstimatorReport> estimator_sweep(const std::vector<CurveSampler>& curves, const std::vector<Horizon>& hs,
                                             const EstimatorConfig& cfg, const ConvergenceRule& rule = {});
std::vector<EstimatorReport> estimator_sweep_serial(const std::vector<CurveSampler>& curves,
                                                    const std::vector<Horizon>& hs, const EstimatorConfig& cfg,
                                                    const ConvergenceRule& rule = {});

struct ClusterEstimate {
  std::vector<HomologyVector> all;       // C
  std::vector<HomologyVector> positive;  // C+
  std::vector<HomologyVector> negative;  // C-
  std::vector<HomologyVector> balanced;  // C_b
  double radius = 0.0;
  double all_diameter = 0.0;  // of the grid values before collapsing
};

struct ClusterGrid {
  std::vector<double> horizons;  // t values, increasing
  std::vector<double> ratios;    // s = -ratio * t
  int tail = 4;                  // number of largest horizons used
  double radius = 0.01;          // clustering radius
};

/// Grid evaluation of the closing values [c_{s,t}]/(t-s) on the tail of
/// the horizon grid, collapsed to representatives at the clustering radius.
/// C_b keeps the two-sided values at (s, t) whose one-sided values at t and
/// at s both move by at most the radius to the next horizon of the grid.
ClusterEstimate cluster_estimate(const CurveSampler& c, const ClusterGrid& grid);

/// Unit directions of the one-sided closing classes [c_{0,t}] on t grid
/// points whose class has at least `min_fraction` of the largest norm,
/// collapsed at angular radius `angle_radius`. This approximates the
/// projective image of the unparametrized cluster.
std::vector<Vec> cluster_directions(const CurveSampler& c, const std::vector<double>& ts, double min_fraction = 0.25,
                                    double angle_radius = 0.05);

/// Arc-length curve in T^2 that alternates excursions along the positive
/// x and y half-axes, at distance `offset` from the axis, returning near 0
/// between them. Excursion k has length growth^k.
PLPath two_ray_oscillator(int excursions, double growth = 2.0, double offset = 0.05);

/// Time and arc-length Schwartzman classes of traced leaves.
struct LeafClass {
  double start = 0.0;
  std::int64_t returns = 0;
  HomologyVector time_class;
  HomologyVector arc_class;
  double mean_return_length = 0.0;
};

std::vector<LeafClass> leaf_class_sweep(const ImmersedSolenoid& s, const std::vector<double>& starts,
                                        std::int64_t returns);
std::vector<LeafClass> leaf_class_sweep_serial(const ImmersedSolenoid& s, const std::vector<double>& starts,
                                               std::int64_t returns);

}  // namespace solab
