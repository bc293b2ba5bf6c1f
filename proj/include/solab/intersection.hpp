#pragma once

// Intersection pairing of measured solenoids immersed in T^2. Each branch is
// represented by its closed core cycle (the base-box segment [p0, A]
// followed by the loop), drawn at the branch's middle fiber offset. Ribbon
// leaves are parallel translates of the core, so a transverse crossing of
// two cores is crossed once by every leaf pair and carries the product of
// the branch measures.

#include <cstdint>
#include <string>
#include <vector>

#include "solab/immersion.hpp"

namespace solab {

enum class Transversality { kTransverse, kPerturbed, kDegenerate };

const char* to_string(Transversality t);

struct CrossingRecord {
  std::size_t branch1 = 0, branch2 = 0;
  Vec point;  // in [0,1)^2
  int sign = 0;
  double sin_angle = 0.0;
  Arc arc1, arc2;  // branch arcs of the two transversals
  double measure1 = 0.0, measure2 = 0.0;

  double contribution() const { return sign * measure1 * measure2; }
};

struct CrossingSet {
  std::vector<CrossingRecord> records;  // canonical order: branches, then point
  Transversality status = Transversality::kTransverse;
  std::string diagnostics;
};

/// Closed core cycle of branch i (lift vertices, first = p0 + offset).
std::vector<Vec> core_cycle(const ImmersedSolenoid& s, std::size_t i);

struct CrossingOptions {
  double sin_min = 1e-6;       // theta_min as |sin|
  double vertex_margin = 1e-9; // crossings this close to a segment end are ambiguous
};

/// All crossings of core cycles of s1 with those of s2. OpenMP over
/// segment pairs; the serial reference returns the same records.
CrossingSet enumerate_crossings(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2, const CrossingOptions& opt = {});
CrossingSet enumerate_crossings_serial(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2,
                                       const CrossingOptions& opt = {});

struct PairingReport {
  double total = 0.0;
  double positive = 0.0;  // sum of positive contributions
  double negative = 0.0;  // sum of |negative contributions|
  std::vector<CrossingRecord> records;
  Transversality status = Transversality::kTransverse;
  std::string diagnostics;
};

/// total = positive - negative, each summed in sorted order, so swapping
/// the arguments negates the total exactly.
PairingReport intersection_pairing(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2,
                                   const CrossingOptions& opt = {});

/// Layout search: translates `moving` by the first vector of a fixed
/// low-discrepancy sequence that makes the pair transverse.
ImmersedSolenoid transverse_placement(const ImmersedSolenoid& moving, const ImmersedSolenoid& fixed,
                                      int max_candidates = 64, const CrossingOptions& opt = {});

struct PerturbResult {
  ImmersedSolenoid shifted;
  Vec shift;
  int retries = 0;  // 0 when the input was already transverse
  bool transverse = false;
  std::string diagnostics;
};

/// Translates s1 by a random vector of length <= eps_shift until the pair is
/// transverse; eps_shift starts at 1e-4 and doubles per retry up to 1e-2.
PerturbResult perturb_transverse(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2, std::uint64_t seed,
                                 int max_retries = 12, const CrossingOptions& opt = {});

/// Monte Carlo audit: mean signed crossing count of closed leaf cycles for
/// leaf pairs sampled from the two transversal measures, times the masses.
double sampled_leaf_pairing(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2, int samples, std::uint64_t seed);

/// Signed crossings between two PL lifts on T^2, found by bucketing
/// segments in a G x G cell grid (DDA walk) and counting each crossing in
/// the cell that contains it. OpenMP over cells; serial reference.
struct PathCrossingCount {
  std::int64_t positive = 0, negative = 0;
  std::int64_t signed_total() const { return positive - negative; }
};
PathCrossingCount count_path_crossings(const std::vector<Vec>& a, const std::vector<Vec>& b, int grid = 64);
PathCrossingCount count_path_crossings_serial(const std::vector<Vec>& a, const std::vector<Vec>& b, int grid = 64);

struct LeafwiseEstimate {
  std::int64_t returns = 0;
  std::int64_t signed_crossings = 0;
  double length1 = 0.0, length2 = 0.0;
  double value = 0.0;  // signed_crossings / (length1 length2)
};

/// Leafwise pairing along the leaves through x1 in s1 and x2 in s2 over
/// returns [0, N) for each N in `horizons`.
std::vector<LeafwiseEstimate> leafwise_pairing_limit(const ImmersedSolenoid& s1, const ImmersedSolenoid& s2, double x1,
                                                     double x2, const std::vector<std::int64_t>& horizons,
                                                     int grid = 64);

}  // namespace solab
