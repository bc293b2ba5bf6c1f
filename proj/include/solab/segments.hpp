#pragma once

// Segment geometry on the flat torus: crossings between a segment and all
// lattice translates of another (T^2), and lattice-minimal distances (T^n).

#include <vector>

#include "solab/vec.hpp"

namespace solab {

struct SegmentHit {
  double s = 0.0;        // parameter along the first segment, in [0,1)
  double u = 0.0;        // parameter along the second segment, in [0,1)
  Vec point;             // crossing point reduced to [0,1)^2
  double sin_angle = 0;  // cross(d1, d2) / (|d1| |d2|)
  int sign = 0;          // sign of cross(d1, d2)
};

struct CrossingScan {
  std::vector<SegmentHit> hits;
  bool parallel_overlap = false;  // collinear pieces overlap
  bool shallow = false;           // a crossing with |sin| below the threshold
};

/// Crossings of p0->p1 with q0->q1 + m over all m in Z^2. Parameters are
/// half-open so a crossing at a shared vertex of consecutive segments is
/// counted once.
void torus_segment_crossings(const Vec& p0, const Vec& p1, const Vec& q0, const Vec& q1, double sin_min,
                             CrossingScan& out);

/// min over m in Z^n of the distance between p0p1 and q0q1 + m.
double torus_segment_distance(const Vec& p0, const Vec& p1, const Vec& q0, const Vec& q1);

/// Euclidean distance between two segments of R^n.
double segment_distance(const Vec& p0, const Vec& p1, const Vec& q0, const Vec& q1);

}  // namespace solab
