#include "solab/segments.hpp"

#include <algorithm>
#include <cmath>

namespace solab {

namespace {

double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

}  // namespace

void torus_segment_crossings(const Vec& p0, const Vec& p1, const Vec& q0, const Vec& q1, double sin_min,
                             CrossingScan& out) {
  const Vec d1 = p1 - p0, d2 = q1 - q0;
  const double n1 = d1.norm(), n2 = d2.norm();
  const double c = cross2(d1, d2);
  const double sin_angle = c / (n1 * n2);
  // lattice shifts m for which the bounding boxes of the two segments meet
  int lo[2], hi[2];
  for (int k = 0; k < 2; ++k) {
    double pmin = std::min(p0[k], p1[k]), pmax = std::max(p0[k], p1[k]);
    double qmin = std::min(q0[k], q1[k]), qmax = std::max(q0[k], q1[k]);
    lo[k] = static_cast<int>(std::floor(pmin - qmax)) - 1;
    hi[k] = static_cast<int>(std::ceil(pmax - qmin)) + 1;
  }
  for (int m0 = lo[0]; m0 <= hi[0]; ++m0) {
    for (int m1 = lo[1]; m1 <= hi[1]; ++m1) {
      const Vec q = q0 + Vec{static_cast<double>(m0), static_cast<double>(m1)};
      const Vec w = q - p0;
      if (std::abs(sin_angle) < 1e-12) {
        // parallel: overlap only if collinear
        double off = std::abs(cross2(w, d1)) / n1;
        if (off > 1e-12) continue;
        double t0 = w.dot(d1) / (n1 * n1);
        double t1 = (w + d2).dot(d1) / (n1 * n1);
        if (std::min(t0, t1) < 1.0 - 1e-12 && std::max(t0, t1) > 1e-12) out.parallel_overlap = true;
        continue;
      }
      double s = cross2(w, d2) / c;
      double u = cross2(w, d1) / c;
      if (s < 0.0 || s >= 1.0 || u < 0.0 || u >= 1.0) continue;
      SegmentHit h;
      h.s = s;
      h.u = u;
      h.point = wrap_unit(p0 + d1 * s);
      h.sin_angle = sin_angle;
      h.sign = c > 0 ? 1 : -1;
      if (std::abs(sin_angle) < sin_min) out.shallow = true;
      out.hits.push_back(h);
    }
  }
}

double segment_distance(const Vec& p0, const Vec& p1, const Vec& q0, const Vec& q1) {
  // closest points of two segments (clamped least squares)
  const Vec d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = d1.dot(d1), e = d2.dot(d2), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-300 && e <= 1e-300) return r.norm();
  if (a <= 1e-300) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-300) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-14 * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + d1 * s) - (q0 + d2 * t)).norm();
}

double torus_segment_distance(const Vec& p0, const Vec& p1, const Vec& q0, const Vec& q1) {
  const int n = p0.dim();
  int lo[kMaxDim], hi[kMaxDim];
  for (int k = 0; k < n; ++k) {
    double pmin = std::min(p0[k], p1[k]), pmax = std::max(p0[k], p1[k]);
    double qmin = std::min(q0[k], q1[k]), qmax = std::max(q0[k], q1[k]);
    lo[k] = static_cast<int>(std::floor(pmin - qmax)) - 1;
    hi[k] = static_cast<int>(std::ceil(pmax - qmin)) + 1;
  }
  double best = 1e300;
  int m[kMaxDim];
  for (int k = 0; k < n; ++k) m[k] = lo[k];
  while (true) {
    Vec shift(n);
    for (int k = 0; k < n; ++k) shift[k] = m[k];
    best = std::min(best, segment_distance(p0, p1, q0 + shift, q1 + shift));
    int k = 0;
    while (k < n && ++m[k] > hi[k]) m[k] = lo[k], ++k;
    if (k == n) break;
  }
  return best;
}

}  // namespace solab
