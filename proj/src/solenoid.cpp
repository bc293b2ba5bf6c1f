#include "solab/solenoid.hpp"

#include <algorithm>
#include <cmath>

#include "solab/error.hpp"

namespace solab {

namespace {

double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

// Splits [ya, yb] where z - origin wraps, z affine: z(y) = za + slope (y - ya),
// slope > 0, and calls piece(len, v0, slope) with v = v0 + slope (y - y_start).
template <class Piece>
void walk_affine(double ya, double yb, double za, double slope, double origin, Piece&& piece) {
  double y = ya;
  while (y < yb) {
    double w = za + slope * (y - ya) - origin;
    double n = std::floor(w);
    double v0 = w - n;
    double y_wrap = ya + (n + 1.0 + origin - za) / slope;
    double y_end = std::min(yb, y_wrap);
    if (!(y_end > y)) y_end = std::nextafter(y, yb);  // guard against a stuck wrap point
    piece(y_end - y, v0, slope);
    y = y_end;
  }
}

// Integral of exp(i(phase + freq * frac(z(y) - origin))) over [ya, yb].
std::complex<double> integrate_affine(double ya, double yb, double za, double slope, double origin, double phase,
                                      double freq) {
  std::complex<double> acc = 0.0;
  walk_affine(ya, yb, za, slope, origin, [&](double len, double v0, double sl) {
    double k = freq * sl;
    std::complex<double> e0 = std::polar(1.0, phase + freq * v0);
    if (std::abs(k * len) < 1e-8) {
      acc += e0 * len * std::complex<double>(1.0, 0.5 * k * len);
    } else {
      acc += e0 * (std::polar(1.0, k * len) - 1.0) / std::complex<double>(0.0, k);
    }
  });
  return acc;
}

// Integral of frac(z(y) - origin) over [ya, yb].
double integrate_affine_fiber(double ya, double yb, double za, double slope, double origin) {
  double acc = 0.0;
  walk_affine(ya, yb, za, slope, origin, [&](double len, double v0, double sl) { acc += len * (v0 + 0.5 * sl * len); });
  return acc;
}

}  // namespace

TransversalMeasure TransversalMeasure::canonical(const BaseMap& base) {
  TransversalMeasure m(base);
  if (base.denjoy()) {
    m.kind_ = Kind::kCantor;
  } else if (std::holds_alternative<RigidRotation>(base.variant())) {
    m.kind_ = Kind::kLebesgue;
  } else {
    throw ValidationError("Morse-Smale base has no canonical invariant measure; give atoms at fixed points");
  }
  return m;
}

TransversalMeasure TransversalMeasure::atomic(const BaseMap& base, std::vector<double> points, std::vector<double> weights) {
  if (points.size() != weights.size() || points.empty())
    throw ValidationError("atomic measure: points and weights must be non-empty and of equal length");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw ValidationError("atomic measure: negative weight");
    double image = base.apply(points[i]);
    double d = std::abs(frac(image - points[i] + 0.5) - 0.5);
    if (d > 1e-12) throw ValidationError("atomic measure: atom is not a fixed point (measure not invariant)");
  }
  TransversalMeasure m(base);
  m.kind_ = Kind::kAtomic;
  m.points_ = std::move(points);
  m.weights_ = std::move(weights);
  return m;
}

TransversalMeasure TransversalMeasure::scaled(double c) const {
  TransversalMeasure m = *this;
  m.scale_ *= c;
  return m;
}

Measured TransversalMeasure::arc(const Arc& a) const {
  switch (kind_) {
    case Kind::kLebesgue:
      return {scale_ * std::clamp(a.length, 0.0, 1.0), 0.0};
    case Kind::kCantor: {
      Measured m = invariant_measure_arc(*base_.denjoy(), a);
      return {scale_ * m.value, std::abs(scale_) * m.error};
    }
    case Kind::kAtomic: {
      double s = 0.0;
      for (std::size_t i = 0; i < points_.size(); ++i)
        if (a.contains(points_[i])) s += weights_[i];
      return {scale_ * s, 0.0};
    }
  }
  return {};
}

std::complex<double> TransversalMeasure::integrate_exp(double origin, double phase, double freq, double y0, double y1,
                                                       bool pushed) const {
  std::complex<double> acc = 0.0;
  switch (kind_) {
    case Kind::kLebesgue: {
      double shift = pushed ? std::get<RigidRotation>(base_.variant()).alpha() : 0.0;
      acc = integrate_affine(y0, y1, y0 + shift, 1.0, origin, phase, freq);
      break;
    }
    case Kind::kCantor: {
      const DenjoyMap& d = *base_.denjoy();
      double shift = pushed ? d.alpha() : 0.0;
      d.for_each_affine_piece(y0 + shift, y1 + shift, [&](double ya, double yb, double za, double slope) {
        acc += integrate_affine(ya, yb, za, slope, origin, phase, freq);
      });
      break;
    }
    case Kind::kAtomic: {
      for (std::size_t i = 0; i < points_.size(); ++i) {
        if (frac(points_[i] - y0) >= y1 - y0) continue;
        double z = pushed ? base_.apply(points_[i]) : points_[i];
        acc += weights_[i] * std::polar(1.0, phase + freq * frac(z - origin));
      }
      break;
    }
  }
  return scale_ * acc;
}

double TransversalMeasure::integrate(const std::function<double(const CirclePoint&)>& fn, double y0, double y1,
                                     std::span<const double> breaks) const {
  if (!(y1 > y0) || y1 - y0 > 1.0 + 1e-15) throw ValidationError("integrate: need 0 < y1 - y0 <= 1");
  if (kind_ == Kind::kAtomic) {
    double acc = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (frac(points_[i] - y0) < y1 - y0) acc += weights_[i] * fn(base_.locate(points_[i]));
    return scale_ * acc;
  }
  std::vector<double> cuts{y0, y1};
  for (double b : breaks) {
    double lifted = b + std::ceil(y0 - b);  // first lift of b at or above y0
    for (; lifted < y1; lifted += 1.0)
      if (lifted > y0) cuts.push_back(lifted);
  }
  if (const DenjoyMap* d = base_.denjoy()) {
    const double a = d->alpha();
    d->for_each_affine_piece(y0, y1, [&](double ya, double, double, double) { cuts.push_back(ya); });
    d->for_each_affine_piece(y0 + a, y1 + a, [&](double ya, double, double, double) { cuts.push_back(ya - a); });
  }
  std::sort(cuts.begin(), cuts.end());
  static const double node = std::sqrt(0.6);
  static const double wt[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  static const double xs[3] = {-node, 0.0, node};
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double a = std::max(cuts[k], y0), b = std::min(cuts[k + 1], y1);
    if (!(b > a)) continue;
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double piece = 0.0;
    for (int q = 0; q < 3; ++q) piece += wt[q] * fn(CirclePoint{frac(mid + half * xs[q]), std::nullopt, 0.0});
    acc += piece * half;
  }
  return scale_ * acc;
}

double TransversalMeasure::integrate_fiber(double origin, double y0, double y1, bool pushed) const {
  double acc = 0.0;
  switch (kind_) {
    case Kind::kLebesgue: {
      double shift = pushed ? std::get<RigidRotation>(base_.variant()).alpha() : 0.0;
      acc = integrate_affine_fiber(y0, y1, y0 + shift, 1.0, origin);
      break;
    }
    case Kind::kCantor: {
      const DenjoyMap& d = *base_.denjoy();
      double shift = pushed ? d.alpha() : 0.0;
      d.for_each_affine_piece(y0 + shift, y1 + shift, [&](double ya, double yb, double za, double slope) {
        acc += integrate_affine_fiber(ya, yb, za, slope, origin);
      });
      break;
    }
    case Kind::kAtomic: {
      for (std::size_t i = 0; i < points_.size(); ++i) {
        if (frac(points_[i] - y0) >= y1 - y0) continue;
        double z = pushed ? base_.apply(points_[i]) : points_[i];
        acc += weights_[i] * frac(z - origin);
      }
      break;
    }
  }
  return scale_ * acc;
}

SolenoidPoint SuspensionSolenoid::flow(const SolenoidPoint& p, double s) const {
  double t = p.time + s;
  double n = std::floor(t);
  CirclePoint x = holonomy(p.fiber, static_cast<std::int64_t>(n));
  return {t - n, x};
}

CirclePoint SuspensionSolenoid::holonomy(const CirclePoint& x, std::int64_t m) const {
  CirclePoint p = x;
  for (std::int64_t k = 0; k < m; ++k) p = base_.step(p);
  for (std::int64_t k = 0; k > m; --k) p = base_.step_back(p);
  return p;
}

Arc SuspensionSolenoid::holonomy_arc(const Arc& a, std::int64_t m) const {
  if (a.length >= 1.0) return a;
  double s = base_.position(holonomy(base_.locate(a.start), m));
  double e = base_.position(holonomy(base_.locate(a.start + a.length), m));
  return {s, frac(e - s)};
}

double daval_measure(const TransversalMeasure& mu, const FlowBox& box) {
  if (!(box.t1 > box.t0) || box.t0 < 0.0 || box.t1 > 1.0) throw ValidationError("flow box: need 0 <= t0 < t1 <= 1");
  return (box.t1 - box.t0) * mu.arc(box.arc).value;
}

std::vector<double> schwartzman_measure_estimate(const SuspensionSolenoid& s, double x0, std::int64_t n,
                                                 const std::vector<FlowBox>& boxes) {
  if (n < 1) throw ValidationError("schwartzman_measure_estimate: N must be >= 1");
  const BaseMap& f = s.return_map();
  std::vector<double> occ(boxes.size(), 0.0);
  std::vector<std::int64_t> hits(boxes.size(), 0);
  CirclePoint p = f.locate(x0);
  for (std::int64_t k = 0; k < n; ++k) {
    double x = f.position(p);
    for (std::size_t b = 0; b < boxes.size(); ++b)
      if (boxes[b].arc.contains(x)) ++hits[b];
    p = f.step(p);
  }
  for (std::size_t b = 0; b < boxes.size(); ++b)
    occ[b] = (boxes[b].t1 - boxes[b].t0) * static_cast<double>(hits[b]) / static_cast<double>(n);
  return occ;
}

ErgodicityReport ergodicity_probe(const SuspensionSolenoid& s, const std::vector<FlowBox>& boxes,
                                  const std::vector<double>& starts, std::int64_t n, double radius) {
  ErgodicityReport r;
  r.averages.resize(starts.size());
  const auto count = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i)
    r.averages[static_cast<std::size_t>(i)] = schwartzman_measure_estimate(s, starts[static_cast<std::size_t>(i)], n, boxes);

  for (std::size_t b = 0; b < boxes.size(); ++b) {
    double lo = 1e300, hi = -1e300;
    for (const auto& a : r.averages) lo = std::min(lo, a[b]), hi = std::max(hi, a[b]);
    if (!r.averages.empty()) r.dispersion = std::max(r.dispersion, hi - lo);
  }
  std::vector<const std::vector<double>*> centers;
  for (const auto& a : r.averages) {
    bool placed = false;
    for (const auto* c : centers) {
      double d = 0.0;
      for (std::size_t b = 0; b < a.size(); ++b) d = std::max(d, std::abs(a[b] - (*c)[b]));
      if (d <= radius) {
        placed = true;
        break;
      }
    }
    if (!placed) centers.push_back(&a);
  }
  r.clusters = static_cast<int>(centers.size());
  r.uniquely_ergodic_empirical = r.dispersion <= radius;
  return r;
}

}  // namespace solab
