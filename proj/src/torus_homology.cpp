#include "solab/torus_homology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "solab/error.hpp"

namespace solab {

std::string Vec::str() const {
  std::ostringstream os;
  os.precision(12);
  os << '(';
  for (int i = 0; i < n_; ++i) os << (i ? ", " : "") << c_[i];
  os << ')';
  return os.str();
}

const char* to_string(Parametrization p) {
  return p == Parametrization::kTime ? "time" : "arc-length";
}

PLPath PLPath::arc_length(std::vector<Vec> vertices, double start) {
  PLPath p;
  p.vertices_ = std::move(vertices);
  p.mode_ = Parametrization::kArcLength;
  p.params_.reserve(p.vertices_.size());
  double acc = start;
  for (std::size_t i = 0; i < p.vertices_.size(); ++i) {
    if (i) acc += distance(p.vertices_[i], p.vertices_[i - 1]);
    p.params_.push_back(acc);
  }
  p.validate();
  return p;
}

PLPath PLPath::timed(std::vector<Vec> vertices, std::vector<double> times) {
  PLPath p;
  p.vertices_ = std::move(vertices);
  p.params_ = std::move(times);
  p.mode_ = Parametrization::kTime;
  p.validate();
  return p;
}

void PLPath::validate() const {
  if (vertices_.size() < 2) throw ValidationError("PLPath needs at least two vertices");
  if (params_.size() != vertices_.size()) throw ValidationError("PLPath: one parameter per vertex");
  const int n = vertices_.front().dim();
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (vertices_[i].dim() != n) throw ValidationError("PLPath: mixed dimensions");
    if (!vertices_[i].finite()) throw ValidationError("PLPath: non-finite vertex");
    if (i == 0) continue;
    if (vertices_[i] == vertices_[i - 1]) throw ValidationError("PLPath: repeated consecutive vertex");
    if (!(params_[i] > params_[i - 1])) throw ValidationError("PLPath: parameters must increase");
  }
}

Vec PLPath::lift_at(double u) const {
  if (u < params_.front() - 1e-12 || u > params_.back() + 1e-12)
    throw ValidationError("PLPath: parameter out of range");
  auto it = std::upper_bound(params_.begin(), params_.end(), u);
  std::size_t hi = std::clamp<std::size_t>(it - params_.begin(), 1, params_.size() - 1);
  std::size_t lo = hi - 1;
  double w = (u - params_[lo]) / (params_[hi] - params_[lo]);
  w = std::clamp(w, 0.0, 1.0);
  return vertices_[lo] + (vertices_[hi] - vertices_[lo]) * w;
}

double PLPath::length() const {
  double acc = 0;
  for (std::size_t i = 1; i < vertices_.size(); ++i) acc += distance(vertices_[i], vertices_[i - 1]);
  return acc;
}

bool PLPath::is_loop(double tol) const {
  HomologyVector d(displacement());
  return d.is_integral(tol);
}

PLPath PLPath::to_arc_length() const { return arc_length(vertices_, 0.0); }

PLPath PLPath::translated(const Vec& v) const {
  PLPath p = *this;
  for (auto& x : p.vertices_) x += v;
  return p;
}

Vec closing_displacement(const Vec& to, const Vec& from, const ClosingStrategy& strategy) {
  const int n = to.dim();
  Vec d = from - to;
  for (int j = 0; j < n; ++j) {
    double r = d[j] - std::floor(d[j]);  // [0,1)
    d[j] = r > 0.5 ? r - 1.0 : (r == 0.5 ? -0.5 : r);
  }
  if (strategy.rule == ClosingStrategy::Rule::kMinimalGeodesic) return d;

  const double bound = std::sqrt(static_cast<double>(n)) / 2.0 + 1e-12;
  Vec best = d;
  bool have = false;
  int combos = 1;
  for (int j = 0; j < n; ++j) combos *= 3;
  for (int code = 0; code < combos; ++code) {
    Vec c = d;
    int k = code;
    for (int j = 0; j < n; ++j, k /= 3) c[j] += static_cast<double>(k % 3 - 1);
    if (c.norm() > bound) continue;
    if (!have || std::lexicographical_compare(best.values().begin(), best.values().end(),
                                              c.values().begin(), c.values().end())) {
      best = c;
      have = true;
    }
  }
  return best;
}

HomologyVector close_lift(const Vec& start, const Vec& end, const ClosingStrategy& strategy) {
  Vec cls = (end - start) + closing_displacement(end, start, strategy);
  return HomologyVector(cls).rounded();
}

HomologyVector close_curve(const PLPath& path, double s, double t, const ClosingStrategy& strategy) {
  if (!(s < t)) throw ValidationError("close_curve: need s < t");
  if (path.length() == 0.0) throw ValidationError("close_curve: degenerate path");
  return close_lift(path.lift_at(s), path.lift_at(t), strategy);
}

double BumpProfile::profile(double x) const {
  double a = std::abs(x) / radius;
  if (a >= 1.0) return 0.0;
  if (shape == Shape::kTent) return 1.0 - a;
  double b = 1.0 - a * a;
  return std::pow(b, smoothness + 1);
}

CalibratingFunction CalibratingFunction::identity_lift(const Vec& base) {
  CalibratingFunction f;
  f.kind_ = Kind::kIdentityLift;
  f.base_ = base;
  return f;
}

CalibratingFunction build_calibrating_pou(const BumpProfile& bump, const Vec& base) {
  if (!(bump.radius > 0.5))
    throw ConstructionError("calibrating bump: lattice translates of the support do not cover R^n");
  if (bump.radius > 1.0)
    throw ConstructionError("calibrating bump: support meets the base fibre away from the base point");
  if (bump.smoothness < 0) throw ValidationError("calibrating bump: smoothness must be >= 0");
  CalibratingFunction f;
  f.kind_ = CalibratingFunction::Kind::kPartitionOfUnity;
  f.bump_ = bump;
  f.base_ = base;
  return f;
}

Vec CalibratingFunction::operator()(const Vec& x) const {
  if (kind_ == Kind::kIdentityLift) return x - base_;

  const int n = base_.dim();
  Vec y = x - base_;
  Vec lo(n);
  for (int j = 0; j < n; ++j) lo[j] = std::floor(y[j]) - 1.0;
  // Lattice points g within sup-distance 1 of y are among lo + {0,1,2}^n.
  int combos = 1;
  for (int j = 0; j < n; ++j) combos *= 3;
  double denom = 0.0;
  Vec num(n);
  for (int code = 0; code < combos; ++code) {
    Vec g = lo;
    int k = code;
    for (int j = 0; j < n; ++j, k /= 3) g[j] += static_cast<double>(k % 3);
    double w = 1.0;
    for (int j = 0; j < n && w > 0.0; ++j) w *= bump_.profile(y[j] - g[j]);
    if (w == 0.0) continue;
    denom += w;
    num += g * w;
  }
  if (!(denom > 0.0)) throw ConstructionError("calibrating function: partition-of-unity denominator vanished");
  return num / denom;
}

namespace {

template <class F>
void for_each_grid_point(int n, int per_axis, F&& f) {
  long total = 1;
  for (int j = 0; j < n; ++j) total *= per_axis;
  for (long idx = 0; idx < total; ++idx) {
    Vec p(n);
    long k = idx;
    for (int j = 0; j < n; ++j, k /= per_axis) p[j] = (static_cast<double>(k % per_axis) + 0.5) / per_axis;
    f(p);
  }
}

}  // namespace

double CalibratingFunction::sup_deviation_from_identity(int samples_per_axis) const {
  double m = 0.0;
  for_each_grid_point(dim(), samples_per_axis, [&](const Vec& p) {
    Vec x = base_ + p;
    m = std::max(m, ((*this)(x) - (x - base_)).norm());
  });
  return m;
}

double CalibratingFunction::sup_differential(int samples_per_axis) const {
  const int n = dim();
  const double h = 1e-6;
  double m = 0.0;
  for_each_grid_point(n, samples_per_axis, [&](const Vec& p) {
    Vec x = base_ + p;
    // Frobenius norm of the Jacobian bounds the operator norm.
    double fro = 0.0;
    for (int j = 0; j < n; ++j) {
      Vec e = Vec::unit(n, j) * h;
      Vec col = ((*this)(x + e) - (*this)(x - e)) / (2 * h);
      fro += col.dot(col);
    }
    m = std::max(m, std::sqrt(fro));
  });
  return m;
}

HomologyVector calibrate(const CalibratingFunction& phi, const PLPath& path, double s, double t) {
  if (!(s < t)) throw ValidationError("calibrate: need s < t");
  return HomologyVector(phi(path.lift_at(t)) - phi(path.lift_at(s)));
}

double minimal_loop_length(const HomologyVector& m) {
  if (!m.is_integral()) throw ValidationError("minimal_loop_length: class must be integral");
  // On the flat torus every loop in class m lifts to a path with displacement
  // exactly m, and the straight closed geodesic realizes |m|.
  return m.rounded().norm();
}

StableNormEstimate stable_norm(const HomologyVector& a, int n_max) {
  if (n_max < 1) throw ValidationError("stable_norm: n_max must be >= 1");
  StableNormEstimate est;
  est.sequence.reserve(n_max);
  for (int k = 1; k <= n_max; ++k) {
    HomologyVector mk = (a * static_cast<double>(k)).rounded();
    est.sequence.push_back(minimal_loop_length(mk) / k);
  }
  est.value = est.sequence.back();
  return est;
}

}  // namespace solab
