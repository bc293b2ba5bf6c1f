#include "solab/circle_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "solab/error.hpp"

namespace solab {

namespace {

double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

// Value in [w, w+1) congruent to d mod 1.
double into_window(double d, double w) { return w + frac(d - w); }

}  // namespace

// ---------------------------------------------------------------- rotation number

RotationNumber::RotationNumber(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) throw ValidationError("rotation number must lie in (0,1)");
  // Continued fraction of value; stop when q passes 1e8 or the expansion closes.
  std::int64_t p_prev = 1, p_prev2 = 0, q_prev = 0, q_prev2 = 1;
  double x = value;
  irrational_ = true;
  for (int depth = 0; depth < 64; ++depth) {
    double a = std::floor(x);
    auto ai = static_cast<std::int64_t>(a);
    std::int64_t p = ai * p_prev + p_prev2;
    std::int64_t q = ai * q_prev + q_prev2;
    if (q > 100000000) break;
    if (depth > 0) convergents_.push_back({p, q});
    p_prev2 = p_prev, p_prev = p;
    q_prev2 = q_prev, q_prev = q;
    if (depth > 0 && q <= 1000000 && std::abs(value - static_cast<double>(p) / static_cast<double>(q)) < 1e-14) {
      irrational_ = false;
      break;
    }
    double r = x - a;
    if (r < 1e-14) {
      irrational_ = false;
      break;
    }
    x = 1.0 / r;
  }
  diophantine_flag_ = true;
  for (const auto& c : convergents_) {
    if (c.q < 10 || c.q > 100000) continue;  // small q is pre-asymptotic; beyond 1e5, q^-3 is below double resolution of value
    double q = static_cast<double>(c.q);
    if (!(std::abs(value - static_cast<double>(c.p) / q) > 1.0 / (q * q * q))) diophantine_flag_ = false;
  }
}

RotationNumber RotationNumber::from_continued_fraction(std::span<const int> terms) {
  if (terms.empty()) throw ValidationError("continued fraction needs at least one term");
  double x = 0.0;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
    if (*it < 1) throw ValidationError("continued fraction terms must be >= 1");
    x = 1.0 / (static_cast<double>(*it) + x);
  }
  return RotationNumber(x);
}

RotationNumber RotationNumber::golden() { return RotationNumber((std::sqrt(5.0) - 1.0) / 2.0); }

// ---------------------------------------------------------------- gap schedule

double GapSchedule::default_constant() { return std::tanh(std::numbers::pi) / std::numbers::pi; }

double GapSchedule::total() const { return constant * std::numbers::pi / std::tanh(std::numbers::pi); }

double GapSchedule::tail_bound() const {
  return 2.0 * constant * (std::numbers::pi / 2.0 - std::atan(static_cast<double>(n_max)));
}

bool Arc::contains(double x) const {
  if (length >= 1.0) return true;
  return frac(x - start) < length;
}

// ---------------------------------------------------------------- rigid rotation

RigidRotation::RigidRotation(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("rotation angle must lie in [0,1)");
}
CirclePoint RigidRotation::step(const CirclePoint& p) const { return {frac(p.base + alpha_), {}, 0.0}; }
CirclePoint RigidRotation::step_back(const CirclePoint& p) const { return {frac(p.base - alpha_), {}, 0.0}; }
CirclePoint RigidRotation::locate(double x) const { return {frac(x), {}, 0.0}; }

// ---------------------------------------------------------------- Denjoy

DenjoyMap::DenjoyMap(const RotationNumber& alpha, const GapSchedule& gaps)
    : rotation_(alpha), gaps_(gaps), alpha_(alpha.value()) {
  if (!(gaps.constant >= 0.0)) throw ValidationError("gap constant must be >= 0");
  if (gaps.n_max < 0 || gaps.n_max > 20000000) throw ValidationError("gap truncation n_max out of range");
  if (!(gaps.tolerance > 0.0)) throw ValidationError("gap tolerance must be positive");
  if (!alpha.irrational_to_precision()) throw ConstructionError("Denjoy map: rotation number is rational to working precision");
  if (gaps.tail_bound() > gaps.tolerance)
    throw ConstructionError("Denjoy map: gap tail bound exceeds tolerance for the requested truncation");

  total_ = gaps.total();
  scale_ = 1.0 / (1.0 + total_);
  const std::int64_t nmax = gaps.n_max;
  const std::size_t count = static_cast<std::size_t>(2 * nmax + 1);
  std::vector<double> theta(count);
  for (std::int64_t n = -nmax; n <= nmax; ++n) theta[static_cast<std::size_t>(n + nmax)] = orbit_point(n);
  std::vector<std::uint32_t> order(count);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return theta[a] < theta[b]; });

  sorted_base_.resize(count);
  sorted_index_.resize(count);
  prefix_.assign(count + 1, 0.0);
  rank_of_.resize(count);
  double tabulated = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    std::int64_t n = static_cast<std::int64_t>(order[k]) - nmax;
    sorted_base_[k] = theta[order[k]];
    sorted_index_[k] = n;
    rank_of_[order[k]] = static_cast<std::uint32_t>(k);
    prefix_[k + 1] = prefix_[k] + gaps.length(n);
    tabulated += gaps.length(n);
  }
  // Untabulated gaps are spread uniformly (their orbit points equidistribute);
  // the closed-form tail bound is the rigorous error radius.
  tail_ = gaps.tail_bound();
  spread_ = std::max(0.0, total_ - prefix_.back());
}

double DenjoyMap::orbit_point(std::int64_t n) const {
  long double v = static_cast<long double>(n) * static_cast<long double>(alpha_);
  v -= std::floor(v);
  double d = static_cast<double>(v);
  return d >= 1.0 ? 0.0 : d;
}

std::size_t DenjoyMap::rank_below(double y) const {
  return static_cast<std::size_t>(std::lower_bound(sorted_base_.begin(), sorted_base_.end(), y) - sorted_base_.begin());
}

double DenjoyMap::psi(double y) const {
  y = frac(y);
  return (y * (1.0 + spread_) + prefix_[rank_below(y)]) * scale_;
}

double DenjoyMap::psi_lift(double y) const {
  double f = std::floor(y);
  return f + psi(y - f);
}

double DenjoyMap::distance_to_orbit(double y) const {
  y = frac(y);
  std::size_t k = rank_below(y);
  const std::size_t m = sorted_base_.size();
  double a = sorted_base_[k % m], b = sorted_base_[(k + m - 1) % m];
  double d1 = frac(a - y), d2 = frac(y - b);
  return std::min({d1, 1.0 - d1, d2, 1.0 - d2});
}

void DenjoyMap::for_each_affine_piece(double y0, double y1,
                                      const std::function<void(double, double, double, double)>& fn) const {
  if (!(y1 > y0)) return;
  if (y1 - y0 > 1.0 + 1e-12) throw ValidationError("for_each_affine_piece: interval longer than one turn");
  const double slope = (1.0 + spread_) * scale_;
  const std::size_t m = sorted_base_.size();
  for (double j = std::floor(y0); j < y1; j += 1.0) {
    double a = std::max(y0, j) - j, b = std::min(y1, j + 1.0) - j;
    if (!(b > a)) continue;
    auto k = static_cast<std::size_t>(std::upper_bound(sorted_base_.begin(), sorted_base_.end(), a) - sorted_base_.begin());
    while (a < b) {
      double end = k < m ? std::min(b, sorted_base_[k]) : b;
      if (end > a) fn(a + j, end + j, j + (a * (1.0 + spread_) + prefix_[k]) * scale_, slope);
      a = end;
      ++k;
    }
  }
}

CirclePoint DenjoyMap::locate(double x) const {
  x = frac(x);
  // left endpoint of the k-th tabulated gap, increasing in k
  auto left = [&](std::size_t k) { return (sorted_base_[k] * (1.0 + spread_) + prefix_[k]) * scale_; };
  std::size_t lo = 0, hi = sorted_base_.size();
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (left(mid) <= x) lo = mid; else hi = mid;
  }
  const std::size_t k = lo;
  const double l0 = left(k);
  const double width = gaps_.length(sorted_index_[k]) * scale_;
  if (x < l0 + width && width > 0.0) return {sorted_base_[k], sorted_index_[k], (x - l0) / width};
  // right end of the closed gap collapses to the same orbit point
  if (x == l0 + width) return {sorted_base_[k], {}, 0.0};
  double y = (x / scale_ - prefix_[k + 1]) / (1.0 + spread_);
  double upper = k + 1 < sorted_base_.size() ? sorted_base_[k + 1] : 1.0;
  y = std::clamp(y, sorted_base_[k], upper);
  if (y >= 1.0) y = std::nextafter(1.0, 0.0);
  return {y, {}, 0.0};
}

double DenjoyMap::position(const CirclePoint& p) const {
  if (!p.gap) return psi(p.base);
  const std::int64_t n = *p.gap;
  if (std::abs(n) > gaps_.n_max) return psi(orbit_point(n));
  std::size_t k = rank_of_[static_cast<std::size_t>(n + gaps_.n_max)];
  double l0 = (sorted_base_[k] * (1.0 + spread_) + prefix_[k]) * scale_;
  return l0 + p.u * gaps_.length(n) * scale_;
}

Arc DenjoyMap::gap(std::int64_t n) const {
  CirclePoint p{orbit_point(n), n, 0.0};
  return {position(p), std::abs(n) > gaps_.n_max ? 0.0 : gaps_.length(n) * scale_};
}

double DenjoyMap::gap_transfer(std::int64_t n, double u) const {
  if (gaps_.constant == 0.0) return u;
  double r = gaps_.length(n) / gaps_.length(n + 1);
  double u2 = u * u, u3 = u2 * u;
  return 3 * u2 - 2 * u3 + r * (2 * u3 - 3 * u2 + u);
}

double DenjoyMap::gap_transfer_inverse(std::int64_t n, double v) const {
  if (gaps_.constant == 0.0) return v;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 64; ++it) {
    double mid = 0.5 * (lo + hi);
    if (gap_transfer(n, mid) < v) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

CirclePoint DenjoyMap::step(const CirclePoint& p) const {
  if (!p.gap) return {frac(p.base + alpha_), {}, 0.0};
  std::int64_t n = *p.gap;
  return {orbit_point(n + 1), n + 1, gap_transfer(n, p.u)};
}

CirclePoint DenjoyMap::step_back(const CirclePoint& p) const {
  if (!p.gap) return {frac(p.base - alpha_), {}, 0.0};
  std::int64_t n = *p.gap;
  return {orbit_point(n - 1), n - 1, gap_transfer_inverse(n - 1, p.u)};
}

double DenjoyMap::semiconjugacy(double x) const { return locate(x).base; }

double DenjoyMap::semiconjugacy_lift(double x) const {
  double f = std::floor(x);
  return f + semiconjugacy(x - f);
}

DenjoyRef denjoy_build(const RotationNumber& alpha, const GapSchedule& gaps) {
  return std::make_shared<const DenjoyMap>(alpha, gaps);
}

// ---------------------------------------------------------------- Morse-Smale

MorseSmaleMap::MorseSmaleMap(int attractors, double amplitude, double phase)
    : k_(attractors), amplitude_(amplitude), phase_(frac(phase)) {
  if (attractors < 1) throw ValidationError("Morse-Smale map needs at least one attractor");
  if (!(amplitude > 0.0 && amplitude < 1.0)) throw ValidationError("Morse-Smale amplitude must lie in (0,1)");
}

double MorseSmaleMap::lift(double x) const {
  const double w = 2.0 * std::numbers::pi * k_;
  return x + amplitude_ / w * std::sin(w * (x - phase_));
}

double MorseSmaleMap::lift_inverse(double x) const {
  const double w = 2.0 * std::numbers::pi * k_;
  double lo = x - amplitude_ / w, hi = x + amplitude_ / w;
  for (int it = 0; it < 64; ++it) {
    double mid = 0.5 * (lo + hi);
    if (lift(mid) < x) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

CirclePoint MorseSmaleMap::step(const CirclePoint& p) const { return {frac(lift(p.base)), {}, 0.0}; }
CirclePoint MorseSmaleMap::step_back(const CirclePoint& p) const { return {frac(lift_inverse(p.base)), {}, 0.0}; }
CirclePoint MorseSmaleMap::locate(double x) const { return {frac(x), {}, 0.0}; }

std::vector<double> MorseSmaleMap::fixed_points() const {
  std::vector<double> out;
  for (int j = 0; j < 2 * k_; ++j) out.push_back(frac(phase_ + static_cast<double>(j) / (2.0 * k_)));
  return out;
}
std::vector<double> MorseSmaleMap::attractors() const {
  std::vector<double> out;
  for (int j = 1; j < 2 * k_; j += 2) out.push_back(frac(phase_ + static_cast<double>(j) / (2.0 * k_)));
  return out;
}
std::vector<double> MorseSmaleMap::repellers() const {
  std::vector<double> out;
  for (int j = 0; j < 2 * k_; j += 2) out.push_back(frac(phase_ + static_cast<double>(j) / (2.0 * k_)));
  return out;
}

// ---------------------------------------------------------------- BaseMap

namespace {
template <class... F>
struct Overload : F... {
  using F::operator()...;
};
template <class... F>
Overload(F...) -> Overload<F...>;
}  // namespace

const DenjoyMap* BaseMap::denjoy() const {
  if (auto p = std::get_if<DenjoyRef>(&v_)) return p->get();
  return nullptr;
}

const char* BaseMap::name() const {
  return std::visit(Overload{[](const RigidRotation&) { return "rotation"; },
                             [](const DenjoyRef&) { return "denjoy"; },
                             [](const MorseSmaleMap&) { return "morse-smale"; }},
                    v_);
}

CirclePoint BaseMap::step(const CirclePoint& p) const {
  return std::visit(Overload{[&](const RigidRotation& m) { return m.step(p); },
                             [&](const DenjoyRef& m) { return m->step(p); },
                             [&](const MorseSmaleMap& m) { return m.step(p); }},
                    v_);
}
CirclePoint BaseMap::step_back(const CirclePoint& p) const {
  return std::visit(Overload{[&](const RigidRotation& m) { return m.step_back(p); },
                             [&](const DenjoyRef& m) { return m->step_back(p); },
                             [&](const MorseSmaleMap& m) { return m.step_back(p); }},
                    v_);
}
double BaseMap::position(const CirclePoint& p) const {
  return std::visit(Overload{[&](const RigidRotation& m) { return m.position(p); },
                             [&](const DenjoyRef& m) { return m->position(p); },
                             [&](const MorseSmaleMap& m) { return m.position(p); }},
                    v_);
}
CirclePoint BaseMap::locate(double x) const {
  return std::visit(Overload{[&](const RigidRotation& m) { return m.locate(x); },
                             [&](const DenjoyRef& m) { return m->locate(x); },
                             [&](const MorseSmaleMap& m) { return m.locate(x); }},
                    v_);
}
double BaseMap::displacement_window() const {
  return std::visit(Overload{[](const RigidRotation& m) { return m.displacement_window(); },
                             [](const DenjoyRef& m) { return m->displacement_window(); },
                             [](const MorseSmaleMap& m) { return m.displacement_window(); }},
                    v_);
}
double BaseMap::lift_displacement(const CirclePoint& from, const CirclePoint& to) const {
  return into_window(position(to) - position(from), displacement_window());
}

// ---------------------------------------------------------------- partitions and measures

std::size_t CantorPartition::branch_of_base(double y) const {
  double t = base_bounds.front() + frac(y - base_bounds.front());
  auto it = std::upper_bound(base_bounds.begin(), base_bounds.end(), t);
  std::size_t i = static_cast<std::size_t>(it - base_bounds.begin());
  return std::clamp<std::size_t>(i, 1, size()) - 1;
}

std::size_t CantorPartition::branch_of_position(double x) const {
  double t = position_bounds.front() + frac(x - position_bounds.front());
  auto it = std::upper_bound(position_bounds.begin(), position_bounds.end(), t);
  std::size_t i = static_cast<std::size_t>(it - position_bounds.begin());
  return std::clamp<std::size_t>(i, 1, size()) - 1;
}

double CantorPartition::fiber_coordinate(double x) const { return frac(x - position_bounds.front()); }

Arc CantorPartition::branch_arc(std::size_t i) const {
  return {frac(position_bounds[i]), position_bounds[i + 1] - position_bounds[i]};
}

Measured invariant_measure_arc(const DenjoyMap& map, const Arc& arc) {
  const double err = 2.0 * map.gaps().tail_bound();
  if (arc.length >= 1.0) return {1.0, 0.0};
  if (arc.length <= 0.0) return {0.0, 0.0};
  double a = frac(arc.start);
  double b = a + arc.length;
  double v = map.semiconjugacy_lift(b) - map.semiconjugacy(a);
  return {std::clamp(v, 0.0, 1.0), err};
}

CantorPartition partition_by_weights(const DenjoyMap& map, std::span<const double> weights, int max_retries) {
  if (weights.empty()) throw ValidationError("partition_by_weights: empty weight list");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0 && w <= 1.0)) throw ValidationError("partition_by_weights: weight outside (0,1]");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("partition_by_weights: weights must sum to 1");

  const double step = (std::numbers::sqrt2 - 1.0) * 1e-3;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    const double theta0 = frac(attempt * step);
    CantorPartition part;
    part.weights.assign(weights.begin(), weights.end());
    double acc = theta0;
    part.base_bounds.push_back(acc);
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      part.base_bounds.push_back(acc);
    }
    part.base_bounds.push_back(theta0 + 1.0);
    bool clear = true;
    for (std::size_t i = 0; i + 1 < part.base_bounds.size(); ++i)
      if (map.distance_to_orbit(part.base_bounds[i]) < 1e-12) clear = false;
    if (!clear) continue;
    for (double c : part.base_bounds) part.position_bounds.push_back(map.psi_lift(c));
    return part;
  }
  throw ConstructionError("partition_by_weights: boundary collides with a gap after max retries");
}

// ---------------------------------------------------------------- orbit statistics

double rotation_number_estimate(const BaseMap& map, double x0, std::int64_t n) {
  if (n < 1) throw ValidationError("rotation_number_estimate: N must be >= 1");
  CirclePoint p = map.locate(x0);
  long double lift = 0.0L;
  for (std::int64_t k = 0; k < n; ++k) {
    CirclePoint q = map.step(p);
    lift += map.lift_displacement(p, q);
    p = q;
  }
  return static_cast<double>(lift / static_cast<long double>(n));
}

double rotation_bound_ratio(const BaseMap& map, double x0, std::int64_t n_max, double rho) {
  CirclePoint p = map.locate(x0);
  long double lift = 0.0L;
  double worst = 0.0;
  for (std::int64_t k = 1; k <= n_max; ++k) {
    CirclePoint q = map.step(p);
    lift += map.lift_displacement(p, q);
    p = q;
    worst = std::max(worst, static_cast<double>(std::abs(lift - static_cast<long double>(k) * rho)));
  }
  return worst;
}

StepObservable StepObservable::constant(const Vec& c) { return {{0.0}, {c}}; }

StepObservable StepObservable::arc_indicator(const Arc& arc) {
  if (arc.length >= 1.0) return constant(Vec{1.0});
  if (arc.length <= 0.0) return constant(Vec{0.0});
  double a = frac(arc.start), b = frac(arc.start + arc.length);
  if (a < b) return {{a, b}, {Vec{1.0}, Vec{0.0}}};
  return {{b, a}, {Vec{0.0}, Vec{1.0}}};
}

StepObservable StepObservable::partition_indicator(const CantorPartition& part) {
  const std::size_t r = part.size();
  if (r > static_cast<std::size_t>(kMaxDim)) throw ValidationError("partition_indicator: too many branches");
  std::vector<std::pair<double, std::size_t>> pieces;
  for (std::size_t i = 0; i < r; ++i) pieces.emplace_back(frac(part.position_bounds[i]), i);
  std::sort(pieces.begin(), pieces.end());
  StepObservable obs;
  for (auto& [b, i] : pieces) {
    obs.breaks.push_back(b);
    obs.values.push_back(Vec::unit(static_cast<int>(r), static_cast<int>(i)));
  }
  return obs;
}

Vec StepObservable::operator()(double x) const {
  auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  if (it == breaks.begin()) return values.back();
  return values[static_cast<std::size_t>(it - breaks.begin()) - 1];
}

Vec birkhoff_average(const BaseMap& map, const StepObservable& obs, double x0, std::int64_t n) {
  if (n < 1) throw ValidationError("birkhoff_average: N must be >= 1");
  CirclePoint p = map.locate(x0);
  Vec acc(obs.dim());
  for (std::int64_t k = 0; k < n; ++k) {
    acc += obs(map.position(p));
    p = map.step(p);
  }
  return acc / static_cast<double>(n);
}

double BirkhoffSweep::worst_deviation(const Vec& reference) const {
  double w = 0.0;
  for (const auto& a : averages) w = std::max(w, (a - reference).max_abs());
  return w;
}

namespace {
void finish_sweep(BirkhoffSweep& out, int dim) {
  out.mean = Vec(dim);
  for (const auto& a : out.averages) out.mean += a;
  if (!out.averages.empty()) out.mean *= 1.0 / static_cast<double>(out.averages.size());
}
}  // namespace

BirkhoffSweep birkhoff_sweep(const BaseMap& map, const StepObservable& obs, std::span<const double> starts, std::int64_t n) {
  BirkhoffSweep out;
  out.averages.assign(starts.size(), Vec(obs.dim()));
  const auto count = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) out.averages[static_cast<std::size_t>(i)] = birkhoff_average(map, obs, starts[static_cast<std::size_t>(i)], n);
  finish_sweep(out, obs.dim());
  return out;
}

BirkhoffSweep birkhoff_sweep_serial(const BaseMap& map, const StepObservable& obs, std::span<const double> starts, std::int64_t n) {
  BirkhoffSweep out;
  for (double x0 : starts) out.averages.push_back(birkhoff_average(map, obs, x0, n));
  finish_sweep(out, obs.dim());
  return out;
}

std::vector<double> sample_cantor_points(const DenjoyMap& map, int count, double offset) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    double y = frac(offset + static_cast<double>(j) / count);
    while (map.distance_to_orbit(y) < 1e-12) y = frac(y + 1e-9);
    out.push_back(map.psi(y));
  }
  return out;
}

}  // namespace solab
