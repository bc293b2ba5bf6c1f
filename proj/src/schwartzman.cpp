#include "solab/schwartzman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "solab/error.hpp"

namespace solab {

namespace {

constexpr double kGoldenConjugate = 0.6180339887498949;

double wrap01(double x) { return x - std::floor(x); }

void check_horizon(const CurveSampler& c, const Horizon& h) {
  if (!(h.s < h.t)) throw ValidationError("horizon: requires s < t", "horizon");
  if (h.s < c.begin() - 1e-9 || h.t > c.end() + 1e-9) throw ValidationError("horizon: outside the curve range", "horizon");
}

double trig_lipschitz(const TrigPolynomial& p) {
  double l = 0.0;
  for (const auto& term : p.terms())
    l += 2.0 * std::numbers::pi * term.frequency.norm() * (std::abs(term.cos_coefficient) + std::abs(term.sin_coefficient));
  return l;
}

EstimateSeries make_series(Estimator tag, const CurveSampler& c, const std::vector<Horizon>& hs,
                           const ConvergenceRule& rule, const auto& value_of) {
  EstimateSeries out;
  out.tag = tag;
  for (const auto& h : hs) {
    check_horizon(c, h);
    out.estimates.push_back({h, value_of(h), tag});
  }
  declare_convergence(out, rule);
  return out;
}

double max_pairwise(const std::vector<EstimateSeries>& series) {
  double worst = 0.0;
  for (std::size_t a = 0; a < series.size(); ++a)
    for (std::size_t b = a + 1; b < series.size(); ++b) {
      if (series[a].estimates.empty() || series[b].estimates.empty()) continue;
      worst = std::max(worst, series[a].estimates.back().value.dist(series[b].estimates.back().value));
    }
  return worst;
}

void collapse(std::vector<HomologyVector>& reps, const HomologyVector& v, double radius) {
  for (const auto& r : reps)
    if (r.dist(v) <= radius) return;
  reps.push_back(v);
}

}  // namespace

CurveSampler CurveSampler::linear_flow(const Vec& x0, const Vec& v, double begin, double end) {
  if (x0.dim() != v.dim()) throw ValidationError("linear flow: dimension mismatch", "direction");
  if (!(begin < end)) throw ValidationError("linear flow: empty parameter range", "range");
  CurveSampler c;
  c.x0_ = x0;
  c.v_ = v;
  c.begin_ = begin;
  c.end_ = end;
  return c;
}

CurveSampler CurveSampler::path(PLPath p) {
  if (p.size() < 2) throw ValidationError("curve: path needs at least two vertices", "path");
  CurveSampler c;
  c.x0_ = p.vertices().front();
  c.v_ = Vec(p.dim());
  c.begin_ = p.param_begin();
  c.end_ = p.param_end();
  c.path_ = std::move(p);
  return c;
}

Parametrization CurveSampler::parametrization() const {
  return path_ ? path_->parametrization() : Parametrization::kTime;
}

Vec CurveSampler::lift(double u) const { return path_ ? path_->lift_at(u) : x0_ + v_ * u; }

std::vector<Vec> CurveSampler::piece(double s, double t) const {
  std::vector<Vec> out{lift(s)};
  if (path_) {
    const auto& ps = path_->params();
    auto lo = std::upper_bound(ps.begin(), ps.end(), s);
    auto hi = std::lower_bound(ps.begin(), ps.end(), t);
    for (auto it = lo; it < hi; ++it) out.push_back(path_->vertices()[it - ps.begin()]);
  }
  out.push_back(lift(t));
  return out;
}

CurveSampler CurveSampler::reversed() const {
  if (!path_) return linear_flow(x0_, -v_, -end_, -begin_);
  std::vector<Vec> verts(path_->vertices().rbegin(), path_->vertices().rend());
  if (path_->parametrization() == Parametrization::kArcLength) return path(PLPath::arc_length(verts, -end_));
  std::vector<double> times;
  for (auto it = path_->params().rbegin(); it != path_->params().rend(); ++it) times.push_back(-*it);
  return path(PLPath::timed(verts, times));
}

const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::kClosing: return "closing";
    case Estimator::kCalibrating: return "calibrating";
    case Estimator::kForm: return "form";
    case Estimator::kCircleMap: return "circle-map";
    case Estimator::kCrossing: return "crossing";
  }
  return "?";
}

std::vector<Horizon> geometric_horizons(double t_max, int count, double s_ratio) {
  if (count < 1 || !(t_max > 0)) throw ValidationError("horizons: need count >= 1 and t_max > 0", "horizons");
  std::vector<Horizon> hs;
  for (int k = 0; k < count; ++k) {
    double t = std::ldexp(t_max, -(count - 1 - k));
    hs.push_back({-s_ratio * t, t});
  }
  return hs;
}

void declare_convergence(EstimateSeries& series, const ConvergenceRule& rule) {
  series.converged = false;
  series.limit.reset();
  const auto& e = series.estimates;
  if (static_cast<int>(e.size()) < rule.window) {
    series.diagnostics = "fewer horizons than the Cauchy window";
    return;
  }
  const HomologyVector& last = e.back().value;
  double spread = 0.0;
  for (std::size_t k = e.size() - rule.window; k < e.size(); ++k) spread = std::max(spread, e[k].value.dist(last));
  if (spread <= rule.tolerance) {
    series.converged = true;
    series.limit = last;
    series.diagnostics.clear();
  } else {
    series.diagnostics = "window spread " + std::to_string(spread) + " exceeds tolerance";
  }
}

EstimatorConfig EstimatorConfig::standard(int n, std::uint64_t seed) {
  EstimatorConfig cfg;
  cfg.dim = n;
  cfg.seed = seed;
  cfg.calibrating = build_calibrating_pou({BumpProfile::Shape::kPolynomial, 0.75, 1}, Vec(n));
  auto small = [&](std::uint64_t sd) {
    auto terms = TrigPolynomial::random(n, 3, 2, sd).terms();
    for (auto& t : terms) {
      t.cos_coefficient *= 0.25;
      t.sin_coefficient *= 0.25;
    }
    return TrigPolynomial(terms);
  };
  for (int j = 0; j < n; ++j) {
    TestForm f = TestForm::constant_form(Vec::unit(n, j));
    f.exact = small(seed * 1000 + j);
    cfg.forms.push_back(f);
    cfg.circle_maps.push_back(small(seed * 1000 + 500 + j));
  }
  return cfg;
}

double circle_map_rate(const CurveSampler& c, const Horizon& h, const Vec& m, const TrigPolynomial& psi) {
  check_horizon(c, h);
  auto f = [&](const Vec& x) { return wrap01(m.dot(x) + (psi.empty() ? 0.0 : psi(x))); };
  const double lip = m.norm() + trig_lipschitz(psi);
  auto verts = c.piece(h.s, h.t);
  double prev = f(verts.front());
  double lift = 0.0;
  for (std::size_t k = 1; k < verts.size(); ++k) {
    const Vec& a = verts[k - 1];
    const Vec d = verts[k] - a;
    // keeps |f(next) - f(prev)| < 1/4 so unwrapping is unambiguous
    const auto sub = static_cast<std::int64_t>(std::ceil(d.norm() * lip / 0.25)) + 1;
    for (std::int64_t q = 1; q <= sub; ++q) {
      double cur = f(a + d * (static_cast<double>(q) / sub));
      double step = cur - prev;
      lift += step - std::round(step);
      prev = cur;
    }
  }
  return lift / (h.t - h.s);
}

CrossingRate crossing_rate(const CurveSampler& c, const Horizon& h, int j, int max_retries) {
  check_horizon(c, h);
  if (j < 0 || j >= c.dim()) throw ValidationError("crossing: coordinate out of range", "coordinate");
  auto verts = c.piece(h.s, h.t);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    const double level = wrap01(0.5 + attempt * kGoldenConjugate);
    bool tangent = false;
    std::int64_t count = 0;
    for (std::size_t k = 0; k < verts.size() && !tangent; ++k) {
      double r = wrap01(verts[k][j] - level);
      if (std::min(r, 1.0 - r) < 1e-12) tangent = true;
      if (k > 0) count += static_cast<std::int64_t>(std::floor(verts[k][j] - level) - std::floor(verts[k - 1][j] - level));
    }
    if (tangent) continue;
    return {static_cast<double>(count) / (h.t - h.s), count, level, attempt};
  }
  throw DegenerateError("crossing: no regular level found within the retry budget");
}

HomologyVector estimate(const CurveSampler& c, const Horizon& h, Estimator e, const EstimatorConfig& cfg) {
  check_horizon(c, h);
  const int n = c.dim();
  const double len = h.t - h.s;
  switch (e) {
    case Estimator::kClosing: return close_lift(c.lift(h.s), c.lift(h.t)) / len;
    case Estimator::kCalibrating: {
      Vec d = cfg.calibrating(c.lift(h.t)) - cfg.calibrating(c.lift(h.s));
      return HomologyVector(d / len);
    }
    case Estimator::kForm: {
      if (static_cast<int>(cfg.forms.size()) != n) throw ValidationError("form estimator: need one form per axis", "forms");
      auto verts = c.piece(h.s, h.t);
      Vec out(n);
      for (int j = 0; j < n; ++j) {
        const TestForm& f = cfg.forms[j];
        if (!(f.constant == Vec::unit(n, j)))
          throw ValidationError("form estimator: forms[j] must have class e_j", "forms[" + std::to_string(j) + "]");
        double acc = 0.0;
        for (std::size_t k = 1; k < verts.size(); ++k) acc += f.constant.dot(verts[k] - verts[k - 1]);
        acc += f.potential(verts.back()) - f.potential(verts.front());
        out[j] = acc / len;
      }
      return HomologyVector(out);
    }
    case Estimator::kCircleMap: {
      if (static_cast<int>(cfg.circle_maps.size()) != n)
        throw ValidationError("circle-map estimator: need one map per axis", "circle_maps");
      Vec out(n);
      for (int j = 0; j < n; ++j) out[j] = circle_map_rate(c, h, Vec::unit(n, j), cfg.circle_maps[j]);
      return HomologyVector(out);
    }
    case Estimator::kCrossing: {
      Vec out(n);
      for (int j = 0; j < n; ++j) out[j] = crossing_rate(c, h, j, cfg.crossing_retries).rate;
      return HomologyVector(out);
    }
  }
  throw ValidationError("unknown estimator");
}

EstimateSeries asymptotic_class_closing(const CurveSampler& c, const std::vector<Horizon>& hs,
                                        const ConvergenceRule& rule) {
  return make_series(Estimator::kClosing, c, hs, rule,
                     [&](const Horizon& h) { return close_lift(c.lift(h.s), c.lift(h.t)) / (h.t - h.s); });
}

EstimateSeries asymptotic_class_calibrating(const CurveSampler& c, const CalibratingFunction& phi,
                                            const std::vector<Horizon>& hs, const ConvergenceRule& rule) {
  return make_series(Estimator::kCalibrating, c, hs, rule, [&](const Horizon& h) {
    return HomologyVector((phi(c.lift(h.t)) - phi(c.lift(h.s))) / (h.t - h.s));
  });
}

EstimateSeries asymptotic_class_form(const CurveSampler& c, const std::vector<TestForm>& forms,
                                     const std::vector<Horizon>& hs, const ConvergenceRule& rule) {
  EstimatorConfig cfg;
  cfg.forms = forms;
  return make_series(Estimator::kForm, c, hs, rule,
                     [&](const Horizon& h) { return estimate(c, h, Estimator::kForm, cfg); });
}

EstimateSeries asymptotic_class_circle_map(const CurveSampler& c, const std::vector<TrigPolynomial>& circle_maps,
                                           const std::vector<Horizon>& hs, const ConvergenceRule& rule) {
  EstimatorConfig cfg;
  cfg.circle_maps = circle_maps;
  return make_series(Estimator::kCircleMap, c, hs, rule,
                     [&](const Horizon& h) { return estimate(c, h, Estimator::kCircleMap, cfg); });
}

EstimateSeries asymptotic_class_crossing(const CurveSampler& c, const std::vector<Horizon>& hs,
                                         const ConvergenceRule& rule, int max_retries) {
  EstimatorConfig cfg;
  cfg.crossing_retries = max_retries;
  return make_series(Estimator::kCrossing, c, hs, rule,
                     [&](const Horizon& h) { return estimate(c, h, Estimator::kCrossing, cfg); });
}

namespace {

std::vector<EstimatorReport> assemble(const std::vector<HomologyVector>& values, std::size_t curves,
                                      const std::vector<Horizon>& hs, const ConvergenceRule& rule) {
  std::vector<EstimatorReport> out(curves);
  for (std::size_t ci = 0; ci < curves; ++ci) {
    for (int e = 0; e < kEstimatorCount; ++e) {
      EstimateSeries s;
      s.tag = static_cast<Estimator>(e);
      for (std::size_t hi = 0; hi < hs.size(); ++hi)
        s.estimates.push_back({hs[hi], values[(ci * kEstimatorCount + e) * hs.size() + hi], s.tag});
      declare_convergence(s, rule);
      out[ci].series.push_back(std::move(s));
    }
    out[ci].max_disagreement = max_pairwise(out[ci].series);
  }
  return out;
}

}  // namespace

EstimatorReport five_estimators(const CurveSampler& c, const std::vector<Horizon>& hs, const EstimatorConfig& cfg,
                                const ConvergenceRule& rule) {
  return estimator_sweep({c}, hs, cfg, rule).front();
}

std::vector<EstimatorReport> estimator_sweep(const std::vector<CurveSampler>& curves, const std::vector<Horizon>& hs,
                                             const EstimatorConfig& cfg, const ConvergenceRule& rule) {
  const std::size_t tasks = curves.size() * kEstimatorCount * hs.size();
  std::vector<HomologyVector> values(tasks);
  for (const auto& c : curves)
    for (const auto& h : hs) check_horizon(c, h);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(tasks); ++k) {
    const std::size_t hi = k % hs.size();
    const std::size_t e = (k / hs.size()) % kEstimatorCount;
    const std::size_t ci = k / (hs.size() * kEstimatorCount);
    try {
      values[k] = estimate(curves[ci], hs[hi], static_cast<Estimator>(e), cfg);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return assemble(values, curves.size(), hs, rule);
}

std::vector<EstimatorReport> estimator_sweep_serial(const std::vector<CurveSampler>& curves,
                                                    const std::vector<Horizon>& hs, const EstimatorConfig& cfg,
                                                    const ConvergenceRule& rule) {
  std::vector<HomologyVector> values;
  for (const auto& c : curves)
    for (int e = 0; e < kEstimatorCount; ++e)
      for (const auto& h : hs) values.push_back(estimate(c, h, static_cast<Estimator>(e), cfg));
  return assemble(values, curves.size(), hs, rule);
}

ClusterEstimate cluster_estimate(const CurveSampler& c, const ClusterGrid& grid) {
  if (grid.horizons.empty()) throw ValidationError("cluster grid: no horizons", "horizons");
  if (!std::is_sorted(grid.horizons.begin(), grid.horizons.end()))
    throw ValidationError("cluster grid: horizons must increase", "horizons");
  ClusterEstimate out;
  out.radius = grid.radius;
  const std::size_t count = grid.horizons.size();
  const std::size_t first = count - std::min<std::size_t>(count, std::max(grid.tail, 1));
  const bool has_future = c.begin() <= 0.0 && c.end() > 0.0;
  if (!has_future) return out;
  auto cls = [&](double s, double t) { return close_lift(c.lift(s), c.lift(t)) / (t - s); };
  auto in_range = [&](double s, double t) { return s >= c.begin() && t <= c.end() && s < t; };

  // one-sided values on the whole grid, so the tail can look one step ahead
  std::vector<std::optional<HomologyVector>> pos(count);
  std::vector<std::vector<std::optional<HomologyVector>>> neg(grid.ratios.size(), std::vector<std::optional<HomologyVector>>(count));
  for (std::size_t k = 0; k < count; ++k) {
    double t = grid.horizons[k];
    if (in_range(0.0, t)) pos[k] = cls(0.0, t);
    for (std::size_t r = 0; r < grid.ratios.size(); ++r) {
      double s = -grid.ratios[r] * t;
      if (grid.ratios[r] > 0 && in_range(s, 0.0)) neg[r][k] = cls(s, 0.0);
    }
  }
  auto settled = [&](const std::vector<std::optional<HomologyVector>>& v, std::size_t k) {
    if (!v[k]) return false;
    std::size_t other = k + 1 < count ? k + 1 : k - 1;
    if (count == 1) return true;
    return v[other].has_value() && v[k]->dist(*v[other]) <= grid.radius;
  };

  std::vector<HomologyVector> raw;
  for (std::size_t k = first; k < count; ++k) {
    double t = grid.horizons[k];
    if (pos[k]) collapse(out.positive, *pos[k], grid.radius);
    for (std::size_t r = 0; r < grid.ratios.size(); ++r) {
      double s = -grid.ratios[r] * t;
      if (neg[r][k]) collapse(out.negative, *neg[r][k], grid.radius);
      if (!in_range(s, t)) continue;
      HomologyVector v = cls(s, t);
      raw.push_back(v);
      collapse(out.all, v, grid.radius);
      if (grid.ratios[r] > 0 && settled(pos, k) && settled(neg[r], k)) collapse(out.balanced, v, grid.radius);
    }
  }
  for (std::size_t a = 0; a < raw.size(); ++a)
    for (std::size_t b = a + 1; b < raw.size(); ++b) out.all_diameter = std::max(out.all_diameter, raw[a].dist(raw[b]));
  return out;
}

std::vector<Vec> cluster_directions(const CurveSampler& c, const std::vector<double>& ts, double min_fraction,
                                    double angle_radius) {
  if (c.begin() > 0.0) throw ValidationError("cluster directions: curve must be defined at 0", "curve");
  const Vec origin = c.lift(0.0);
  std::vector<HomologyVector> classes;
  double largest = 0.0;
  for (double t : ts) {
    if (t <= 0.0 || t > c.end()) continue;
    classes.push_back(close_lift(origin, c.lift(t)));
    largest = std::max(largest, classes.back().norm());
  }
  std::vector<Vec> dirs;
  if (largest == 0.0) return dirs;
  for (const auto& k : classes) {
    if (k.norm() < min_fraction * largest) continue;
    Vec u = k.vec() / k.norm();
    bool seen = false;
    for (const auto& d : dirs)
      if (std::acos(std::clamp(d.dot(u), -1.0, 1.0)) <= angle_radius) {
        seen = true;
        break;
      }
    if (!seen) dirs.push_back(u);
  }
  return dirs;
}

PLPath two_ray_oscillator(int excursions, double growth, double offset) {
  if (excursions < 2) throw ValidationError("two-ray oscillator: need at least two excursions", "excursions");
  if (!(growth > 1.0)) throw ValidationError("two-ray oscillator: growth must exceed 1", "growth");
  if (!(offset > 0.0)) throw ValidationError("two-ray oscillator: offset must be positive", "offset");
  std::vector<Vec> v{{0.0, 0.0}};
  double len = 1.0;
  for (int k = 0; k < excursions; ++k, len *= growth) {
    v.push_back(k % 2 == 0 ? Vec{len, offset} : Vec{offset, len});
    v.push_back(Vec{0.0, 0.0});
  }
  return PLPath::arc_length(std::move(v));
}

namespace {

LeafClass one_leaf(const ImmersedSolenoid& s, double x, std::int64_t returns) {
  LeafTrace tr = trace_leaf(s, x, 0, returns, Parametrization::kTime);
  HomologyVector k = close_curve(tr.path, tr.path.param_begin(), tr.path.param_end());
  LeafClass out;
  out.start = x;
  out.returns = returns;
  const double length = tr.path.length();
  out.time_class = k / static_cast<double>(returns);
  out.arc_class = k / length;
  out.mean_return_length = length / static_cast<double>(returns);
  return out;
}

}  // namespace

std::vector<LeafClass> leaf_class_sweep(const ImmersedSolenoid& s, const std::vector<double>& starts,
                                        std::int64_t returns) {
  if (returns < 1) throw ValidationError("leaf sweep: returns must be >= 1", "returns");
  std::vector<LeafClass> out(starts.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(starts.size()); ++i) {
    try {
      out[i] = one_leaf(s, starts[i], returns);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<LeafClass> leaf_class_sweep_serial(const ImmersedSolenoid& s, const std::vector<double>& starts,
                                               std::int64_t returns) {
  if (returns < 1) throw ValidationError("leaf sweep: returns must be >= 1", "returns");
  std::vector<LeafClass> out;
  for (double x : starts) out.push_back(one_leaf(s, x, returns));
  return out;
}

}  // namespace solab
