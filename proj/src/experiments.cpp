#include "solab/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>

#include "solab/error.hpp"
#include "solab/intersection.hpp"
#include "solab/schwartzman.hpp"

namespace solab {

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(RunReport& r, std::string stage) : r_(r), stage_(std::move(stage)), t0_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    r_.stages.push_back({stage_, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count()});
  }

 private:
  RunReport& r_;
  std::string stage_;
  std::chrono::steady_clock::time_point t0_;
};

std::string num(double x) { return format_number(x); }
std::string num(std::int64_t x) { return std::to_string(x); }

double total_seconds(const RunReport& r) {
  double t = 0.0;
  for (const auto& s : r.stages) t += s.seconds;
  return t;
}

void runtime_check(RunReport& rep, std::optional<double> limit) {
  if (limit) rep.check_at_most("runtime_s", total_seconds(rep), *limit, "wall clock over all stages");
}

std::optional<double> read_runtime_limit(ManifestReader& r) {
  if (!r.has("runtime_limit_s")) return std::nullopt;
  return r.positive("runtime_limit_s");
}

double component_error(const HomologyVector& a, const HomologyVector& b) { return (a.vec() - b.vec()).max_abs(); }

/// Offset for Cantor sample points derived from the seed.
double sample_offset(std::uint64_t seed) {
  double x = 0.123456789 + 0.6180339887498949 * static_cast<double>(seed % 1000003);
  return x - std::floor(x);
}

std::vector<std::string> vec_cells(const Vec& v) {
  std::vector<std::string> out;
  for (int j = 0; j < v.dim(); ++j) out.push_back(num(v[j]));
  return out;
}

std::vector<std::string> axis_columns(const std::string& stem, int n) {
  std::vector<std::string> out;
  for (int j = 1; j <= n; ++j) out.push_back(stem + std::to_string(j));
  return out;
}

template <class... Parts>
std::vector<std::string> concat(Parts&&... parts) {
  std::vector<std::string> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

struct Context {
  ManifestReader& r;
  std::uint64_t seed;
  double scale;
  double tol(const std::string& key, std::optional<double> fallback = std::nullopt) {
    return r.positive("tolerances." + key, fallback) * scale;
  }
};

// --- realize -----------------------------------------------------------

RunReport run_realize(Context& cx) {
  ManifestReader& r = cx.r;
  BaseSpec base = read_base(r);
  CycleLibrary lib = read_library(r);
  const int n = lib.dim();
  ImmersionLayout layout = read_layout(r, n);
  auto classes = read_classes(r, "classes", n, cx.seed);
  const double tol_current = cx.tol("current");
  const bool exact = r.has("exact_forms");
  std::int64_t forms = 0, terms = 0, max_freq = 0;
  double tol_exact = 0.0;
  if (exact) {
    forms = r.positive_integer("exact_forms.count");
    terms = r.positive_integer("exact_forms.terms", 4);
    max_freq = r.positive_integer("exact_forms.max_frequency", 3);
    tol_exact = cx.tol("exact");
  }
  auto limit = read_runtime_limit(r);
  r.finish();

  RunReport rep;
  rep.subcommand = "realize";
  DenjoyRef d;
  {
    Stopwatch sw(rep, "denjoy_build");
    d = denjoy_build(base.alpha, base.gaps);
  }
  std::vector<ImmersedSolenoid> sols;
  Table t{"realize", concat(std::vector<std::string>{"index"}, axis_columns("a", n), axis_columns("current", n),
                            std::vector<std::string>{"max_error", "branches", "scale"}), {}};
  double worst = 0.0;
  {
    Stopwatch sw(rep, "realize_and_pair");
    for (std::size_t k = 0; k < classes.size(); ++k) {
      sols.push_back(realize(classes[k], lib, d, layout));
      HomologyVector cur = generalized_current(sols.back());
      double err = component_error(cur, classes[k]);
      worst = std::max(worst, err);
      t.add(concat(std::vector<std::string>{num(static_cast<std::int64_t>(k))}, vec_cells(classes[k].vec()),
                   vec_cells(cur.vec()),
                   std::vector<std::string>{num(err), num(static_cast<std::int64_t>(sols.back().branches().size())),
                                            num(sols.back().decomposition().scale)}));
    }
  }
  rep.tables.push_back(std::move(t));
  rep.check_at_most("current_max_error", worst, tol_current, "max component |current - a| over classes");

  if (exact) {
    Stopwatch sw(rep, "exact_forms");
    Table e{"exactness", {"index", "class_index", "terms", "max_frequency", "pairing"}, {}};
    double worst_exact = 0.0;
    for (std::int64_t k = 0; k < forms; ++k) {
      std::size_t which = static_cast<std::size_t>(k) % sols.size();
      TrigPolynomial phi = TrigPolynomial::random(n, static_cast<int>(terms), static_cast<int>(max_freq),
                                                  cx.seed * 7919 + static_cast<std::uint64_t>(k));
      double p = pair_current_form(sols[which], TestForm::exact_form(n, phi));
      worst_exact = std::max(worst_exact, std::abs(p));
      e.add({num(k), num(static_cast<std::int64_t>(which)), num(terms), num(max_freq), num(p)});
    }
    rep.tables.push_back(std::move(e));
    rep.check_at_most("exact_pairing_max", worst_exact, tol_exact, "max |<current, d phi>| over random phi");
  }
  runtime_check(rep, limit);
  return rep;
}

// --- schwartzman ---------------------------------------------------------

struct NamedCurve {
  std::string name;
  CurveSampler curve;
  HomologyVector expected;
};

std::vector<NamedCurve> read_flows(ManifestReader& r, int n, double begin, double end) {
  std::vector<NamedCurve> out;
  if (!r.has("flows")) return out;
  Vec x0(n);
  for (int j = 0; j < n; ++j) x0[j] = 0.1 + 0.17 * j;
  std::vector<Vec> dirs = r.vectors("flows");
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (dirs[i].dim() != n) {
      r.fail("flows[" + std::to_string(i) + "]", "dimension must match library.dim");
      continue;
    }
    out.push_back({"flow" + std::to_string(i), CurveSampler::linear_flow(x0, dirs[i], begin, end), HomologyVector(dirs[i])});
  }
  return out;
}

struct LeafSpec {
  bool present = false;
  HomologyVector cls;
  std::int64_t count = 0;
  std::int64_t returns = 0;
};

LeafSpec read_leaves(ManifestReader& r, const std::string& path, int n, std::optional<std::int64_t> default_returns) {
  LeafSpec s;
  if (!r.has(path)) return s;
  s.present = true;
  std::vector<double> c = r.numbers(path + ".class");
  if (static_cast<int>(c.size()) != n) {
    r.fail(path + ".class", "dimension must match library.dim");
    c.assign(n, 0.0);
  }
  s.cls = HomologyVector(Vec::from_span(c));
  s.count = r.positive_integer(path + ".count");
  s.returns = r.positive_integer(path + ".returns", default_returns);
  return s;
}

RunReport run_schwartzman(Context& cx) {
  ManifestReader& r = cx.r;
  BaseSpec base = read_base(r);
  CycleLibrary lib = read_library(r);
  const int n = lib.dim();
  ImmersionLayout layout = read_layout(r, n);
  const bool estimators = r.has("flows") || r.has("leaves");
  double t_max = 0.0;
  std::int64_t count = 0;
  double tol_agree = 0.0, tol_class = 0.0;
  if (estimators) {
    t_max = r.positive("horizon.t_max");
    count = r.positive_integer("horizon.count", 6);
    tol_agree = cx.tol("agreement");
    tol_class = cx.tol("class");
  }
  auto flows = read_flows(r, n, 0.0, t_max > 0 ? t_max : 1.0);
  LeafSpec leaves = read_leaves(r, "leaves", n, static_cast<std::int64_t>(std::ceil(t_max)));
  if (leaves.present && leaves.returns < t_max) r.fail("leaves.returns", "must cover horizon.t_max");
  LeafSpec sweep = read_leaves(r, "leaf_classes", n, std::nullopt);
  double tol_time = 0.0, tol_arc = 0.0;
  if (sweep.present) {
    tol_time = cx.tol("time_class");
    tol_arc = cx.tol("arc_class");
  }
  if (!estimators && !sweep.present) r.fail("flows", "need at least one of flows, leaves, leaf_classes");
  ConvergenceRule rule;
  rule.window = static_cast<int>(r.positive_integer("convergence.window", 5));
  rule.tolerance = r.positive("convergence.tolerance", 0.01) * cx.scale;
  auto limit = read_runtime_limit(r);
  r.finish();

  RunReport rep;
  rep.subcommand = "schwartzman";
  DenjoyRef d;
  if (leaves.present || sweep.present) {
    Stopwatch sw(rep, "denjoy_build");
    d = denjoy_build(base.alpha, base.gaps);
  }

  if (estimators) {
    std::vector<NamedCurve> curves = flows;
    if (leaves.present) {
      Stopwatch sw(rep, "trace_leaves");
      ImmersedSolenoid s = realize(leaves.cls, lib, d, layout);
      auto starts = sample_cantor_points(*d, static_cast<int>(leaves.count), sample_offset(cx.seed));
      for (std::size_t i = 0; i < starts.size(); ++i)
        curves.push_back({"leaf" + std::to_string(i), CurveSampler::path(trace_leaf(s, starts[i], 0, leaves.returns).path),
                          leaves.cls});
    }
    auto hs = geometric_horizons(t_max, static_cast<int>(count));
    EstimatorConfig cfg = EstimatorConfig::standard(n, cx.seed);
    std::vector<CurveSampler> samplers;
    for (const auto& c : curves) samplers.push_back(c.curve);
    std::vector<EstimatorReport> reports;
    {
      Stopwatch sw(rep, "estimator_sweep");
      reports = estimator_sweep(samplers, hs, cfg, rule);
    }
    Table conv{"schwartzman_convergence", concat(std::vector<std::string>{"curve", "estimator", "s", "t"}, axis_columns("value", n)), {}};
    Table summary{"schwartzman_summary", concat(std::vector<std::string>{"curve"}, axis_columns("expected", n),
                                               std::vector<std::string>{"max_disagreement", "max_class_error", "all_converged"}), {}};
    double worst_agree = 0.0, worst_class = 0.0;
    bool all_converged = true;
    for (std::size_t i = 0; i < curves.size(); ++i) {
      double class_err = 0.0;
      bool conv_all = true;
      for (const auto& series : reports[i].series) {
        for (const auto& e : series.estimates)
          conv.add(concat(std::vector<std::string>{curves[i].name, to_string(series.tag), num(e.horizon.s), num(e.horizon.t)},
                          vec_cells(e.value.vec())));
        class_err = std::max(class_err, series.estimates.back().value.dist(curves[i].expected));
        conv_all = conv_all && series.converged;
      }
      worst_agree = std::max(worst_agree, reports[i].max_disagreement);
      worst_class = std::max(worst_class, class_err);
      all_converged = all_converged && conv_all;
      summary.add(concat(std::vector<std::string>{curves[i].name}, vec_cells(curves[i].expected.vec()),
                         std::vector<std::string>{num(reports[i].max_disagreement), num(class_err), conv_all ? "1" : "0"}));
    }
    rep.tables.push_back(std::move(conv));
    rep.tables.push_back(std::move(summary));
    rep.check_at_most("estimator_agreement", worst_agree, tol_agree, "pairwise at t - s = " + num(t_max));
    rep.check_at_most("estimator_class_error", worst_class, tol_class, "final values against the expected class");
    rep.check_true("estimators_converged", all_converged, "Cauchy window " + std::to_string(rule.window));
  }

  if (sweep.present) {
    ImmersedSolenoid s = realize(sweep.cls, lib, d, layout);
    auto starts = sample_cantor_points(*d, static_cast<int>(sweep.count), sample_offset(cx.seed + 1));
    std::vector<LeafClass> classes;
    {
      Stopwatch sw(rep, "leaf_class_sweep");
      classes = leaf_class_sweep(s, starts, sweep.returns);
    }
    double mean_len = 0.0;
    for (const auto& c : classes) mean_len += c.mean_return_length;
    mean_len /= static_cast<double>(classes.size());
    HomologyVector arc_target = sweep.cls / mean_len;
    Table t{"leaf_classes", concat(std::vector<std::string>{"leaf", "start", "returns"}, axis_columns("time", n),
                                   axis_columns("arc", n), std::vector<std::string>{"mean_return_length", "time_error", "arc_error"}), {}};
    double worst_time = 0.0, worst_arc = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      double et = classes[i].time_class.dist(sweep.cls), ea = classes[i].arc_class.dist(arc_target);
      worst_time = std::max(worst_time, et);
      worst_arc = std::max(worst_arc, ea);
      t.add(concat(std::vector<std::string>{num(static_cast<std::int64_t>(i)), num(classes[i].start), num(classes[i].returns)},
                   vec_cells(classes[i].time_class.vec()), vec_cells(classes[i].arc_class.vec()),
                   std::vector<std::string>{num(classes[i].mean_return_length), num(et), num(ea)}));
    }
    rep.tables.push_back(std::move(t));
    rep.notes.push_back("mean return length " + num(mean_len));
    rep.check_at_most("leaf_time_class_error", worst_time, tol_time, "time classes against the class");
    rep.check_at_most("leaf_arc_class_error", worst_arc, tol_arc, "arc-length classes against class / mean return length");
  }
  runtime_check(rep, limit);
  return rep;
}

// --- cluster -------------------------------------------------------------

RunReport run_cluster(Context& cx) {
  ManifestReader& r = cx.r;
  const bool need_base = r.has("leaves");
  BaseSpec base;
  if (need_base) base = read_base(r);
  CycleLibrary lib = read_library(r);
  const int n = lib.dim();
  ImmersionLayout layout = read_layout(r, n);
  ClusterGrid grid;
  const bool curves_present = r.has("flows") || r.has("leaves");
  double t_max = 1.0;
  double tol_diam = 0.0;
  if (curves_present) {
    double t_min = r.positive("grid.t_min");
    t_max = r.positive("grid.t_max");
    std::int64_t count = r.positive_integer("grid.count");
    if (t_min > t_max) r.fail("grid.t_min", "must not exceed grid.t_max");
    for (std::int64_t k = 0; k < count; ++k)
      grid.horizons.push_back(count == 1 ? t_max : t_min + (t_max - t_min) * k / static_cast<double>(count - 1));
    grid.ratios = r.numbers("grid.ratios", std::vector<double>{0.0, 0.5, 1.0});
    for (double x : grid.ratios)
      if (x < 0) r.fail("grid.ratios", "ratios must be >= 0");
    grid.tail = static_cast<int>(r.positive_integer("grid.tail", count));
    tol_diam = cx.tol("diameter");
    grid.radius = tol_diam;
  }
  auto flows = read_flows(r, n, -t_max, t_max);
  LeafSpec leaves = read_leaves(r, "leaves", n, static_cast<std::int64_t>(std::ceil(t_max)));
  const bool two_ray = r.has("two_ray");
  std::int64_t excursions = 0, samples = 0;
  double growth = 0.0, offset = 0.0, tol_angle = 0.0;
  if (two_ray) {
    if (n != 2) r.fail("two_ray", "fixture lives on T^2");
    excursions = r.positive_integer("two_ray.excursions");
    growth = r.positive("two_ray.growth", 2.0);
    offset = r.positive("two_ray.offset", 0.05);
    samples = r.positive_integer("two_ray.samples", 4000);
    tol_angle = cx.tol("angle");
  }
  if (!curves_present && !two_ray) r.fail("flows", "need at least one of flows, leaves, two_ray");
  auto limit = read_runtime_limit(r);
  r.finish();

  RunReport rep;
  rep.subcommand = "cluster";
  std::vector<NamedCurve> curves = flows;
  if (leaves.present) {
    Stopwatch sw(rep, "trace_leaves");
    DenjoyRef d = denjoy_build(base.alpha, base.gaps);
    ImmersedSolenoid s = realize(leaves.cls, lib, d, layout);
    auto starts = sample_cantor_points(*d, static_cast<int>(leaves.count), sample_offset(cx.seed));
    for (std::size_t i = 0; i < starts.size(); ++i)
      curves.push_back({"leaf" + std::to_string(i),
                        CurveSampler::path(trace_leaf(s, starts[i], -leaves.returns, leaves.returns).path), leaves.cls});
  }
  if (!curves.empty()) {
    Stopwatch sw(rep, "cluster_sets");
    Table t{"clusters", concat(std::vector<std::string>{"curve", "set", "index"}, axis_columns("value", n)), {}};
    Table s{"cluster_summary", {"curve", "all", "positive", "negative", "balanced", "diameter"}, {}};
    double worst = 0.0;
    bool singletons = true;
    for (const auto& c : curves) {
      ClusterEstimate e = cluster_estimate(c.curve, grid);
      auto dump = [&](const char* name, const std::vector<HomologyVector>& v) {
        for (std::size_t k = 0; k < v.size(); ++k)
          t.add(concat(std::vector<std::string>{c.name, name, num(static_cast<std::int64_t>(k))}, vec_cells(v[k].vec())));
      };
      dump("all", e.all);
      dump("positive", e.positive);
      dump("negative", e.negative);
      dump("balanced", e.balanced);
      auto sz = [](const auto& v) { return std::to_string(v.size()); };
      s.add({c.name, sz(e.all), sz(e.positive), sz(e.negative), sz(e.balanced), num(e.all_diameter)});
      worst = std::max(worst, e.all_diameter);
      singletons = singletons && e.all.size() == 1;
    }
    rep.tables.push_back(std::move(t));
    rep.tables.push_back(std::move(s));
    rep.check_true("singleton_clusters", singletons, "every curve collapses to one representative");
    rep.check_at_most("cluster_diameter", worst, tol_diam, "largest cluster diameter on the grid tail");
  }
  if (two_ray) {
    Stopwatch sw(rep, "two_ray");
    CurveSampler c = CurveSampler::path(two_ray_oscillator(static_cast<int>(excursions), growth, offset));
    std::vector<double> ts;
    for (std::int64_t k = 1; k <= samples; ++k) ts.push_back(c.end() * static_cast<double>(k) / samples);
    auto dirs = cluster_directions(c, ts, 0.25, tol_angle);
    Table t{"two_ray_directions", {"index", "u1", "u2", "angle_e1", "angle_e2"}, {}};
    double best1 = std::numbers::pi, best2 = std::numbers::pi;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      double a1 = std::acos(std::clamp(dirs[k][0], -1.0, 1.0)), a2 = std::acos(std::clamp(dirs[k][1], -1.0, 1.0));
      best1 = std::min(best1, a1);
      best2 = std::min(best2, a2);
      t.add({num(static_cast<std::int64_t>(k)), num(dirs[k][0]), num(dirs[k][1]), num(a1), num(a2)});
    }
    rep.tables.push_back(std::move(t));
    rep.notes.push_back("two-ray curve length " + num(c.end()));
    rep.check_at_most("two_ray_angle_e1", best1, tol_angle, "closest direction to e1");
    rep.check_at_most("two_ray_angle_e2", best2, tol_angle, "closest direction to e2");
  }
  runtime_check(rep, limit);
  return rep;
}

// --- intersect -------------------------------------------------------------

RunReport run_intersect(Context& cx) {
  ManifestReader& r = cx.r;
  BaseSpec base = read_base(r);
  ImmersionLayout layout = read_layout(r, 2);
  if (r.integer("library.dim", 2) != 2) r.fail("library.dim", "intersection pairing is computed on T^2");
  std::vector<std::pair<HomologyVector, HomologyVector>> pairs;
  if (r.has("pairs.list")) {
    auto v = r.vectors("pairs.list");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].dim() != 4) {
        r.fail("pairs.list[" + std::to_string(i) + "]", "expected [a1, a2, b1, b2]");
        continue;
      }
      pairs.push_back({HomologyVector{v[i][0], v[i][1]}, HomologyVector{v[i][2], v[i][3]}});
    }
  } else if (r.has("pairs.random")) {
    std::int64_t count = r.positive_integer("pairs.random.count");
    auto range = r.numbers("pairs.random.range", std::vector<double>{-2.0, 2.0});
    if (range.size() != 2 || !(range[0] < range[1])) r.fail("pairs.random.range", "expected [lo, hi] with lo < hi");
    else {
      std::mt19937_64 rng(cx.seed);
      std::uniform_real_distribution<double> u(range[0], range[1]);
      for (std::int64_t k = 0; k < count; ++k) {
        HomologyVector a{u(rng), u(rng)};
        HomologyVector b{u(rng), u(rng)};
        pairs.push_back({a, b});
      }
    }
  } else {
    r.fail("pairs", "expected list or random");
  }
  const double tol_pair = cx.tol("pairing");
  const double tol_self = cx.tol("self");
  const bool leafwise = r.has("leafwise");
  std::vector<double> horizons;
  HomologyVector lw1{1.0, 0.0}, lw2{0.0, 1.0};
  double tol_leaf = 0.0;
  if (leafwise) {
    horizons = r.numbers("leafwise.horizons");
    for (double h : horizons)
      if (h < 1 || h != std::floor(h)) r.fail("leafwise.horizons", "horizons must be positive integers");
    if (horizons.empty()) r.fail("leafwise.horizons", "must not be empty");
    auto c1 = r.numbers("leafwise.first", std::vector<double>{1.0, 0.0});
    auto c2 = r.numbers("leafwise.second", std::vector<double>{0.0, 1.0});
    if (c1.size() != 2) r.fail("leafwise.first", "expected two components");
    else lw1 = HomologyVector{c1[0], c1[1]};
    if (c2.size() != 2) r.fail("leafwise.second", "expected two components");
    else lw2 = HomologyVector{c2[0], c2[1]};
    tol_leaf = cx.tol("leafwise");
  }
  auto limit = read_runtime_limit(r);
  r.finish();

  RunReport rep;
  rep.subcommand = "intersect";
  DenjoyRef d;
  {
    Stopwatch sw(rep, "denjoy_build");
    d = denjoy_build(base.alpha, base.gaps);
  }
  CycleLibrary lib = CycleLibrary::standard(2);
  {
    Stopwatch sw(rep, "pairings");
    Table t{"pairings", {"index", "a1", "a2", "b1", "b2", "pairing", "cup", "error", "reverse", "self", "crossings", "status"}, {}};
    double worst = 0.0, worst_anti = 0.0, worst_self = 0.0;
    bool all_transverse = true;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      ImmersedSolenoid s1 = realize(pairs[k].first, lib, d, layout);
      ImmersedSolenoid s2 = transverse_placement(realize(pairs[k].second, lib, d, layout), s1);
      PairingReport p = intersection_pairing(s1, s2);
      PairingReport q = intersection_pairing(s2, s1);
      ImmersedSolenoid copy = transverse_placement(s1, s1);
      PairingReport self = intersection_pairing(s1, copy);
      const double cup = torus_cup(pairs[k].first, pairs[k].second);
      const bool transverse = p.status == Transversality::kTransverse && self.status == Transversality::kTransverse;
      all_transverse = all_transverse && transverse;
      worst = std::max(worst, std::abs(p.total - cup));
      worst_anti = std::max(worst_anti, std::abs(p.total + q.total));
      worst_self = std::max(worst_self, std::abs(self.total));
      t.add({num(static_cast<std::int64_t>(k)), num(pairs[k].first[0]), num(pairs[k].first[1]), num(pairs[k].second[0]),
             num(pairs[k].second[1]), num(p.total), num(cup), num(std::abs(p.total - cup)), num(q.total), num(self.total),
             num(static_cast<std::int64_t>(p.records.size())), to_string(p.status)});
    }
    rep.tables.push_back(std::move(t));
    rep.check_true("transverse", all_transverse, "layout search found transverse placements");
    rep.check_at_most("pairing_error", worst, tol_pair, "max |pairing - (a1 b2 - a2 b1)|");
    rep.check_at_most("antisymmetry", worst_anti, 0.0, "max |P(a,b) + P(b,a)|, exact");
    rep.check_at_most("self_pairing", worst_self, tol_self, "max |P(a, translated a)|");
  }
  if (leafwise) {
    Stopwatch sw(rep, "leafwise");
    ImmersedSolenoid s1 = realize(lw1, lib, d, layout);
    ImmersedSolenoid s2 = transverse_placement(realize(lw2, lib, d, layout), s1);
    auto pts = sample_cantor_points(*d, 2, sample_offset(cx.seed));
    std::vector<std::int64_t> hs;
    for (double h : horizons) hs.push_back(static_cast<std::int64_t>(h));
    auto est = leafwise_pairing_limit(s1, s2, pts[0], pts[1], hs);
    const double pairing = intersection_pairing(s1, s2).total;
    Table t{"leafwise", {"returns", "signed_crossings", "length1", "length2", "value", "target", "deviation"}, {}};
    double last = 0.0;
    for (const auto& e : est) {
      double target = pairing / ((e.length1 / e.returns) * (e.length2 / e.returns));
      last = std::abs(e.value - target);
      t.add({num(e.returns), num(e.signed_crossings), num(e.length1), num(e.length2), num(e.value), num(target), num(last)});
    }
    rep.tables.push_back(std::move(t));
    rep.check_at_most("leafwise_deviation", last, tol_leaf, "at the largest horizon");
  }
  runtime_check(rep, limit);
  return rep;
}

// --- dualform ---------------------------------------------------------------

RasterOptions read_raster(ManifestReader& r, const std::string& path) {
  RasterOptions o;
  o.n = static_cast<int>(r.positive_integer(path + ".n"));
  o.epsilon = r.positive(path + ".epsilon");
  o.leaf_samples = static_cast<int>(r.positive_integer(path + ".leaf_samples", o.leaf_samples));
  return o;
}

RunReport run_dualform(Context& cx) {
  ManifestReader& r = cx.r;
  BaseSpec base = read_base(r);
  ImmersionLayout layout = read_layout(r, 2);
  if (r.integer("library.dim", 2) != 2) r.fail("library.dim", "the raster lives on T^2");
  auto c = r.numbers("class");
  if (c.size() != 2) r.fail("class", "expected two components");
  RasterOptions coarse = read_raster(r, "raster");
  const bool refined = r.has("refined");
  RasterOptions fine;
  if (refined) fine = read_raster(r, "refined");
  const double tol_comp = cx.tol("components");
  const double tol_stab = refined ? cx.tol("stability") : 0.0;
  auto limit = read_runtime_limit(r);
  r.finish();

  RunReport rep;
  rep.subcommand = "dualform";
  HomologyVector a{c[0], c[1]};
  DenjoyRef d;
  {
    Stopwatch sw(rep, "denjoy_build");
    d = denjoy_build(base.alpha, base.gaps);
  }
  ImmersedSolenoid s = realize(a, CycleLibrary::standard(2), d, layout);
  HomologyVector current = generalized_current(s);
  Table t{"dualform", {"run", "n", "epsilon", "component1", "component2", "current1", "current2", "error", "wedge1", "wedge2"}, {}};
  auto one = [&](const std::string& name, const RasterOptions& o) {
    GridForm g;
    {
      Stopwatch sw(rep, "raster_" + name);
      g = dual_form_raster(s, o);
    }
    HomologyVector k = g.dual_components();
    double err = component_error(k, current);
    t.add({name, num(static_cast<std::int64_t>(o.n)), num(o.epsilon), num(k[0]), num(k[1]), num(current[0]), num(current[1]),
           num(err), num(g.wedge_with(0)), num(g.wedge_with(1))});
    rep.grids.push_back({"dualform_" + name, g});
    return k;
  };
  HomologyVector k0 = one("raster", coarse);
  rep.check_at_most("raster_components", component_error(k0, current), tol_comp, "dual components against the current");
  if (refined) {
    HomologyVector k1 = one("refined", fine);
    rep.check_at_most("refined_components", component_error(k1, current), tol_comp, "dual components against the current");
    rep.check_at_most("raster_stability", component_error(k0, k1), tol_stab, "raster against refined raster");
  }
  rep.tables.push_back(std::move(t));
  runtime_check(rep, limit);
  return rep;
}

// --- norm --------------------------------------------------------------------

RunReport run_norm(Context& cx) {
  ManifestReader& r = cx.r;
  auto hom = r.vectors("homogeneity.classes");
  for (std::size_t i = 0; i < hom.size(); ++i)
    if (!HomologyVector(hom[i]).is_integral(0.0)) r.fail("homogeneity.classes[" + std::to_string(i) + "]", "must be an integer class");
  const std::int64_t multiples = r.positive_integer("homogeneity.multiples");
  auto ref = r.numbers("reference.class");
  if (ref.empty() || ref.size() > static_cast<std::size_t>(kMaxDim)) r.fail("reference.class", "expected a class");
  const double ref_value = r.number("reference.value");
  const std::int64_t pairs = r.positive_integer("subadditivity.count");
  auto range = r.numbers("subadditivity.range", std::vector<double>{-3.0, 3.0});
  if (range.size() != 2 || !(range[0] < range[1])) r.fail("subadditivity.range", "expected [lo, hi] with lo < hi");
  const std::int64_t n_max = r.positive_integer("n_max", 1000);
  const double tol_norm = cx.tol("norm");
  auto limit = read_runtime_limit(r);
  r.finish();

  RunReport rep;
  rep.subcommand = "norm";
  Stopwatch sw(rep, "stable_norm");
  const int nm = static_cast<int>(n_max);
  Table seq{"stable_norm_sequence", {"class", "k", "l_over_k"}, {}};
  double worst_h = 0.0;
  for (std::size_t i = 0; i < hom.size(); ++i) {
    HomologyVector a(hom[i]);
    const double base_norm = stable_norm(a, nm).value;
    for (std::int64_t k = 1; k <= multiples; ++k) {
      double v = stable_norm(a * static_cast<double>(k), nm).value;
      double rel = base_norm == 0.0 ? std::abs(v) : std::abs(v - k * base_norm) / (k * base_norm);
      worst_h = std::max(worst_h, rel);
    }
  }
  HomologyVector rc(Vec::from_span(ref));
  StableNormEstimate re = stable_norm(rc, nm);
  for (std::size_t k = 0; k < re.sequence.size(); k += std::max<std::size_t>(1, re.sequence.size() / 50))
    seq.add({rc.str(), num(static_cast<std::int64_t>(k + 1)), num(re.sequence[k])});
  rep.tables.push_back(std::move(seq));
  rep.check_at_most("homogeneity", worst_h, tol_norm, "max relative | ||k a|| - k ||a|| | over k <= " + num(multiples));
  rep.check_at_most("reference_norm", std::abs(re.value - ref_value), tol_norm, "||" + rc.str() + "|| against " + num(ref_value));

  std::mt19937_64 rng(cx.seed);
  std::uniform_real_distribution<double> u(range[0], range[1]);
  const int n = rc.dim();
  // rounding k a to the lattice moves l(k a)/k by at most sqrt(n)/(2 k)
  const double delta = 1.5 * std::sqrt(static_cast<double>(n)) / static_cast<double>(n_max);
  Table sub{"subadditivity", {"index", "norm_a", "norm_b", "norm_sum", "slack"}, {}};
  double worst_s = -1e300;
  for (std::int64_t k = 0; k < pairs; ++k) {
    Vec a(n), b(n);
    for (int j = 0; j < n; ++j) a[j] = u(rng);
    for (int j = 0; j < n; ++j) b[j] = u(rng);
    double na = stable_norm(HomologyVector(a), nm).value, nb = stable_norm(HomologyVector(b), nm).value;
    double ns = stable_norm(HomologyVector(a + b), nm).value;
    double slack = ns - na - nb - delta;
    worst_s = std::max(worst_s, slack);
    sub.add({num(k), num(na), num(nb), num(ns), num(slack)});
  }
  rep.tables.push_back(std::move(sub));
  rep.check_at_most("subadditivity", worst_s, 0.0, "max ||a+b|| - ||a|| - ||b|| - delta(n_max)");
  runtime_check(rep, limit);
  return rep;
}

// --- denjoy ---------------------------------------------------------------------

RunReport run_denjoy(Context& cx) {
  ManifestReader& r = cx.r;
  BaseSpec base = read_base(r);
  const std::int64_t n_max = r.positive_integer("rotation.n_max");
  const std::int64_t starts = r.positive_integer("rotation.starts", 1);
  auto gap_range = r.numbers("gaps.indices", std::vector<double>{-20.0, 20.0});
  if (gap_range.size() != 2 || gap_range[0] > gap_range[1]) r.fail("gaps.indices", "expected [lo, hi]");
  auto weights = r.numbers("partition.weights");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (weights.empty() || std::abs(wsum - 1.0) > 1e-12) r.fail("partition.weights", "weights must sum to 1");
  const double tol_part = cx.tol("partition");
  auto limit = read_runtime_limit(r);
  r.finish();

  RunReport rep;
  rep.subcommand = "denjoy";
  DenjoyRef d;
  {
    Stopwatch sw(rep, "denjoy_build");
    d = denjoy_build(base.alpha, base.gaps);
  }
  const double alpha = d->alpha();
  {
    Stopwatch sw(rep, "rotation");
    BaseMap map(d);
    auto xs = sample_cantor_points(*d, static_cast<int>(starts), sample_offset(cx.seed));
    Table t{"rotation", {"start", "n", "estimate", "n_times_error"}, {}};
    double worst = 0.0;
    for (double x0 : xs) {
      worst = std::max(worst, rotation_bound_ratio(map, x0, n_max, alpha));
      for (std::int64_t k = 1; k <= n_max; k *= 10) {
        double e = rotation_number_estimate(map, x0, k);
        t.add({num(x0), num(k), num(e), num(k * std::abs(e - alpha))});
      }
    }
    rep.tables.push_back(std::move(t));
    rep.check_at_most("rotation_bound", worst, 1.0, "max N |estimate_N - alpha| for N <= " + num(n_max));
    rep.notes.push_back("alpha " + num(alpha) + ", irrational to precision " +
                        (d->rotation_number().irrational_to_precision() ? "yes" : "no"));
  }
  {
    Stopwatch sw(rep, "measure_audit");
    Table g{"gap_measures", {"gap", "start", "length", "measure"}, {}};
    double worst_gap = 0.0;
    for (auto k = static_cast<std::int64_t>(gap_range[0]); k <= static_cast<std::int64_t>(gap_range[1]); ++k) {
      Arc arc = d->gap(k);
      double m = invariant_measure_arc(*d, arc).value;
      worst_gap = std::max(worst_gap, std::abs(m));
      g.add({num(k), num(arc.start), num(arc.length), num(m)});
    }
    rep.tables.push_back(std::move(g));
    rep.check_at_most("gap_measure", worst_gap, 0.0, "mu_K of gaps, exact");

    CantorPartition part = partition_by_weights(*d, weights);
    Table p{"partition", {"branch", "requested", "measure", "error_radius", "deviation"}, {}};
    double worst_excess = 0.0;
    for (std::size_t i = 0; i < part.size(); ++i) {
      Measured m = invariant_measure_arc(*d, part.branch_arc(i));
      double dev = std::abs(m.value - weights[i]);
      worst_excess = std::max(worst_excess, dev - m.error);
      p.add({num(static_cast<std::int64_t>(i)), num(weights[i]), num(m.value), num(m.error), num(dev)});
    }
    rep.tables.push_back(std::move(p));
    rep.check_at_most("partition_weights", std::max(worst_excess, 0.0), tol_part,
                      "|mu_K(K_i) - lambda_i| beyond the tail radius");
  }
  runtime_check(rep, limit);
  return rep;
}

}  // namespace

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void RunReport::check_at_most(const std::string& name, double value, double threshold, std::string detail) {
  checks.push_back({name, value, threshold, std::isfinite(value) && value <= threshold, std::move(detail)});
}

void RunReport::check_true(const std::string& name, bool ok, std::string detail) {
  checks.push_back({name, ok ? 1.0 : 0.0, 1.0, ok, std::move(detail)});
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"realize", "schwartzman", "cluster", "intersect", "dualform", "norm", "denjoy"};
  return names;
}

RunReport run_experiment(const std::string& subcommand, const Json& manifest, const RunOptions& opt) {
  if (!manifest.is_object()) throw ValidationError("manifest must be a JSON object", "manifest");
  if (!(opt.tolerance_scale > 0.0)) throw ValidationError("must be positive", "--tolerance-scale");
  if (opt.workers > 0) omp_set_num_threads(opt.workers);
  ManifestReader reader(manifest);
  std::uint64_t seed = 0;
  if (opt.seed_override) {
    seed = *opt.seed_override;
  } else {
    std::int64_t s = reader.integer("seed");
    if (s < 0) reader.fail("seed", "must be >= 0");
    seed = static_cast<std::uint64_t>(std::max<std::int64_t>(s, 0));
  }
  if (reader.has("subcommand")) {
    const Json* sc = reader.find("subcommand");
    if (!sc->is_string() || sc->get<std::string>() != subcommand)
      reader.fail("subcommand", "manifest is for a different subcommand");
  }
  Context cx{reader, seed, opt.tolerance_scale};
  RunReport rep;
  if (subcommand == "realize") rep = run_realize(cx);
  else if (subcommand == "schwartzman") rep = run_schwartzman(cx);
  else if (subcommand == "cluster") rep = run_cluster(cx);
  else if (subcommand == "intersect") rep = run_intersect(cx);
  else if (subcommand == "dualform") rep = run_dualform(cx);
  else if (subcommand == "norm") rep = run_norm(cx);
  else if (subcommand == "denjoy") rep = run_denjoy(cx);
  else throw ValidationError("unknown subcommand '" + subcommand + "'", "subcommand");
  rep.notes.push_back("seed " + std::to_string(seed));
  return rep;
}

std::string format_number(double x) {
  if (x == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

Json report_json(const RunReport& r) {
  Json j;
  j["subcommand"] = r.subcommand;
  j["status"] = r.passed() ? "pass" : "fail";
  j["checks"] = Json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}, {"detail", c.detail}});
  j["stages"] = Json::array();
  for (const auto& s : r.stages) j["stages"].push_back({{"stage", s.stage}, {"seconds", s.seconds}});
  j["tables"] = Json::array();
  for (const auto& t : r.tables) j["tables"].push_back(t.name + ".csv");
  j["grids"] = Json::array();
  for (const auto& g : r.grids) j["grids"].push_back(g.first + ".grid");
  j["notes"] = r.notes;
  return j;
}

void write_outputs(const RunReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& t : r.tables) {
    std::ofstream f(fs::path(dir) / (t.name + ".csv"), std::ios::binary);
    f << to_csv(t);
    if (!f) throw std::runtime_error("cannot write " + t.name + ".csv");
  }
  for (const auto& g : r.grids) write_grid_file((fs::path(dir) / (g.first + ".grid")).string(), g.second);
  std::ofstream f(fs::path(dir) / "report.json", std::ios::binary);
  f << report_json(r).dump(2) << "\n";
  if (!f) throw std::runtime_error("cannot write report.json");
}

}  // namespace solab
