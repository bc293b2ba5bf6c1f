#include <cmath>
#include <numbers>

#include "doctest.h"
#include "solab/error.hpp"
#include "solab/schwartzman.hpp"

using namespace solab;

namespace {

const double g = std::numbers::phi - 1.0;

DenjoyRef golden_denjoy() { return denjoy_build(RotationNumber::golden(), GapSchedule{}); }

CurveSampler flow(double t_max = 1e4) { return CurveSampler::linear_flow({0.13, 0.27}, {1.0, g}, -t_max, t_max); }

}  // namespace

TEST_CASE("closing estimator on linear flows and loops") {
  auto hs = geometric_horizons(1e4, 8);
  auto series = asymptotic_class_closing(flow(), hs);
  for (const auto& e : series.estimates)
    CHECK(e.value.dist(HomologyVector{1.0, g}) <= std::sqrt(2.0) / (e.horizon.t - e.horizon.s));
  CHECK(series.converged);
  REQUIRE(series.limit.has_value());
  CHECK(series.limit->dist(HomologyVector{1.0, g}) <= 1e-3);

  // a (2,-1) loop repeated, in arc length: [loop] / length(loop)
  std::vector<Vec> v{{0.1, 0.2}};
  for (int k = 0; k < 200; ++k) {
    v.push_back(v.back() + Vec{1.2, -0.3});
    v.push_back(v.back() + Vec{0.8, -0.7});
  }
  PLPath loops = PLPath::arc_length(v);
  double per = std::hypot(1.2, 0.3) + std::hypot(0.8, 0.7);
  CurveSampler c = CurveSampler::path(loops);
  auto s = asymptotic_class_closing(c, {{0.0, 100 * per}, {0.0, 200 * per}});
  CHECK(s.estimates[0].value.dist(HomologyVector{2.0 / per, -1.0 / per}) <= 1e-12);
  CHECK(s.estimates[1].value.dist(HomologyVector{2.0 / per, -1.0 / per}) <= 1e-12);
  CHECK_FALSE(s.converged);  // fewer horizons than the window
}

TEST_CASE("calibrating estimator") {
  auto hs = geometric_horizons(1e4, 6);
  auto id = asymptotic_class_calibrating(flow(), CalibratingFunction::identity_lift(Vec(2)), hs);
  for (const auto& e : id.estimates) CHECK(e.value.dist(HomologyVector{1.0, g}) <= 1e-12);

  CalibratingFunction pou = build_calibrating_pou({BumpProfile::Shape::kPolynomial, 0.75, 1}, Vec(2));
  const double dev = pou.sup_deviation_from_identity();
  auto p = asymptotic_class_calibrating(flow(), pou, hs);
  auto cl = asymptotic_class_closing(flow(), hs);
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const double len = hs[k].t - hs[k].s;
    CHECK(p.estimates[k].value.dist(id.estimates[k].value) <= 2.0 * dev / len + 1e-12);
    CHECK(p.estimates[k].value.dist(cl.estimates[k].value) <= 2.0 * std::sqrt(2.0) / len);
  }
}

TEST_CASE("form estimator") {
  auto hs = geometric_horizons(1e4, 6);
  auto basis = asymptotic_class_form(flow(), {TestForm::basis(2, 0), TestForm::basis(2, 1)}, hs);
  for (const auto& e : basis.estimates) {
    CHECK(e.value[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.value[1] == doctest::Approx(g).epsilon(1e-12));
  }
  TrigPolynomial phi = TrigPolynomial::random(2, 4, 3, 77);
  // a pure exact form, measured through the e_1 slot, sees only phi
  CurveSampler c = flow();
  EstimatorConfig cfg = EstimatorConfig::standard(2, 3);
  for (const auto& h : hs) {
    auto with = estimate(c, h, Estimator::kForm, cfg);
    auto without = asymptotic_class_form(c, {TestForm::basis(2, 0), TestForm::basis(2, 1)}, {h}).estimates[0].value;
    double bound = 0.0;
    for (const auto& f : cfg.forms) bound = std::max(bound, 2.0 * f.exact.sup_bound());
    CHECK(with.dist(without) <= std::sqrt(2.0) * bound / (h.t - h.s));
    Vec a = c.lift(h.s), b = c.lift(h.t);
    CHECK(std::abs((phi(b) - phi(a)) / (h.t - h.s)) <= 2.0 * phi.sup_bound() / (h.t - h.s));
  }
  TestForm wrong = TestForm::basis(2, 1);
  CHECK_THROWS_AS(asymptotic_class_form(c, {wrong, wrong}, hs), ValidationError);
}

TEST_CASE("circle-map estimator") {
  CurveSampler c = flow();
  Horizon h{0.0, 5000.0};
  CHECK(circle_map_rate(c, h, {1.0, 0.0}, {}) == doctest::Approx(1.0).epsilon(1e-9));
  // class (1,1): the lift of x1 + x2 grows like 1 + g
  CHECK(std::abs(circle_map_rate(c, h, {1.0, 1.0}, {}) - (1.0 + g)) <= 1e-9);
  TrigPolynomial psi = TrigPolynomial::random(2, 3, 2, 12);
  double r = circle_map_rate(c, h, {1.0, 1.0}, psi);
  CHECK(std::abs(r - (1.0 + g)) <= (2.0 * psi.sup_bound() + 1.0) / h.t);
  // agreement with the form estimator for d(x1 + x2 + psi)
  TestForm df = TestForm::constant_form({1.0, 1.0});
  df.exact = psi;
  Vec a = c.lift(h.s), b = c.lift(h.t);
  double via_form = (df.constant.dot(b - a) + psi(b) - psi(a)) / h.t;
  CHECK(r == doctest::Approx(via_form).epsilon(1e-9));
}

TEST_CASE("crossing estimator") {
  CurveSampler c = flow();
  for (double t : {1000.0, 4000.0, 10000.0}) {
    Horizon h{0.0, t};
    auto x1 = crossing_rate(c, h, 0);
    CHECK(x1.level == 0.5);
    // lift of x1 is 0.13 + t: integers crossed by x1 - 0.5
    CHECK(x1.signed_count == std::floor(0.13 + t - 0.5) - std::floor(0.13 - 0.5));
    CHECK(std::abs(x1.rate - 1.0) <= 1.0 / t);
    CHECK(std::abs(crossing_rate(c, h, 1).rate - g) <= 1.0 / t);
  }
  // a (1,0) loop per unit time, the first level hits a vertex
  std::vector<Vec> v{{0.2, 0.1}};
  std::vector<double> times{0.0};
  for (int k = 0; k < 10; ++k) {
    v.push_back(v.back() + Vec{0.3, 0.2});
    v.push_back(v.back() + Vec{0.7, -0.2});
    times.push_back(k + 0.5);
    times.push_back(k + 1.0);
  }
  CurveSampler loop = CurveSampler::path(PLPath::timed(v, times));
  auto cr = crossing_rate(loop, {0.0, 10.0}, 0);
  CHECK(cr.retries >= 1);
  CHECK(cr.level != 0.5);
  CHECK(cr.signed_count == 10);
  CHECK(cr.rate == doctest::Approx(1.0));
}

TEST_CASE("five estimators agree on flows and traced leaves") {
  auto hs = geometric_horizons(1e4, 6);
  EstimatorConfig cfg = EstimatorConfig::standard(2, 5);
  for (double slope : {g, std::sqrt(2.0) - 1.0}) {
    CurveSampler c = CurveSampler::linear_flow({0.3, 0.6}, {1.0, slope}, 0.0, 1e4);
    EstimatorReport r = five_estimators(c, hs, cfg);
    CHECK(r.max_disagreement <= 0.01);
    for (const auto& s : r.series) {
      CHECK(s.converged);
      CHECK(s.estimates.back().value.dist(HomologyVector{1.0, slope}) <= 0.01);
    }
  }

  auto d = golden_denjoy();
  ImmersedSolenoid sol = realize({0.3, 0.7}, CycleLibrary::standard(2), d);
  auto starts = sample_cantor_points(*d, 3, 0.41);
  std::vector<CurveSampler> leaves;
  for (double x : starts) leaves.push_back(CurveSampler::path(trace_leaf(sol, x, 0, 10000).path));
  auto par = estimator_sweep(leaves, hs, cfg);
  auto ser = estimator_sweep_serial(leaves, hs, cfg);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    CHECK(par[i].max_disagreement <= 0.01);
    CHECK(par[i].max_disagreement == ser[i].max_disagreement);
    for (int e = 0; e < kEstimatorCount; ++e) {
      CHECK(par[i].series[e].converged);
      CHECK(par[i].series[e].estimates.back().value.dist(HomologyVector{0.3, 0.7}) <= 0.01);
      for (std::size_t k = 0; k < hs.size(); ++k)
        CHECK(par[i].series[e].estimates[k].value == ser[i].series[e].estimates[k].value);
    }
  }
}

TEST_CASE("traced leaves follow the Birkhoff oracle") {
  auto d = golden_denjoy();
  ImmersedSolenoid sol = realize({0.3, 0.7}, CycleLibrary::standard(2), d);
  auto starts = sample_cantor_points(*d, 4, 0.77);
  const std::int64_t n = 100000;
  auto leaves = leaf_class_sweep(sol, starts, n);
  auto serial = leaf_class_sweep_serial(sol, starts, n);
  StepObservable ind = StepObservable::partition_indicator(sol.partition());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    Vec freq = birkhoff_average(sol.base(), ind, starts[i], n);
    HomologyVector oracle(Vec(2));
    for (std::size_t b = 0; b < sol.branches().size(); ++b) oracle += freq[static_cast<int>(b)] * sol.branches()[b].cls;
    CHECK(leaves[i].time_class.dist(oracle) <= 2.0 / n);
    CHECK(leaves[i].time_class.dist(HomologyVector{0.3, 0.7}) <= 0.01);
    CHECK(leaves[i].arc_class.dist(HomologyVector{0.3, 0.7} / leaves[i].mean_return_length) <= 0.01);
    // arc-length classes lie in the unit stable-norm ball
    CHECK(leaves[i].arc_class.norm() <= 1.0 + 1.0 / n);
    CHECK(leaves[i].time_class == serial[i].time_class);
  }
}

TEST_CASE("balanced decomposition identity") {
  auto d = golden_denjoy();
  ImmersedSolenoid sol = realize({-0.5, 1.25}, CycleLibrary::standard(2), d);
  double x = sample_cantor_points(*d, 1, 0.2).front();
  CurveSampler c = CurveSampler::path(trace_leaf(sol, x, -3000, 3000).path);
  auto cls = [&](double s, double t) { return close_lift(c.lift(s), c.lift(t)); };
  for (double s : {-2999.5, -1234.0, -10.25})
    for (double t : {0.75, 800.0, 2999.0}) {
      HomologyVector lhs = cls(s, t) / (t - s);
      HomologyVector rhs = (-s / (t - s)) * (cls(s, 0.0) / (-s)) + (t / (t - s)) * (cls(0.0, t) / t);
      CHECK(lhs.dist(rhs) <= 1.5 * std::sqrt(2.0) / (t - s));
    }
}

TEST_CASE("cluster sets") {
  ClusterGrid grid;
  for (double t = 5000; t <= 10000; t += 500) grid.horizons.push_back(t);
  grid.ratios = {0.0, 0.5, 1.0};
  grid.tail = 11;
  grid.radius = 0.02;
  ClusterEstimate fl = cluster_estimate(flow(), grid);
  CHECK(fl.all.size() == 1);
  CHECK(fl.all_diameter <= 0.02);
  CHECK(fl.positive.size() == 1);
  CHECK(fl.negative.size() == 1);
  CHECK(fl.balanced.size() == 1);
  CHECK(fl.all[0].dist(HomologyVector{1.0, g}) <= 0.02);

  auto d = golden_denjoy();
  ImmersedSolenoid sol = realize({0.3, 0.7}, CycleLibrary::standard(2), d);
  double x = sample_cantor_points(*d, 1, 0.6).front();
  CurveSampler leaf = CurveSampler::path(trace_leaf(sol, x, -10000, 10000).path);
  ClusterEstimate lc = cluster_estimate(leaf, grid);
  CHECK(lc.all.size() == 1);
  CHECK(lc.all_diameter <= 0.02);
  CHECK(lc.balanced.size() == 1);

  // reversal swaps the one-sided sets with a sign flip
  ClusterEstimate rv = cluster_estimate(leaf.reversed(), grid);
  REQUIRE(rv.positive.size() == 1);
  REQUIRE(rv.negative.size() == 1);
  CHECK(rv.positive[0].dist(-1.0 * lc.negative[0]) <= 0.02);
  CHECK(rv.negative[0].dist(-1.0 * lc.positive[0]) <= 0.02);
}

TEST_CASE("two-ray oscillator") {
  PLPath p = two_ray_oscillator(12, 2.0, 0.05);
  CurveSampler c = CurveSampler::path(p);
  std::vector<double> ts;
  for (int k = 1; k <= 4000; ++k) ts.push_back(c.end() * k / 4000.0);
  auto dirs = cluster_directions(c, ts);
  REQUIRE(dirs.size() == 2);
  auto angle_to = [](const Vec& u, const Vec& e) { return std::acos(std::clamp(u.dot(e), -1.0, 1.0)); };
  bool has_e1 = false, has_e2 = false;
  for (const auto& u : dirs) {
    has_e1 = has_e1 || angle_to(u, {1.0, 0.0}) <= 0.05;
    has_e2 = has_e2 || angle_to(u, {0.0, 1.0}) <= 0.05;
  }
  CHECK(has_e1);
  CHECK(has_e2);
  // the arc-length class does not converge
  std::vector<Horizon> hs;
  for (int k = 3; k <= 10; ++k) hs.push_back({0.0, c.end() * k / 10.0});
  auto s = asymptotic_class_closing(c, hs);
  CHECK_FALSE(s.converged);
  CHECK_THROWS_AS(two_ray_oscillator(1), ValidationError);
}
