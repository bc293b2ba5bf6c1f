#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "solab/circle_dynamics.hpp"
#include "solab/error.hpp"

using namespace solab;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

// Independent evaluation of Psi by a direct sum over the orbit (no sorting,
// no prefix sums): Psi(y) = (y (1 + tail) + sum_{|n|<=N, {n a} < y} l_n) / (1 + L).
double psi_oracle(double y, double alpha, const GapSchedule& g) {
  long double acc = 0.0L, tab = 0.0L;
  for (std::int64_t n = -g.n_max; n <= g.n_max; ++n) {
    long double t = static_cast<long double>(n) * alpha;
    t -= std::floor(t);
    tab += g.length(n);
    if (t < y) acc += g.length(n);
  }
  long double spread = g.total() - tab;
  return static_cast<double>((y * (1.0L + spread) + acc) / (1.0L + g.total()));
}

DenjoyRef golden_map(std::int64_t n_max = 100000) {
  GapSchedule g;
  g.n_max = n_max;
  return denjoy_build(RotationNumber::golden(), g);
}

}  // namespace

TEST_CASE("rotation numbers from decimals and continued fractions") {
  RotationNumber g = RotationNumber::golden();
  CHECK(g.irrational_to_precision());
  CHECK(g.well_approximable_flag());
  REQUIRE(g.convergents().size() > 10);
  // convergents of the golden mean are Fibonacci ratios 1/1, 1/2, 2/3, 3/5, ...
  CHECK(g.convergents()[3].p == 3);
  CHECK(g.convergents()[3].q == 5);
  std::vector<int> ones(40, 1);
  CHECK(RotationNumber::from_continued_fraction(ones).value() == doctest::Approx(kGolden).epsilon(1e-15));
  CHECK_FALSE(RotationNumber(0.25).irrational_to_precision());
  CHECK_THROWS_AS(RotationNumber(1.5), ValidationError);
}

TEST_CASE("gap schedule closed forms") {
  GapSchedule g;
  CHECK(g.total() == doctest::Approx(1.0).epsilon(1e-15));
  // direct partial sum against the closed form total and tail bound
  long double partial = 0.0L;
  for (std::int64_t n = -g.n_max; n <= g.n_max; ++n) partial += g.length(n);
  double tail = g.total() - static_cast<double>(partial);
  CHECK(tail >= 0.0);
  CHECK(tail <= g.tail_bound() + 1e-15);
  CHECK(g.tail_bound() <= g.tolerance);
}

TEST_CASE("denjoy_build rejects a truncation whose tail exceeds the tolerance") {
  GapSchedule g;
  g.n_max = 100;
  CHECK_THROWS_AS(denjoy_build(RotationNumber::golden(), g), ConstructionError);
  CHECK_THROWS_AS(denjoy_build(RotationNumber(0.5), GapSchedule{}), ConstructionError);
}

TEST_CASE("Psi agrees with the direct orbit-sum oracle") {
  GapSchedule g;
  g.n_max = 20000;
  g.tolerance = 1e-4;
  auto map = denjoy_build(RotationNumber::golden(), g);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    double y = u(rng);
    CHECK(map->psi(y) == doctest::Approx(psi_oracle(y, kGolden, g)).epsilon(1e-13));
  }
}

TEST_CASE("semiconjugacy identity h(Psi(0)) = Psi(alpha)") {
  auto map = golden_map();
  double x0 = map->psi(0.0);
  CHECK(std::abs(map->apply(x0) - map->psi(kGolden)) <= map->position_error());
  // pi o h = R_alpha o pi on Cantor points, exactly in the base coordinate
  for (double y : {0.1234567, 0.5, 0.77777}) {
    CirclePoint p = map->locate(map->psi(y));
    CirclePoint q = map->step(p);
    double want = y + kGolden - std::floor(y + kGolden);
    CHECK(q.base == doctest::Approx(want).epsilon(1e-14));
    CHECK(map->semiconjugacy(map->position(q)) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("gap I_0 maps onto I_1 with matching endpoints") {
  auto map = golden_map();
  Arc i0 = map->gap(0), i1 = map->gap(1);
  CHECK(map->apply(i0.start) == doctest::Approx(i1.start).epsilon(1e-13));
  double end0 = i0.start + i0.length * (1 - 1e-12);
  CHECK(map->apply(end0) == doctest::Approx(i1.start + i1.length).epsilon(1e-9));
  // monotone inside the gap and continuous across its ends
  double prev = -1;
  for (int k = 0; k <= 64; ++k) {
    double x = i0.start + i0.length * k / 64.0 * (1 - 1e-12);
    double y = map->apply(x);
    CHECK(y >= prev);
    prev = y;
  }
  double left = map->apply(i0.start - 1e-9), right = map->apply(i0.start + i0.length + 1e-9);
  CHECK(std::abs(left - i1.start) < 1e-6);
  CHECK(std::abs(right - (i1.start + i1.length)) < 1e-6);
}

TEST_CASE("gap transfer is monotone with unit end slopes") {
  auto map = golden_map();
  for (std::int64_t n : {-5L, 0L, 1L, 7L, 300L}) {
    double r = map->gaps().length(n) / map->gaps().length(n + 1);
    double h = 1e-7;
    double d0 = (map->gap_transfer(n, h) - map->gap_transfer(n, 0)) / h;
    double d1 = (map->gap_transfer(n, 1) - map->gap_transfer(n, 1 - h)) / h;
    CHECK(d0 == doctest::Approx(r).epsilon(1e-5));
    CHECK(d1 == doctest::Approx(r).epsilon(1e-5));
    for (double u = 0; u < 1; u += 0.01) CHECK(map->gap_transfer(n, u + 0.01) > map->gap_transfer(n, u));
    CHECK(map->gap_transfer_inverse(n, map->gap_transfer(n, 0.37)) == doctest::Approx(0.37).epsilon(1e-12));
  }
}

TEST_CASE("vanishing gaps give the rigid rotation") {
  GapSchedule g;
  g.constant = 0.0;
  g.n_max = 1000;
  auto map = denjoy_build(RotationNumber::golden(), g);
  for (double x : {0.0, 0.2, 0.9}) {
    double want = x + kGolden - std::floor(x + kGolden);
    CHECK(map->apply(x) == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("invariant measure of arcs") {
  auto map = golden_map();
  CHECK(invariant_measure_arc(*map, {0.3, 1.0}).value == 1.0);
  for (std::int64_t n : {0L, 3L, -8L, 1000L}) {
    Arc g = map->gap(n);
    Arc inner{g.start + g.length * 1e-6, g.length * (1 - 2e-6)};
    CHECK(invariant_measure_arc(*map, inner).value == 0.0);
    CHECK(invariant_measure_arc(*map, g).value == 0.0);
  }
  Arc a{map->psi(0.0), map->psi(0.25) - map->psi(0.0)};
  CHECK(invariant_measure_arc(*map, a).value == doctest::Approx(0.25).epsilon(1e-12));
  // invariance under h^{-1} on generated arcs
  for (double y : {0.11, 0.42, 0.8}) {
    Arc b{map->psi(y), map->psi(y + 0.1) - map->psi(y)};
    double s = map->apply_inverse(b.start), e = map->apply_inverse(b.start + b.length);
    Arc pre{s, e - s - std::floor(e - s)};
    CHECK(invariant_measure_arc(*map, pre).value == doctest::Approx(invariant_measure_arc(*map, b).value).epsilon(1e-10));
  }
}

TEST_CASE("partition_by_weights reproduces the weights") {
  auto map = golden_map();
  for (auto w : std::vector<std::vector<double>>{{0.3, 0.7}, {1.0}, {0.2, 0.3, 0.5}}) {
    CantorPartition p = partition_by_weights(*map, w);
    REQUIRE(p.size() == w.size());
    double sum = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      double m = invariant_measure_arc(*map, p.branch_arc(i)).value;
      CHECK(std::abs(m - w[i]) <= 1e-10 + 2 * map->gaps().tail_bound());
      sum += m;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(partition_by_weights(*map, std::vector<double>{0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(partition_by_weights(*map, std::vector<double>{-0.5, 1.5}), ValidationError);
}

TEST_CASE("rotation number estimates obey the 1/N bound") {
  BaseMap rot{RigidRotation(kGolden)};
  CHECK(rotation_number_estimate(rot, 0.3, 1000) == doctest::Approx(kGolden).epsilon(1e-12));
  auto map = golden_map();
  BaseMap d(map);
  double est = rotation_number_estimate(d, map->psi(0.1), 100000);
  CHECK(std::abs(est - kGolden) <= 1e-5);
  CHECK(rotation_bound_ratio(d, map->psi(0.1), 20000, kGolden) < 1.0);
  BaseMap ms{MorseSmaleMap(2)};
  CHECK(std::abs(rotation_number_estimate(ms, 0.13, 1000)) <= 1e-3);
}

TEST_CASE("Morse-Smale fixed points") {
  MorseSmaleMap m(2, 0.5, 0.1);
  for (double p : m.fixed_points()) CHECK(std::abs(m.lift(p) - p) < 1e-15);
  for (double a : m.attractors()) {
    double x = a + 0.05;
    for (int k = 0; k < 200; ++k) x = m.lift(x);
    CHECK(x == doctest::Approx(a).epsilon(1e-10));
  }
  CHECK(m.lift_inverse(m.lift(0.377)) == doctest::Approx(0.377).epsilon(1e-14));
}

TEST_CASE("Birkhoff averages") {
  auto map = golden_map();
  BaseMap d(map);
  CantorPartition p = partition_by_weights(*map, std::vector<double>{0.3, 0.7});
  auto obs = StepObservable::partition_indicator(p);
  auto starts = sample_cantor_points(*map, 100);
  auto sweep = birkhoff_sweep(d, obs, starts, 100000);
  CHECK(sweep.worst_deviation(Vec{0.3, 0.7}) <= 0.01);
  auto serial = birkhoff_sweep_serial(d, obs, std::span<const double>(starts).subspan(0, 5), 1000);
  auto par = birkhoff_sweep(d, obs, std::span<const double>(starts).subspan(0, 5), 1000);
  for (std::size_t i = 0; i < 5; ++i) CHECK(serial.averages[i] == par.averages[i]);

  auto c = StepObservable::constant(Vec{2.5});
  CHECK(birkhoff_average(d, c, starts[0], 777)[0] == 2.5);

  BaseMap rot{RigidRotation(kGolden)};
  auto arc = StepObservable::arc_indicator({0.2, 0.35});
  CHECK(birkhoff_average(rot, arc, 0.0, 100000)[0] == doctest::Approx(0.35).epsilon(0.01 / 0.35));
}
