#include <cmath>
#include <random>

#include "doctest.h"
#include "solab/currents.hpp"
#include "solab/error.hpp"
#include "solab/intersection.hpp"
#include "solab/segments.hpp"

using namespace solab;

namespace {

DenjoyRef golden_denjoy() { return denjoy_build(RotationNumber::golden(), GapSchedule{}); }

ImmersedSolenoid make(const HomologyVector& a, const DenjoyRef& d) { return realize(a, CycleLibrary::standard(2), d); }

// brute force over all segment pairs and lattice shifts
std::int64_t brute_signed_crossings(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  CrossingScan scan;
  for (std::size_t i = 0; i + 1 < a.size(); ++i)
    for (std::size_t j = 0; j + 1 < b.size(); ++j) torus_segment_crossings(a[i], a[i + 1], b[j], b[j + 1], 0.0, scan);
  std::int64_t t = 0;
  for (const auto& h : scan.hits) t += h.sign;
  return t;
}

}  // namespace

TEST_CASE("core cycles close up in their class") {
  auto d = golden_denjoy();
  ImmersedSolenoid s = make({-0.4, 1.1}, d);
  for (std::size_t i = 0; i < s.branches().size(); ++i) {
    auto c = core_cycle(s, i);
    Vec disp = c.back() - c.front();
    CHECK(disp == s.branches()[i].cls.vec());
  }
}

TEST_CASE("basis solenoids cross once with sign +1") {
  auto d = golden_denjoy();
  ImmersedSolenoid s1 = make({1, 0}, d);
  ImmersedSolenoid s2 = make({0, 1}, d);
  // same base point: the base-box segments overlap
  CHECK(enumerate_crossings(s1, s2).status == Transversality::kDegenerate);
  ImmersedSolenoid placed = transverse_placement(s2, s1);
  CrossingSet cs = enumerate_crossings(s1, placed);
  CHECK(cs.status == Transversality::kTransverse);
  REQUIRE(cs.records.size() == 1);
  CHECK(cs.records[0].sign == 1);
  CHECK(cs.records[0].measure1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cs.records[0].measure2 == doctest::Approx(1.0).epsilon(1e-12));

  PairingReport p = intersection_pairing(s1, placed);
  PairingReport q = intersection_pairing(placed, s1);
  CHECK(p.total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.total == -p.total);
  CHECK(sampled_leaf_pairing(s1, placed, 50, 3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pairing equals the cup product") {
  auto d = golden_denjoy();
  ImmersedSolenoid a = make({0.3, 0.7}, d);
  ImmersedSolenoid b = transverse_placement(make({1, 0}, d), a);
  PairingReport ab = intersection_pairing(a, b);
  CHECK(ab.status == Transversality::kTransverse);
  CHECK(std::abs(ab.total - (-0.7)) <= 1e-6);

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    HomologyVector x{u(rng), u(rng)}, y{u(rng), u(rng)};
    ImmersedSolenoid s1 = make(x, d);
    ImmersedSolenoid s2 = transverse_placement(make(y, d), s1);
    PairingReport p = intersection_pairing(s1, s2);
    REQUIRE(p.status == Transversality::kTransverse);
    HomologyVector c1 = generalized_current(s1), c2 = generalized_current(s2);
    CHECK(std::abs(p.total - torus_cup(c1, c2)) <= 1e-4);
    CHECK(std::abs(p.total - torus_cup(x, y)) <= 1e-4);
    CHECK(intersection_pairing(s2, s1).total == -p.total);

    ImmersedSolenoid copy = transverse_placement(s1, s1);
    CHECK(std::abs(intersection_pairing(s1, copy).total) <= 1e-4);

    CrossingSet par = enumerate_crossings(s1, s2), ser = enumerate_crossings_serial(s1, s2);
    REQUIRE(par.records.size() == ser.records.size());
    for (std::size_t k = 0; k < par.records.size(); ++k) {
      CHECK(par.records[k].point == ser.records[k].point);
      CHECK(par.records[k].sign == ser.records[k].sign);
    }
  }
}

TEST_CASE("pairing is bilinear and invariant under translation") {
  auto d = golden_denjoy();
  ImmersedSolenoid s1 = make({0.5, 1.5}, d);
  ImmersedSolenoid s2 = transverse_placement(make({-1, 0.25}, d), s1);
  double base = intersection_pairing(s1, s2).total;
  ImmersedSolenoid doubled = s1.with_measure(s1.measure().scaled(2.0));
  CHECK(intersection_pairing(doubled, s2).total == doctest::Approx(2.0 * base).epsilon(1e-13));
  ImmersedSolenoid moved = s1.translated(Vec{1e-4, -0.5e-4});
  PairingReport after = intersection_pairing(moved, s2);
  REQUIRE(after.status == Transversality::kTransverse);
  CHECK(std::abs(after.total - base) <= 1e-6);
}

TEST_CASE("perturbation resolves degenerate configurations") {
  auto d = golden_denjoy();
  ImmersedSolenoid s1 = make({1, 0}, d);
  ImmersedSolenoid s2 = transverse_placement(make({0, 1}, d), s1);

  PerturbResult same = perturb_transverse(s1, s2, 1);
  CHECK(same.transverse);
  CHECK(same.retries == 0);
  CHECK(same.shift.max_abs() == 0.0);

  // collinear overlap: a horizontal translate of the same solenoid
  ImmersedSolenoid over = s1.translated(Vec{0.3, 0.0});
  CHECK(enumerate_crossings(s1, over).status == Transversality::kDegenerate);
  PerturbResult fix = perturb_transverse(over, s1, 7);
  CHECK(fix.transverse);
  CHECK(fix.retries <= 5);
  CHECK(fix.shift.norm() <= 1e-2);
  CHECK(std::abs(intersection_pairing(fix.shifted, s1).total) <= 1e-12);

  // a vertex of the (0,1) core placed on the (1,0) core
  auto c1 = core_cycle(s1, 0);
  auto c2 = core_cycle(s2, 0);
  const Vec vertex = c2[3];
  Vec t{0.0, c1[0][1] - vertex[1]};
  ImmersedSolenoid touching = s2.translated(t);
  CrossingSet cs = enumerate_crossings(s1, touching);
  CHECK(cs.status == Transversality::kDegenerate);
  PerturbResult fix2 = perturb_transverse(touching, s1, 11);
  CHECK(fix2.transverse);
  CHECK(fix2.retries <= 5);
  for (const auto& r : enumerate_crossings(fix2.shifted, s1).records) CHECK(std::abs(r.sin_angle) >= 1e-6);
  CHECK(intersection_pairing(s1, fix2.shifted).total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bucketed path crossings match brute force") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> step(-0.6, 0.6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec> a{{0.2, 0.3}}, b{{0.7, 0.1}};
    for (int k = 0; k < 30; ++k) a.push_back(a.back() + Vec{step(rng), step(rng)});
    for (int k = 0; k < 30; ++k) b.push_back(b.back() + Vec{step(rng), step(rng)});
    std::int64_t want = brute_signed_crossings(a, b);
    PathCrossingCount got = count_path_crossings(a, b, 16);
    CHECK(got.signed_total() == want);
    PathCrossingCount ser = count_path_crossings_serial(a, b, 16);
    CHECK(ser.positive == got.positive);
    CHECK(ser.negative == got.negative);
    CHECK(count_path_crossings(a, b, 3).signed_total() == want);
  }
}

TEST_CASE("leafwise pairing limit") {
  auto d = golden_denjoy();
  ImmersedSolenoid s1 = make({1, 0}, d);
  ImmersedSolenoid s2 = transverse_placement(make({0, 1}, d), s1);
  double x1 = sample_cantor_points(*d, 1, 0.37).front();
  double x2 = sample_cantor_points(*d, 1, 0.81).front();
  auto est = leafwise_pairing_limit(s1, s2, x1, x2, {2500, 5000, 10000});
  double pairing = intersection_pairing(s1, s2).total;
  std::vector<double> dev;
  for (const auto& e : est) {
    double l1 = e.length1 / e.returns, l2 = e.length2 / e.returns;
    dev.push_back(std::abs(e.value - pairing / (l1 * l2)));
  }
  CHECK(dev.back() <= 0.02);
  CHECK(dev[1] <= dev[0] + 0.01);
  CHECK(dev[2] <= dev[1] + 0.01);

  // the same leaf against itself
  auto self = leafwise_pairing_limit(s1, s1, x1, x1, {2000});
  CHECK(self[0].signed_crossings == 0);
}
