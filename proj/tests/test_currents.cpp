#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "solab/currents.hpp"
#include "solab/error.hpp"

using namespace solab;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

DenjoyRef golden_denjoy() { return denjoy_build(RotationNumber::golden(), GapSchedule{}); }

// coarse schedule: fewer affine pieces, used where quadrature along every leaf is the oracle
DenjoyRef coarse_denjoy() {
  GapSchedule g;
  g.n_max = 1500;
  g.tolerance = 1e-3;
  return denjoy_build(RotationNumber::golden(), g);
}

// Morse-Smale fixture: attractors at 1/4 and 3/4 in branches [0.1, 0.6) and [0.6, 1.1)
ImmersedSolenoid morse_smale_fixture(double w1, double w2, std::vector<HomologyVector> classes) {
  BaseMap ms{MorseSmaleMap(2)};
  TransversalMeasure mu = TransversalMeasure::atomic(ms, {0.25, 0.75}, {w1, w2});
  ImmersionLayout lay;
  return ImmersedSolenoid(ms, mu, partition_at(mu, {0.1, 0.6}), build_branches(classes, lay), lay);
}

ImmersedSolenoid rotation_fixture(std::vector<HomologyVector> classes, std::vector<double> bounds) {
  BaseMap rot{RigidRotation(kGolden)};
  TransversalMeasure mu = TransversalMeasure::canonical(rot);
  ImmersionLayout lay;
  return ImmersedSolenoid(rot, mu, partition_at(mu, std::move(bounds)), build_branches(classes, lay), lay);
}

}  // namespace

TEST_CASE("trig polynomials and line integrals") {
  TrigPolynomial phi = TrigPolynomial::random(2, 6, 4, 77);
  CHECK(phi.terms().size() == 6);
  Vec x{0.31, -0.42};
  Vec g = phi.gradient(x);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Vec e = Vec::unit(2, j) * h;
    CHECK(g[j] == doctest::Approx((phi(x + e) - phi(x - e)) / (2 * h)).epsilon(1e-6));
  }
  CHECK(phi(x + Vec{3.0, -2.0}) == doctest::Approx(phi(x)).epsilon(1e-12));
  CHECK(std::abs(phi(x)) <= phi.sup_bound());

  // fundamental theorem along a PL path
  TestForm f = TestForm::exact_form(2, phi);
  std::vector<Vec> path{{0.1, 0.2}, {1.3, 0.25}, {1.1, 2.0}, {-0.4, 0.7}};
  CHECK(integrate_along(f, path) == doctest::Approx(phi(path.back()) - phi(path.front())).epsilon(1e-11));
  TestForm c = TestForm::constant_form(Vec{0.3, -2.0});
  CHECK(integrate_along(c, path) == doctest::Approx(c.constant.dot(path.back() - path.front())).epsilon(1e-13));
}

TEST_CASE("cutoff forms vanish on the base box and stay cohomologous") {
  auto d = golden_denjoy();
  ImmersedSolenoid s = realize({0.3, 0.7}, CycleLibrary::standard(2), d);
  TestForm f = cutoff_form(s, Vec{0.3, 0.7});
  const auto& lay = s.layout();
  for (double t : {0.0, 0.3, 0.9})
    for (double v : {0.0, 0.5, 0.99}) {
      Vec p = lay.base_point + s.window_point(t * lay.window, v, 1.0 - v);
      CHECK(f(p).max_abs() < 1e-15);
    }
  // closed loops far from the box integrate like a.dx
  std::vector<Vec> loop{{0.6, 0.6}, {1.6, 0.6}, {1.6, 1.6}};
  CHECK(integrate_along(f, loop) == doctest::Approx(1.0).epsilon(1e-12));
  // a loop through the box: the potential term is periodic, so a.dx survives
  std::vector<Vec> through{{0.12, 0.1}, {1.12, 0.1}};
  CHECK(integrate_along(f, through) == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("generalized current of realized solenoids") {
  auto d = golden_denjoy();
  auto lib = CycleLibrary::standard(2);
  for (HomologyVector a : {HomologyVector{0.3, 0.7}, HomologyVector{-1.2, 0.4}, HomologyVector{5, 2}}) {
    ImmersedSolenoid s = realize(a, lib, d);
    CHECK(generalized_current(s).dist(a) < 1e-9);
  }
  ImmersedSolenoid s = realize({0.3, 0.7}, lib, d);
  CHECK(pair_current_form(s, TestForm::basis(2, 0)) == doctest::Approx(0.3).epsilon(1e-12));
  // linearity in the measure
  HomologyVector c3 = generalized_current(s.with_measure(s.measure().scaled(3.0)));
  CHECK(c3.dist(HomologyVector{0.9, 2.1}) < 1e-9);

  ImmersionLayout lay3;
  lay3.base_point = Vec{0.1, 0.1, 0.1};
  ImmersedSolenoid e = realize({0.2, -0.3, 0.5}, CycleLibrary::standard(3), d, lay3);
  CHECK(generalized_current(e).dist(HomologyVector{0.2, -0.3, 0.5}) < 1e-9);
}

TEST_CASE("atomic currents on a Morse-Smale suspension") {
  ImmersedSolenoid s = morse_smale_fixture(0.4, 0.6, {{1, 0}, {1, 2}});
  // hand value: 0.4 (1,0) + 0.6 (1,2)
  CHECK(generalized_current(s).dist(HomologyVector{1.0, 1.2}) < 1e-14);
  // line integrals of each atom's leaf, summed by hand
  TrigPolynomial phi = TrigPolynomial::random(2, 4, 3, 5);
  TestForm f = TestForm::exact_form(2, phi);
  f.constant = Vec{0.7, -0.2};
  double hand = 0.0;
  const auto& mu = s.measure();
  for (std::size_t k = 0; k < 2; ++k)
    hand += mu.atom_weights()[k] * integrate_along(f, return_path(s, s.base().locate(mu.atom_points()[k])).vertices);
  CHECK(fundamental_class_integral(s, f) == doctest::Approx(hand).epsilon(1e-14));
  CHECK(pair_current_form(s, f) == doctest::Approx(hand).epsilon(1e-10));
}

TEST_CASE("exact forms pair to zero") {
  auto d = golden_denjoy();
  ImmersedSolenoid s = realize({0.3, 0.7}, CycleLibrary::standard(2), d);
  ImmersedSolenoid r = rotation_fixture({{1, 0}, {0, 1}, {1, 1}}, {0.05, 0.4, 0.7});
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TestForm f = TestForm::exact_form(2, TrigPolynomial::random(2, 5, 4, seed));
    CHECK(std::abs(pair_current_form(s, f)) <= 1e-6);
    CHECK(std::abs(pair_current_form(r, f)) <= 1e-6);
  }
  ImmersionLayout lay3;
  lay3.base_point = Vec{0.1, 0.1, 0.1};
  ImmersedSolenoid e = realize({0.2, 0.3, 0.5}, CycleLibrary::standard(3), d, lay3);
  CHECK(std::abs(pair_current_form(e, TestForm::exact_form(3, TrigPolynomial::random(3, 5, 3, 99)))) <= 1e-6);
}

TEST_CASE("pairing depends only on the cohomology class") {
  auto d = golden_denjoy();
  ImmersedSolenoid s = realize({0.3, 0.7}, CycleLibrary::standard(2), d);
  Vec a{1.5, -0.5};
  double plain = pair_current_form(s, TestForm::constant_form(a));
  CHECK(plain == doctest::Approx(0.45 - 0.35).epsilon(1e-10));
  double cut = pair_current_form(s, cutoff_form(s, a));
  CHECK(std::abs(cut - plain) <= 1e-9);
  TestForm mixed = cutoff_form(s, a, TrigPolynomial::random(2, 4, 3, 12));
  CHECK(std::abs(pair_current_form(s, mixed) - plain) <= 1e-6);
}

TEST_CASE("integration map agrees with the flow-box pairing") {
  auto d = coarse_denjoy();
  ImmersedSolenoid s = realize({0.3, 0.7}, CycleLibrary::standard(2), d);
  std::vector<TestForm> forms{TestForm::basis(2, 1), TestForm::exact_form(2, TrigPolynomial::random(2, 3, 2, 4)),
                              cutoff_form(s, Vec{-1.0, 2.0}, TrigPolynomial::random(2, 2, 2, 8))};
  for (const auto& f : forms) {
    double flow_box = pair_current_form(s, f);
    double integral = fundamental_class_integral(s, f);
    CHECK(integral == doctest::Approx(flow_box).epsilon(1e-9).scale(1.0));
    CHECK(fundamental_class_integral_serial(s, f) == integral);
  }
}

TEST_CASE("Ruelle-Sullivan map on the atom polytope") {
  ImmersedSolenoid s = morse_smale_fixture(1.0, 1.0, {{1, 0}, {0, 1}});
  BaseMap ms = s.base();
  TransversalMeasure m1 = TransversalMeasure::atomic(ms, {0.25}, {1.0});
  TransversalMeasure m2 = TransversalMeasure::atomic(ms, {0.75}, {1.0});
  HomologyVector p1 = ruelle_sullivan_map(s, {{1.0, m1}});
  HomologyVector p2 = ruelle_sullivan_map(s, {{1.0, m2}});
  CHECK(p1.dist(HomologyVector{1, 0}) < 1e-14);
  CHECK(p2.dist(HomologyVector{0, 1}) < 1e-14);
  CHECK(ruelle_sullivan_map(s, {{1.0, m1}, {1.0, m2}}).dist(p1 + p2) < 1e-14);
  CHECK(ruelle_sullivan_map(s, {{2.5, m1}, {-0.5, m2}}).dist(2.5 * p1 - 0.5 * p2) < 1e-14);

  // sampled probability measures map into the segment [p1, p2]; its ends are the atoms
  double best_lo = 1e9, best_hi = -1e9;
  for (int k = 0; k <= 10; ++k) {
    double t = k / 10.0;
    HomologyVector c = ruelle_sullivan_map(s, {{1.0 - t, m1}, {t, m2}});
    CHECK(std::abs(c[0] + c[1] - 1.0) < 1e-14);
    best_lo = std::min(best_lo, c[1]);
    best_hi = std::max(best_hi, c[1]);
  }
  CHECK(best_lo == 0.0);
  CHECK(best_hi == 1.0);

  BaseMap rot{RigidRotation(kGolden)};
  CHECK_THROWS_AS(ruelle_sullivan_map(s, {{1.0, TransversalMeasure::canonical(rot)}}), ValidationError);
}

TEST_CASE("biweight profile") {
  const double eps = 0.02;
  double mass = 0.0;
  const int m = 4000;
  for (int k = 0; k < m; ++k) mass += biweight(-eps + (k + 0.5) * 2 * eps / m, eps) * 2 * eps / m;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  for (double t : {-0.015, -0.002, 0.0, 0.011}) {
    double dh = 1e-7;
    CHECK((biweight_cdf(t + dh, eps) - biweight_cdf(t - dh, eps)) / (2 * dh) == doctest::Approx(biweight(t, eps)).epsilon(1e-5));
  }
  CHECK(biweight_cdf(-0.02, eps) == 0.0);
  CHECK(biweight_cdf(0.0, eps) == 0.5);
  CHECK(biweight_cdf(0.03, eps) == 1.0);
}

TEST_CASE("dual raster form reproduces the current") {
  auto d = golden_denjoy();
  ImmersedSolenoid s = realize({0.3, 0.7}, CycleLibrary::standard(2), d);
  RasterOptions opt;
  opt.n = 256;
  opt.epsilon = 0.04;
  CHECK_THROWS_AS(dual_form_raster(s, opt), ValidationError);  // wider than half the lane spacing
  opt.epsilon = 0.02;
  opt.n = 128;
  CHECK_THROWS_AS(dual_form_raster(s, opt), ValidationError);  // N eps < 8
  opt.n = 512;
  GridForm g = dual_form_raster(s, opt);
  HomologyVector c = g.dual_components();
  CHECK(c.dist(generalized_current(s)) <= 0.01);
  CHECK(g.wedge_with(0) == doctest::Approx(-c[0]));

  GridForm serial = dual_form_raster_serial(s, opt);
  CHECK(serial.eta1 == g.eta1);
  CHECK(serial.eta2 == g.eta2);

  auto path = std::filesystem::temp_directory_path() / "solab_grid_test.bin";
  write_grid_file(path.string(), g);
  GridForm back = read_grid_file(path.string());
  CHECK(back.n == g.n);
  CHECK(back.spacing == g.spacing);
  CHECK(back.eta1 == g.eta1);
  CHECK(back.eta2 == g.eta2);
  std::filesystem::remove(path);

  // single loop of class (1,0) carrying an atom of weight 1
  ImmersedSolenoid one = morse_smale_fixture(1.0, 0.0, {{1, 0}, {0, 1}});
  GridForm g1 = dual_form_raster(one, opt);
  CHECK(g1.dual_components().dist(HomologyVector{1, 0}) <= 0.01);
}
