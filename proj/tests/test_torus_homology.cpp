#include <cmath>
#include <random>

#include "doctest.h"
#include "solab/error.hpp"
#include "solab/torus_homology.hpp"

using namespace solab;

namespace {

// Brute-force closing oracle: every lattice displacement d = from - to + m
// within radius sqrt(n)/2, minimal length, lexicographic tie-break.
HomologyVector closing_oracle(const Vec& start, const Vec& end) {
  const int n = start.dim();
  Vec best;
  double best_len = 1e300;
  const Vec d0 = start - end;
  const int c0 = -static_cast<int>(std::floor(d0[0])), c1 = -static_cast<int>(std::floor(d0[1]));
  for (int m0 = c0 - 2; m0 <= c0 + 2; ++m0)
    for (int m1 = c1 - 2; m1 <= c1 + 2; ++m1) {
      Vec d = d0;
      d[0] += m0;
      d[1] += m1;
      double len = d.norm();
      if (len > std::sqrt(double(n)) / 2 + 1e-12) continue;
      if (len < best_len - 1e-12) best = d, best_len = len;
    }
  return HomologyVector(end - start + best).rounded();
}

}  // namespace

TEST_CASE("close_curve matches lattice arithmetic on the worked example") {
  PLPath p = PLPath::arc_length({Vec{0.1, 0.1}, Vec{3.4, 2.2}});
  HomologyVector c = close_curve(p, p.param_begin(), p.param_end());
  CHECK(c[0] == 3.0);
  CHECK(c[1] == 2.0);
  Vec d = closing_displacement(Vec{3.4, 2.2}, Vec{0.1, 0.1});
  CHECK(d[0] == doctest::Approx(-0.3));
  CHECK(d[1] == doctest::Approx(-0.1));
}

TEST_CASE("close_curve on a closed lift returns its displacement") {
  PLPath p = PLPath::timed({Vec{0.2, 0.3}, Vec{1.2, 0.3}, Vec{1.2, -0.7}, Vec{2.2, 1.3}}, {0, 1, 2, 3});
  HomologyVector c = close_curve(p, 0.0, 3.0);
  CHECK(c[0] == 2.0);
  CHECK(c[1] == 1.0);
}

TEST_CASE("close_curve agrees with the brute-force closing oracle on random paths") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec> vs{Vec{u(rng), u(rng)}};
    for (int k = 0; k < 6; ++k) vs.push_back(vs.back() + Vec{u(rng), u(rng)});
    PLPath p = PLPath::arc_length(vs);
    std::uniform_real_distribution<double> par(p.param_begin(), p.param_end());
    double s = par(rng), t = par(rng);
    if (s > t) std::swap(s, t);
    if (t - s < 1e-6) continue;
    HomologyVector got = close_curve(p, s, t);
    HomologyVector want = closing_oracle(p.lift_at(s), p.lift_at(t));
    CHECK(got.is_integral(0.0));
    CHECK(got[0] == want[0]);
    CHECK(got[1] == want[1]);
  }
}

TEST_CASE("close_curve rejects bad horizons") {
  PLPath p = PLPath::arc_length({Vec{0.0, 0.0}, Vec{1.0, 0.0}});
  CHECK_THROWS_AS(close_curve(p, 0.5, 0.2), ValidationError);
  CHECK_THROWS_AS(close_curve(p, -1.0, 0.5), ValidationError);
}

TEST_CASE("closing strategies differ by at most the closing bound") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  ClosingStrategy other{ClosingStrategy::Rule::kLargestAdmissible};
  for (int trial = 0; trial < 100; ++trial) {
    Vec a{u(rng), u(rng)}, b{u(rng), u(rng)};
    Vec d1 = closing_displacement(b, a);
    Vec d2 = closing_displacement(b, a, other);
    CHECK(d1.norm() <= std::sqrt(2.0) / 2 + 1e-12);
    CHECK(d2.norm() <= std::sqrt(2.0) / 2 + 1e-12);
    HomologyVector c1 = close_lift(a, b), c2 = close_lift(a, b, other);
    CHECK((c1.vec() - c2.vec()).norm() <= 2 * std::sqrt(2.0) + 1e-12);
  }
}

TEST_CASE("calibrate returns the integer class of a loop") {
  Vec base{0.3, 0.4};
  PLPath loop = PLPath::arc_length({base, base + Vec{0.7, 0.2}, base + Vec{1.5, -0.4}, base + Vec{2.0, -1.0}});
  BumpProfile tent;
  auto phi = build_calibrating_pou(tent, base);
  HomologyVector c = calibrate(phi, loop, loop.param_begin(), loop.param_end());
  CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(-1.0).epsilon(1e-12));
  auto id = CalibratingFunction::identity_lift(base);
  HomologyVector c2 = calibrate(id, loop, loop.param_begin(), loop.param_end());
  CHECK(c2[0] == doctest::Approx(2.0));
  PLPath back = PLPath::arc_length({base, base + Vec{0.4, 0.1}, base});
  CHECK(calibrate(phi, back, back.param_begin(), back.param_end()).vec().max_abs() == 0.0);
}

TEST_CASE("the tent bump in one dimension gives the identity calibrating function") {
  BumpProfile tent;
  auto phi = build_calibrating_pou(tent, Vec{0.0});
  for (double x = -2.0; x <= 2.0; x += 0.0625) CHECK(phi(Vec{x})[0] == doctest::Approx(x).epsilon(1e-13));
}

TEST_CASE("calibrating functions are equivariant and Lipschitz-bounded") {
  BumpProfile poly{BumpProfile::Shape::kPolynomial, 0.8, 2};
  Vec base{0.25, 0.6};
  auto phi = build_calibrating_pou(poly, base);
  CHECK(phi(base).max_abs() < 1e-14);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    Vec x{u(rng), u(rng)};
    Vec m{std::round(u(rng)), std::round(u(rng))};
    Vec diff = phi(x + m) - phi(x) - m;
    CHECK(diff.max_abs() < 1e-12);
  }
  double lip = phi.sup_differential();
  double dev = phi.sup_deviation_from_identity();
  CHECK(dev < 1.0);
  // |Phi(gamma)| <= C l(gamma) on loops
  for (int k = 0; k < 50; ++k) {
    Vec m{std::round(u(rng)), std::round(u(rng))};
    if (m.max_abs() == 0) continue;
    PLPath loop = PLPath::arc_length({base, base + Vec{0.37, 0.11}, base + m});
    HomologyVector c = calibrate(phi, loop, loop.param_begin(), loop.param_end());
    CHECK(c.norm() <= lip * loop.length() * 1.01 + 1e-9);
  }
}

TEST_CASE("partition-of-unity and identity calibrations stay a bounded distance apart") {
  BumpProfile tent{BumpProfile::Shape::kTent, 0.9, 0};
  Vec base{0.0, 0.0};
  auto phi = build_calibrating_pou(tent, base);
  auto id = CalibratingFunction::identity_lift(base);
  double dev = phi.sup_deviation_from_identity();
  PLPath line = PLPath::timed({Vec{0.0, 0.0}, Vec{1000.0, 618.0}}, {0.0, 1000.0});
  for (double t : {10.0, 100.0, 999.0}) {
    Vec d = calibrate(phi, line, 0.0, t).vec() - calibrate(id, line, 0.0, t).vec();
    CHECK(d.max_abs() <= 2 * dev + 1e-9);
  }
}

TEST_CASE("calibrating construction rejects supports that do not cover") {
  CHECK_THROWS_AS(build_calibrating_pou(BumpProfile{BumpProfile::Shape::kTent, 0.4, 0}, Vec{0.0, 0.0}),
                  ConstructionError);
}

TEST_CASE("stable norm on the flat torus") {
  // oracle: minimal Euclidean length over lattice representatives = |m|
  CHECK(stable_norm(HomologyVector{3.0, 4.0}, 10).value == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(stable_norm(HomologyVector{0.0, 0.0}, 5).value == 0.0);
  CHECK(stable_norm(HomologyVector{2.0, 2.0}, 5).value == doctest::Approx(2 * std::sqrt(2.0)));
  auto est = stable_norm(HomologyVector{0.3, 0.7}, 50);
  CHECK(est.sequence.size() == 50);
  CHECK(est.value == doctest::Approx(std::hypot(0.3, 0.7)).epsilon(1e-3));
}

TEST_CASE("minimal loop lengths satisfy the additive bound with twice the diameter") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(-6, 6);
  const double c0 = std::sqrt(2.0);
  for (int k = 0; k < 100; ++k) {
    HomologyVector a{double(u(rng)), double(u(rng))}, b{double(u(rng)), double(u(rng))};
    double lab = minimal_loop_length(HomologyVector(a.vec() + b.vec()));
    CHECK(lab <= minimal_loop_length(a) + minimal_loop_length(b) + c0);
  }
}
