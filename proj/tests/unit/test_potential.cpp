#include <cmath>
#include <map>
#include <numbers>

#include "doctest.h"
#include "oscillab/error.hpp"
#include "oscillab/parallel.hpp"
#include "oscillab/potential.hpp"

using namespace oscillab;

TEST_CASE("kernel") {
  CHECK(kernel(0.5, 2) == doctest::Approx(std::log(0.5)));
  CHECK(kernel(0.5, 3) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(kernel(0.0, 2), Error);
  CHECK_THROWS_AS(kernel(-1.0, 3), Error);
}

TEST_CASE("energy of two atoms") {
  DiscreteMeasure nu;
  nu.points = {Point{0.0, 0.0}, Point{0.5, 0.0}};
  nu.weights = {0.5, 0.5};
  // Off-diagonal: 2 * 1/4 * log(1/2); diagonal uses half the gap: 2 * 1/4 * log(1/4).
  const double want = 0.5 * std::log(0.5) + 0.5 * std::log(0.25);
  CHECK(energy(nu).value == doctest::Approx(want));
  CHECK_FALSE(energy(nu).flagged);
  DiscreteMeasure one;
  one.points = {Point{0.0, 0.0}, Point{0.0, 0.0}};
  one.weights = {0.5, 0.5};
  CHECK(energy(one).flagged);
  CHECK(one.merged().points.size() == 1);
}

TEST_CASE("equilibrium: symmetric pair and the circle") {
  const auto pair = equilibrium({Point{0.0, 0.0}, Point{0.5, 0.0}});
  CHECK(pair.measure.weights[0] == doctest::Approx(0.5));
  std::vector<Point> circle;
  for (int i = 0; i < 256; ++i) {
    const double t = 2 * std::numbers::pi * i / 256;
    circle.push_back(Point{0.25 * std::cos(t), 0.25 * std::sin(t)});
  }
  const auto e = equilibrium(circle);
  CHECK(e.energy == doctest::Approx(-std::log(4.0)).epsilon(0.05));
  CHECK(e.residual < 1e-6);
  double total = 0;
  for (double w : e.measure.weights) total += w;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("equilibrium beats the uniform measure on a segment") {
  std::vector<Point> seg;
  for (int i = 0; i < 128; ++i) seg.push_back(Point{-1 + 2 * (i + 0.5) / 128, 0.0});
  const auto e = equilibrium(seg);
  DiscreteMeasure uniform;
  uniform.points = seg;
  uniform.weights.assign(seg.size(), 1.0 / seg.size());
  CHECK(e.energy >= energy(uniform).value);
  // Arcsine shape: the end weights exceed the middle ones.
  CHECK(e.measure.weights.front() > e.measure.weights[64]);
}

TEST_CASE("splitmix64 reference value") { CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL); }

TEST_CASE("walk on spheres: annulus oracle and determinism") {
  SphereSet E(Point{0.0, 0.0}, 0.25);
  const auto w = wos_harmonic_measure(Point{0.5, 0.0}, E, 20000, 42);
  CHECK(std::abs(w.p - 0.5) <= 3 * w.standard_error);
  CHECK(w.capped == 0);
  set_thread_count(1);
  const auto single = wos_harmonic_measure(Point{0.5, 0.0}, E, 5000, 9);
  set_thread_count(3);
  const auto multi = wos_harmonic_measure(Point{0.5, 0.0}, E, 5000, 9);
  set_thread_count(0);
  CHECK(single.p == multi.p);
  CHECK_THROWS_AS(wos_harmonic_measure(Point{0.25, 0.0}, E, 10, 1), Error);
  CHECK_THROWS_AS(wos_harmonic_measure(Point{1.5, 0.0}, E, 10, 1), Error);
  // Empty E is never hit.
  CHECK(wos_harmonic_measure(Point{0.5, 0.0}, EmptySet(2), 1000, 1).p == 0.0);
}

TEST_CASE("distance sets") {
  CapSet arc(Point{0.0, 0.0}, 1.0, Point{1.0, 0.0}, std::numbers::pi / 4);
  CHECK(arc.distance(Point{2.0, 0.0}) == doctest::Approx(1.0));
  CHECK(arc.distance(Point{0.0, 0.0}) == doctest::Approx(1.0));
  // Beyond the rim the nearest point is the endpoint.
  const Point end{std::cos(std::numbers::pi / 4), std::sin(std::numbers::pi / 4)};
  CHECK(arc.distance(Point{0.0, 1.0}) == doctest::Approx(norm(Point{0.0, 1.0} - end)));
  BoxUnionSet boxes({{Point{0.0, 0.0}, Point{1.0, 1.0}}});
  CHECK(boxes.distance(Point{2.0, 2.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(boxes.distance(Point{0.5, 0.5}) == 0.0);
  SegmentSet seg(Point{0.0, 0.0}, Point{1.0, 0.0});
  CHECK(seg.distance(Point{0.5, 0.3}) == doctest::Approx(0.3));
}

TEST_CASE("Frostman capping keeps every dyadic cell under the gauge") {
  const int D = 6, d = 2;
  std::vector<IPoint> cells;
  for (int i = 0; i < 64; ++i)
    for (int j = 20; j < 24; ++j) cells.push_back(IPoint{i, j});
  const auto fr = frostman(cells, D, 500, 1);
  for (int level = 0; level <= D; ++level) {
    std::map<IPoint, double> mass;
    const double h = std::ldexp(1.0, -D);
    for (std::size_t i = 0; i < fr.measure.points.size(); ++i) {
      IPoint key(d);
      for (int a = 0; a < d; ++a) key[a] = static_cast<std::int64_t>(fr.measure.points[i][a] / h) >> (D - level);
      mass[key] += fr.measure.weights[i];
    }
    for (const auto& [k, m] : mass) CHECK(m <= std::pow(std::ldexp(1.0, -level), d - 1) * (1 + 1e-12));
  }
  CHECK(fr.total_mass <= 1.0 + 1e-12);
  CHECK(fr.total_mass > 0.5);
  CHECK(fr.growth_constant > 0);
  CHECK_THROWS_AS(frostman({IPoint{70, 0}}, D), Error);
}

TEST_CASE("claim family and the sharp annulus") {
  const auto fam = claim_family(2, 64);
  CHECK(fam.size() == 12);
  for (const auto& m : fam) {
    CHECK(m.set->distance(Point{0.0, 0.0}) > 0.0);
    for (const auto& p : m.samples) CHECK(m.set->distance(p) < 1e-9);
  }
  auto u = [](const Point& x) { return std::max(0.0, std::log(norm(x) / 0.25) / std::log(4.0)); };
  const auto o = check_obs1(u, Point{0.5, 0.0}, BallSet(Point{0.0, 0.0}, 0.25), 20000, 5);
  CHECK(o.sup == doctest::Approx(1.0));
  CHECK(o.u_x0 == doctest::Approx(0.5));
  CHECK(std::abs(o.gap_in_se) <= 3.0);
  CHECK(o.chain_holds);
}
