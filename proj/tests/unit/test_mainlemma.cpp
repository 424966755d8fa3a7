#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oscillab/error.hpp"
#include "oscillab/mainlemma.hpp"

using namespace oscillab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("box-ball measure") {
  // Box inside ball, ball inside box, half ball.
  CHECK(box_ball_measure(Point{0.0, 0.0}, Point{0.5, 0.5}, Point{0.0, 0.0}, 2.0) == doctest::Approx(0.25));
  CHECK(box_ball_measure(Point{-5.0, -5.0}, Point{5.0, 5.0}, Point{0.0, 0.0}, 1.0) == doctest::Approx(kPi));
  CHECK(box_ball_measure(Point{0.0, -5.0}, Point{5.0, 5.0}, Point{0.0, 0.0}, 1.0) == doctest::Approx(kPi / 2));
  CHECK(box_ball_measure(Point{0.0, 0.0}, Point{5.0, 5.0}, Point{0.0, 0.0}, 1.0) == doctest::Approx(kPi / 4));
  CHECK(box_ball_measure(Point{2.0, 2.0}, Point{3.0, 3.0}, Point{0.0, 0.0}, 1.0) == 0.0);
  const Point lo3(3, -5.0), hi3(3, 5.0), o3(3, 0.0);
  CHECK(box_ball_measure(lo3, hi3, o3, 1.0) == doctest::Approx(4 * kPi / 3).epsilon(1e-4));
  CHECK(box_ball_measure(Point{0.0, 0.0, 0.0}, hi3, o3, 1.0) == doctest::Approx(kPi / 6).epsilon(1e-4));
  CHECK(ball_volume(3, 2.0) == doctest::Approx(32 * kPi / 3));
}

TEST_CASE("box-ball measure agrees with Monte Carlo") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1, 1);
  const Point lo{-0.3, 0.1}, hi{0.8, 0.9}, c{0.2, 0.3};
  const double r = 0.6;
  int hits = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const Point x{lo[0] + (hi[0] - lo[0]) * (U(rng) + 1) / 2, lo[1] + (hi[1] - lo[1]) * (U(rng) + 1) / 2};
    hits += norm(x - c) <= r;
  }
  const double mc = (hi[0] - lo[0]) * (hi[1] - lo[1]) * hits / n;
  CHECK(box_ball_measure(lo, hi, c, r) == doctest::Approx(mc).epsilon(0.01));
}

TEST_CASE("empty E: rho is the floor and M is 2^m0") {
  LemmaConfig lc;
  lc.N = 64;
  lc.dim = 2;
  const RogueConfiguration cfg(64, 2, {});
  const auto rep = run_lemma(cfg, lc);
  for (double r : rep.rho.rho) CHECK(r == doctest::Approx(2 * std::sqrt(2.0)));
  CHECK(lc.base_order() == 4);
  CHECK(rep.cover.m0 == 4);
  const StepFunction M(rep.cover);
  for (int k = 1; k <= lc.max_layer(); ++k) CHECK(M(k) == doctest::Approx(16));
  CHECK(rep.passed());
  CHECK(rep.claim1_lhs == 0.0);
  CHECK(rep.cover.covers_all);
  CHECK(rep.cover.maximal);
}

TEST_CASE("random configurations are reproducible and distinct") {
  const auto a = RogueConfiguration::random(32, 2, 40, 11);
  const auto b = RogueConfiguration::random(32, 2, 40, 11);
  CHECK(a.rogue() == b.rogue());
  auto cubes = a.rogue();
  std::sort(cubes.begin(), cubes.end());
  CHECK(std::adjacent_find(cubes.begin(), cubes.end()) == cubes.end());
  CHECK(a.rogue_count() == 40);
  for (const auto& c : a.rogue()) CHECK(a.is_rogue(c.corner));
  CHECK_THROWS_AS(RogueConfiguration::random(8, 2, 1000, 1), Error);
}

TEST_CASE("lemma checks hold for random E and are order independent") {
  for (std::uint64_t seed : {1, 2}) {
    LemmaConfig lc;
    lc.N = 32;
    lc.dim = 2;
    const auto cfg = RogueConfiguration::random(32, 2, 32, seed);
    const auto rep = run_lemma(cfg, lc);
    CHECK(rep.passed());
    CHECK(rep.x_count >= 10.0 / 11.0 * rep.cubes);
    auto shuffled = cfg.rogue();
    std::mt19937_64 rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto rep2 = run_lemma(RogueConfiguration(32, 2, shuffled), lc);
    CHECK(rep2.x_count == rep.x_count);
    CHECK(rep2.claim1_lhs == rep.claim1_lhs);
    CHECK(rep2.cover.cubes.size() == rep.cover.cubes.size());
  }
}

TEST_CASE("density gate") {
  LemmaConfig lc;
  lc.N = 16;
  lc.dim = 2;
  const auto cfg = RogueConfiguration::random(16, 2, 200, 3);
  CHECK_FALSE(run_lemma(cfg, lc).c0_gate);
}

TEST_CASE("r(x) grows near a rogue cluster") {
  LemmaConfig lc;
  lc.N = 32;
  lc.dim = 2;
  std::vector<LatticeCube> block;
  for (int i = -4; i < 4; ++i)
    for (int j = -4; j < 4; ++j) block.push_back({IPoint{i, j}});
  const RogueConfiguration cfg(32, 2, block);
  const auto inside = compute_r(cfg, Point{0.5, 0.5}, lc);
  const auto far = compute_r(cfg, Point{14.5, 14.5}, lc);
  CHECK(inside.value > far.value);
  CHECK(rho_cube(cfg, LatticeCube{IPoint{0, 0}}, lc) > 2 * std::sqrt(2.0));
}

TEST_CASE("bound algebra") {
  CHECK(psi(0, 2) == doctest::Approx(std::pow(std::log(2.0), 2)));
  CHECK(psi(0, 2) == doctest::Approx(0.4805).epsilon(1e-4));
  CHECK(psi(0, 3) == doctest::Approx(std::pow(std::log(2.0), 1.5)));
  for (double E : {10.0, 300.0, 5000.0}) {
    const auto t = phi_argmin(64, E, 2);
    const auto g = phi_argmin_grid(64, E, 2);
    CHECK(t.value == doctest::Approx(g.value).epsilon(0.01));
  }
  CHECK(bound_value(64, 128, 2) == doctest::Approx(64 * psi(2.0, 2)));
}

TEST_CASE("bound shapes across scales") {
  // f = t: E ~ R gives bound ~ R. f = t^1.5, d = 2: bound ~ (R^{1/2} log^2 R).
  std::vector<double> lin, pow15;
  for (int k = 4; k <= 8; ++k) {
    const double R = std::ldexp(1.0, k);
    lin.push_back(bound_value(R, R, 2) / R);
    pow15.push_back(bound_value(R, std::pow(R, 1.5), 2) / (std::sqrt(R) * std::pow(std::log(R), 2)));
  }
  for (const auto* v : {&lin, &pow15}) {
    const auto [mn, mx] = std::minmax_element(v->begin(), v->end());
    CHECK(*mx / *mn < 2.0);
  }
}

TEST_CASE("config validation") {
  LemmaConfig lc;
  lc.N = 48;
  CHECK_THROWS_AS(lc.validate(), Error);
  lc.N = 64;
  lc.dim = 4;
  CHECK_THROWS_AS(lc.validate(), Error);
}
