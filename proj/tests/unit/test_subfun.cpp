#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oscillab/error.hpp"
#include "oscillab/subfun.hpp"
#include "oscillab/verify.hpp"

using namespace oscillab;

namespace {
constexpr double kPi = std::numbers::pi;
GrowthParameters params(const char* f, int d) { return GrowthParameters{GrowthFunction::parse(f), d}; }
}  // namespace

TEST_CASE("base pieces at closed-form points") {
  CHECK(eval_W(Point{0.0, 1.0}) == doctest::Approx(std::cosh(2 * kPi)).epsilon(1e-13));
  CHECK(eval_W(Point{0.0, 1.0}) == doctest::Approx(267.7468).epsilon(1e-6));
  CHECK(eval_T(1.0, Point{1.0, 0.0}) == doctest::Approx(11.5920).epsilon(1e-5));
  const Point g{2 * std::log(2.0) / kPi, 0.0};
  CHECK(eval_T(1.0, g) == doctest::Approx(2.125).epsilon(1e-13));
  CHECK(eval_L(1.0, g) == doctest::Approx(1.125).epsilon(1e-13));
  CHECK(g_threshold(1.0, 2) == doctest::Approx(g[0]));
  // W vanishes outside its strip, L behind its origin.
  CHECK(eval_W(Point{0.3, 0.0}) == 0.0);
  CHECK(eval_L(1.0, Point{-0.1, 0.0}) == 0.0);
  CHECK(eval_T(1.0, Point{0.0, 0.5}) == 0.0);
}

TEST_CASE("log forms agree with linear forms") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-0.4, 0.4);
  for (int d : {2, 3}) {
    for (int i = 0; i < 200; ++i) {
      Point x(d);
      for (auto& c : x) c = U(rng);
      x[0] = std::abs(x[0]) * 4;
      const double t = eval_T(1.0, x), l = eval_L(1.0, x);
      if (t > 0) CHECK(std::exp(log_T(1.0, x)) == doctest::Approx(t).epsilon(1e-12));
      if (l > 0) CHECK(std::exp(log_L(1.0, x)) == doctest::Approx(l).epsilon(1e-10));
    }
  }
}

TEST_CASE("T is harmonic: axis-aligned stencil error is O(h^2) and positive") {
  // For cosh(a x) cos(a y) the 5-point stencil equals T (a h)^4 / (6 h^2) + O(h^4).
  const double eps = 0.5, a = kPi / eps;
  const Point x{0.3, 0.1};
  for (double h : {1e-2, 5e-3}) {
    double s = -4 * eval_T(eps, x);
    for (int ax = 0; ax < 2; ++ax)
      for (int sg : {-1, 1}) {
        Point y = x;
        y[ax] += sg * h;
        s += eval_T(eps, y);
      }
    const double predicted = eval_T(eps, x) * std::pow(a * h, 4) / 6;
    CHECK(s == doctest::Approx(predicted).epsilon(1e-2));
  }
}

TEST_CASE("log inf of L on the boundary of G") {
  CHECK(log_inf_L_on_G(2) == doctest::Approx(std::log(0.0625)));
  CHECK(-log_inf_L_on_G(2) == doctest::Approx(2.77).epsilon(1e-3));
  CHECK(-log_inf_L_on_G(3) == doctest::Approx(4.16).epsilon(2e-3));
  // Sampled corners of the G face never beat the closed form.
  for (int d : {2, 3}) {
    const double eps = 0.7;
    for (double t : {0.0, 0.2, 1.0 / 3}) {
      Point x(d, t * eps);
      x[0] = g_threshold(eps, d);
      CHECK(log_L(eps, x) >= log_inf_L_on_G(d) - 1e-12);
    }
  }
}

TEST_CASE("glue schedule and thresholds") {
  const auto sq = params("t^2", 2);
  const auto g = glue_schedule(sq, 4);
  CHECK(g.eps == doctest::Approx(0.5));
  CHECK(g.log_inv_p1 == doctest::Approx(4 * kPi));
  // Independent evaluation: 8 pi (k ln 2)^2 for t^2 in the plane.
  CHECK(log_threshold(sq, 4) == doctest::Approx(8 * kPi * std::pow(4 * std::log(2.0), 2)));
  CHECK(log_threshold(sq, 4) == doctest::Approx(193.2).epsilon(1e-3));
  CHECK(log_threshold(sq, 0) == doctest::Approx(2 * kPi * 8));
  CHECK(g.layer_coef.back() == 0.0);
  for (std::size_t i = 0; i < g.ratio.size(); ++i) CHECK(g.ratio[i] >= g.base_ratio[i] - 1e-12);
}

TEST_CASE("node algebra") {
  const auto L = FunctionNode::base_l(2, 0.5);
  SUBCASE("isometry preserves values exactly") {
    const Frame f = Frame::aligned(Point{1.0, 2.0}, Point{1.0, 1.0});
    const auto moved = FunctionNode::isometry(L, f);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-2, 4);
    for (int i = 0; i < 500; ++i) {
      const Point x{U(rng), U(rng)};
      CHECK(moved.log_eval(x) == L.log_eval(f.to_local(x)));
    }
  }
  SUBCASE("scale adds its log factor") {
    const auto s = FunctionNode::scale(L, 3.0);
    const Point x{1.0, 0.05};
    CHECK(s.log_eval(x) == doctest::Approx(L.log_eval(x) + 3.0));
  }
  SUBCASE("sum is log-sum-exp") {
    const auto s = FunctionNode::sum({L, FunctionNode::scale(L, std::log(2.0))});
    const Point x{1.0, 0.05};
    CHECK(s.eval(x) == doctest::Approx(3 * L.eval(x)));
  }
}

TEST_CASE("u_1 equals tau_1") {
  const auto P = params("t^1.5", 2);
  const auto u = build_u(P, 1).node();
  const auto t = build_tau(P, 0).node();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-0.5, 2.5);
  for (int i = 0; i < 5000; ++i) {
    const Point x{U(rng), U(rng)};
    CHECK(u.log_eval(x) == t.log_eval(x));
  }
}

TEST_CASE("compiled evaluator matches recursive evaluation") {
  for (int d : {2, 3}) {
    const auto P = params(d == 2 ? "t^1.5" : "t^2", d);
    const auto c = build_u(P, 3);
    const auto node = c.node();
    CompiledFunction u(node, Point(d, -1.0), Point(d, 9.0));
    CHECK(u.piece_count() == c.count);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-0.5, 8.5);
    for (int i = 0; i < 3000; ++i) {
      Point x(d);
      for (auto& v : x) v = U(rng);
      const double a = u.log_value(x), b = node.log_eval(x);
      if (std::isfinite(b)) {
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
      } else {
        CHECK(!std::isfinite(a));
      }
    }
  }
}

TEST_CASE("dominance certificate and sampling agree") {
  const auto P = params("t^1.5", 2);
  for (int k = 1; k <= 4; ++k) {
    const auto c = build_u(P, k);
    const auto cert = certify_dominance(c);
    CHECK(cert.min_margin >= 0.05 - 1e-9);
    CHECK(sample_dominance(c, 32, false).violations == 0);
  }
}

TEST_CASE("u_k is subharmonic in the plane") {
  const auto P = params("t^1.5", 2);
  for (int k = 1; k <= 3; ++k) {
    const double R = std::ldexp(1.0, k);
    CompiledFunction u(build_u(P, k).node(), Point(2, -1.0), Point(2, R + 1));
    const auto r = sub_mean_value(u, Point(2, 0.0), Point(2, R), 0.125, 0.125);
    CHECK(r.points > 0);
    CHECK(r.violations == 0);
  }
}

TEST_CASE("tube sup matches the closed form") {
  TubeSpec t;
  t.a = Point{0.0, 0.0};
  t.b = Point{3.0, 0.0};
  t.diameter = 0.5;
  t.tail = support_tail(0.5, 2);
  const double alpha = kPi / 0.5;
  CHECK(tube_log_sup(t, 2) == doctest::Approx(std::log(std::cosh(alpha * (3.0 + t.tail)) - 1)));
}

TEST_CASE("orthant assembly is symmetric") {
  const auto P = params("t^1.5", 2);
  const auto full = assemble_full(build_u(P, 2).node());
  const Point x{1.3, 0.7};
  const double v = full.log_eval(x);
  CHECK(full.log_eval(Point{-1.3, 0.7}) == doctest::Approx(v));
  CHECK(full.log_eval(Point{-1.3, -0.7}) == doctest::Approx(v));
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(build_u(params("t^1.5", 2), 0), Error);
}
