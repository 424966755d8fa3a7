#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oscillab/error.hpp"
#include "oscillab/verify.hpp"

using namespace oscillab;

TEST_CASE("stencil of |x|^2 is exactly 2d") {
  for (int d : {2, 3}) {
    const auto f = GridField::sample([](const Point& x) { return dot(x, x); }, Point(d, -1.0), 0.125, IPoint(d, 9));
    const auto r = discrete_laplacian_report(f, nullptr, 1e-9);
    CHECK(r.min_value == doctest::Approx(2.0 * d).epsilon(1e-10));
    CHECK(r.violations.empty());
    CHECK(min_abs_laplacian(f, nullptr) == doctest::Approx(2.0 * d).epsilon(1e-10));
  }
}

TEST_CASE("stencil flags a superharmonic field") {
  const auto f = GridField::sample([](const Point& x) { return -dot(x, x); }, Point(2, -1.0), 0.25, IPoint(2, 9));
  const auto r = discrete_laplacian_report(f, nullptr, 1e-9);
  CHECK(r.violations.size() == r.points);
  const auto logged = GridField::sample([](const Point& x) { return x[0]; }, Point(2, 0.0), 0.25, IPoint(2, 4), true);
  CHECK_THROWS_AS(discrete_laplacian_report(logged, nullptr, 0), Error);
}

TEST_CASE("content of segments") {
  const Point lo(2, 0.0);
  SegmentShape horiz(Point{0.1, 0.3}, Point{0.6, 0.3});
  double prev = INFINITY;
  for (int depth : {4, 6, 8, 10}) {
    const double c = content_upper(horiz, lo, 1.0, depth);
    CHECK(c <= prev + 1e-12);
    prev = c;
  }
  CHECK(prev == doctest::Approx(0.5).epsilon(0.02));
  CHECK(content_lower_projection(horiz, lo, 1.0, 1, 64).value == doctest::Approx(0.5).epsilon(0.05));
  // Unit segment across the square: content tends to 1.
  SegmentShape unit(Point{0.0, 0.4}, Point{1.0, 0.4});
  CHECK(content_upper(unit, lo, 1.0, 10) == doctest::Approx(1.0).epsilon(1e-9));
  SegmentShape diag(Point{0.1, 0.1}, Point{0.6, 0.6});
  const double up = content_upper(diag, lo, 1.0, 9);
  const double low = content_lower_projection(diag, lo, 1.0, 0, 64).value;
  CHECK(low <= up);
  CHECK(up <= std::sqrt(2.0) * 0.5 * 2.1);
  CHECK(content_upper(EmptyShape(2), lo, 1.0, 6) == 0.0);
  BoxShape full(Point(2, 0.0), Point(2, 1.0));
  CHECK(content_upper(full, lo, 1.0, 5) == doctest::Approx(1.0));
}

TEST_CASE("sup bracket contains the maximum") {
  auto fn = [](const Point& x) { return -(x[0] - 0.3) * (x[0] - 0.3) - (x[1] - 0.71) * (x[1] - 0.71); };
  auto grad = [](const Point&, double) { return 4.0; };
  const auto b = sup_on(fn, grad, Point(2, 0.0), Point(2, 1.0), 0.05);
  CHECK(b.grid_max <= 0.0);
  CHECK(b.upper >= 0.0);
  CHECK(b.upper - b.grid_max < 0.3);
}

TEST_CASE("log sup of u_k is bracketed") {
  GrowthParameters P{GrowthFunction::parse("t^1.5"), 2};
  CompiledFunction u(build_u(P, 3).node(), Point(2, -1.0), Point(2, 9.0));
  const auto b = log_sup_on(u, Point(2, 0.0), Point(2, 8.0), 1.0 / 16);
  CHECK(b.grid_max <= b.upper);
  CHECK(u.log_value(b.argmax) == doctest::Approx(b.grid_max));
  CHECK_THROWS_AS(log_sup_on(u, Point(2, -5.0), Point(2, 8.0), 0.1), Error);
}

TEST_CASE("cube classification") {
  GrowthParameters P{GrowthFunction::parse("t^1.5"), 2};
  CompiledFunction u(build_u(P, 3).node(), Point(2, -1.0), Point(2, 9.0));
  // The cube holding the sampled maximum sits on the top handle.
  const auto top = log_sup_on(u, Point(2, 0.0), Point(2, 8.0), 1.0 / 8);
  const IPoint corner{static_cast<std::int64_t>(std::floor(top.argmax[0])),
                      static_cast<std::int64_t>(std::floor(top.argmax[1]))};
  const auto handle = classify_cube(u, LatticeCube{corner});
  CHECK(handle.p1_satisfied);
  CHECK_FALSE(handle.p2_satisfied);
  CHECK(handle.classification == CubeClass::Rogue);
  const auto census = rogue_census(u, IntBox{IPoint{0, 0}, IPoint{8, 8}}, P.f);
  CHECK(census.cubes.size() == 64);
  CHECK(census.rogue > 0);
  CHECK(census.rogue < 64);
  CHECK(census.gamma == doctest::Approx(census.rogue / P.f(8.0)));
  std::ostringstream csv, svg;
  write_census_csv(csv, census);
  write_census_svg(svg, census);
  CHECK(csv.str().find('\n') != std::string::npos);
  CHECK(svg.str().find("<svg") != std::string::npos);
}

TEST_CASE("growth denominator") {
  GrowthParameters P{GrowthFunction::parse("t^1.5"), 2};
  // f(R)/R = 8 at R = 64.
  CHECK(growth_denominator(P, 64) == doctest::Approx(64 * std::pow(std::log(10.0), 2) / 9));
  GrowthParameters lin{GrowthFunction::parse("t"), 2};
  CHECK(growth_denominator(lin, 100) == doctest::Approx(100 * std::pow(std::log(3.0), 2) / 2));
}

TEST_CASE("sub-mean-value check catches a superharmonic bump") {
  // L in the plane is subharmonic; so is its translate family. The check must pass.
  GrowthParameters P{GrowthFunction::parse("t^1.5"), 2};
  CompiledFunction u(build_u(P, 2).node(), Point(2, -1.0), Point(2, 5.0));
  CHECK(sub_mean_value(u, Point(2, 0.0), Point(2, 4.0), 0.25, 0.25).violations == 0);
  CHECK_THROWS_AS(sub_mean_value(u, Point(2, 0.0), Point(2, 4.0), 0.0, 0.1), Error);
}
