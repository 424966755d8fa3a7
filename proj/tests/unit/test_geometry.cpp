#include <cmath>
#include <set>

#include "doctest.h"
#include "oscillab/error.hpp"
#include "oscillab/geometry.hpp"

using namespace oscillab;

TEST_CASE("enumerate_basic_cubes lists cubes once in lexicographic order") {
  auto cubes = enumerate_basic_cubes(IntBox{IPoint{0, 0}, IPoint{2, 2}});
  REQUIRE(cubes.size() == 4);
  CHECK(cubes[0].corner == IPoint{0, 0});
  CHECK(cubes[1].corner == IPoint{0, 1});
  CHECK(cubes[2].corner == IPoint{1, 0});
  CHECK(cubes[3].corner == IPoint{1, 1});
  CHECK(enumerate_basic_cubes(IntBox{IPoint(2, 0), IPoint(2, 16)}).size() == 256);
  CHECK(enumerate_basic_cubes(IntBox{IPoint(3, -1), IPoint(3, 1)}).size() == 8);
  CHECK_THROWS_AS(enumerate_basic_cubes(IntBox{IPoint{0, 0}, IPoint{0, 2}}), Error);
}

TEST_CASE("annulus layers") {
  const LatticeCube origin{IPoint{0, 0}};
  auto a1 = annulus_cubes(origin, 1);
  CHECK(a1.size() == 8);
  for (auto& c : a1) {
    CHECK(c.corner != IPoint{0, 0});
    CHECK(std::abs(c.corner[0]) <= 1);
  }
  CHECK(annulus_cubes(origin, 2).size() == 16);
  CHECK(annulus_cubes(LatticeCube{IPoint{0, 0, 0}}, 1).size() == 26);
  CHECK_THROWS_AS(annulus_cubes(origin, 0), Error);
  // Layers are disjoint and fill the blowup together with the center.
  std::set<IPoint> seen{origin.corner};
  for (int k = 1; k <= 4; ++k)
    for (auto& c : annulus_cubes(origin, k)) CHECK(seen.insert(c.corner).second);
  CHECK(seen.size() == 81);
  for (int k = 1; k <= 5; ++k) CHECK(Annulus{origin, k}.cube_count() == static_cast<std::int64_t>(annulus_cubes(origin, k).size()));
}

TEST_CASE("containing_dyadic picks the power of two in [2 rho, 4 rho)") {
  auto j = containing_dyadic(LatticeCube{IPoint{0, 0}}, 2 * std::sqrt(2.0));
  CHECK(j.order() == 3);
  CHECK(j.corner() == IPoint{0, 0});
  auto j2 = containing_dyadic(LatticeCube{IPoint{5, 2}}, 3.0);
  CHECK(j2.order() == 3);
  CHECK(j2.corner() == IPoint{0, 0});
  for (int m = 2; m < 10; ++m) CHECK(dyadic_order_for(std::ldexp(1.0, m) / 2) == m);
  auto neg = containing_dyadic(LatticeCube{IPoint{-3, 5}}, 2.0);
  CHECK(neg.order() == 2);
  CHECK(neg.corner() == IPoint{-4, 4});
  CHECK(neg.contains(LatticeCube{IPoint{-3, 5}}));
  // Monotone in rho.
  double prev = 0;
  for (double rho = 2.9; rho < 200; rho *= 1.37) {
    double r2 = 2 * rho;
    CHECK(dyadic_order_for(r2) >= dyadic_order_for(rho));
    CHECK(dyadic_order_for(rho) >= prev);
    prev = dyadic_order_for(rho);
  }
}

TEST_CASE("dyadic cubes partition") {
  DyadicCube big(4, IPoint{16, 0});
  for (int j = 0; j <= 4; ++j) {
    auto kids = big.children(j);
    CHECK(kids.size() == static_cast<std::size_t>(1) << (2 * (4 - j)));
    std::int64_t vol = 0;
    for (auto& k : kids) {
      CHECK(big.contains(k));
      vol += k.edge() * k.edge();
    }
    CHECK(vol == 256);
  }
  CHECK_THROWS_AS(DyadicCube(2, IPoint{2, 0}), Error);
}

TEST_CASE("orthant maps are involutive isometries") {
  auto maps = OrthantMap::all(3);
  REQUIRE(maps.size() == 8);
  CHECK(maps[0].is_identity());
  Point x{0.3, -1.7, 2.5};
  for (auto& m : maps) {
    Point y = m.apply(x);
    CHECK(norm(y) == doctest::Approx(norm(x)));
    CHECK(m.apply(y) == x);
    Point v0(3, 1.0);
    Point vj = m.apply(v0);
    for (int i = 0; i < 3; ++i) CHECK(vj[i] == static_cast<double>(m.signs()[i]));
  }
}
