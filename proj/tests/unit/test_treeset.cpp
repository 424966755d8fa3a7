#include <cmath>
#include <random>

#include "doctest.h"
#include "oscillab/error.hpp"
#include "oscillab/treeset.hpp"

using namespace oscillab;

namespace {
GrowthParameters params(const char* f, int d) { return GrowthParameters{GrowthFunction::parse(f), d}; }

// Independent oracle: brute scan over s.
int scan_s(double lower, int d) {
  for (int s = 1; s < 40; ++s) {
    double v = std::pow(s, 1.0 / (d - 1)) * std::pow(2.0, s);
    if (v >= lower && v <= 4 * lower) return s;
  }
  return -1;
}
}  // namespace

TEST_CASE("choose_s_k matches the sandwich scan") {
  auto sq = params("t^2", 2);
  CHECK(choose_s_k(sq, 4).s == 3);
  CHECK(choose_s_k(sq, 4).eps == doctest::Approx(0.5));
  CHECK(choose_s_k(sq, 6).s == 4);
  CHECK(choose_s_k(params("t^3", 3), 4).s == 4);
  auto p15 = params("t^1.5", 2);
  for (int k = 3; k <= 6; ++k) {
    CHECK(choose_s_k(p15, k).s == scan_s(std::pow(2.0, 0.5 * k), 2));
    CHECK(choose_s_k(p15, k).s == 2);
  }
  CHECK_THROWS_AS(choose_s_k(params("t^0.5", 2), 4), Error);
}

TEST_CASE("basic subtree") {
  auto tubes = build_basic_subtree(DyadicCube(1, IPoint{0, 0}), kLeafWidth, 1);
  REQUIRE(tubes.size() == 4);
  for (auto& t : tubes) {
    CHECK(t.b == Point{1.0, 1.0});
    CHECK(std::abs(t.a[0] - 1.0) == doctest::Approx(0.5));
    CHECK_FALSE(t.branch);
  }
  CHECK(build_basic_subtree(DyadicCube(1, IPoint{0, 0, 0}), kLeafWidth, 1).size() == 8);
  CHECK_THROWS_AS(build_basic_subtree(DyadicCube(1, IPoint{0, 0}), 1.0, 1), Error);
  CHECK_THROWS_AS(build_basic_subtree(DyadicCube(1, IPoint{0, 0}), 0.0, 1), Error);
}

TEST_CASE("outer subtree generations") {
  auto p = params("t^1.5", 2);
  const int k = 3;
  TreeSpec t = build_outer_subtree(p, k);
  const int s = t.scales.at(k).s;
  std::vector<int> per_gen(k + 2, 0);
  for (auto& tube : t.tubes) {
    per_gen[tube.generation]++;
    if (tube.generation == 1) {
      CHECK(tube.diameter == doctest::Approx(std::pow(2.0, s)));
      CHECK(tube.b == Point(2, 8.0));
    }
    if (tube.generation > s) CHECK(tube.diameter == kLeafWidth);
    if (tube.parent >= 0) {
      CHECK(t.tubes[tube.parent].a == tube.b);
      CHECK(t.tubes[tube.parent].generation == tube.generation - 1);
    }
  }
  for (int g = 1; g <= k + 1; ++g) CHECK(per_gen[g] == 1 << (2 * g));
}

TEST_CASE("tree nesting and handles") {
  auto p = params("t^1.5", 2);
  TreeSpec t2 = build_tree(p, 1);
  TreeSpec t3 = build_tree(p, 2);
  TreeSpec t5 = build_tree(p, 4);
  // T_k tubes appear as a prefix of T_{k+1}.
  for (std::size_t i = 0; i < t2.tubes.size(); ++i) {
    CHECK(t3.tubes[i].a == t2.tubes[i].a);
    CHECK(t3.tubes[i].b == t2.tubes[i].b);
    CHECK(t3.tubes[i].diameter == t2.tubes[i].diameter);
  }
  CHECK(t5.handle_widths.at(4) == doctest::Approx(4.0));
  int handles = 0;
  for (auto& tube : t5.tubes)
    if (tube.role == TubeRole::Handle && tube.rank == 5) {
      ++handles;
      CHECK(tube.b == Point(2, 16.0));
      CHECK(tube.diameter == doctest::Approx(4.0));
    }
  CHECK(handles == 4);
  CHECK(t5.roots().size() == 4);
  for (auto& tube : t5.tubes) {
    CHECK(tube.branch == (tube.diameter > 2 * kLeafWidth));
    for (int i = 0; i < 2; ++i) {
      CHECK(tube.a[i] >= 0);
      CHECK(tube.a[i] <= 32);
    }
  }
  auto sq = params("t^2", 2);
  CHECK(sq.relative_handle_width(5) == doctest::Approx(1.0));
}

TEST_CASE("every basic cube meets the tree, small rank is sparse") {
  auto p = params("t^1.5", 2);
  TreeSpec t = build_tree(p, 0);
  for (auto& c : enumerate_basic_cubes(IntBox{IPoint{0, 0}, IPoint{2, 2}})) {
    auto r = is_sparse(c, t);
    CHECK(r.sparse);
    CHECK(r.covered > 0);
    CHECK(r.covered < 0.354);
  }
  auto census = count_nonsparse(p, 4);
  CHECK(census.untouched == 0);
}

TEST_CASE("sparseness quadrature agrees with Monte Carlo") {
  auto p = params("t^1.5", 2);
  TreeSpec t = build_tree(p, 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& c : enumerate_basic_cubes(IntBox{IPoint{4, 4}, IPoint{8, 8}})) {
    auto r = is_sparse(c, t);
    std::vector<TubeSpec> near;
    Point lo = to_point(c.corner), hi{lo[0] + 1, lo[1] + 1};
    for (auto& tube : t.tubes)
      if (OrientedBox::of(tube, false).overlaps(lo, hi)) near.push_back(tube);
    int hits = 0;
    const int n = 100000;
    for (int s = 0; s < n; ++s) {
      Point x{c.corner[0] + u(rng), c.corner[1] + u(rng)};
      for (auto& tube : near)
        if (tube.contains(x, false)) {
          ++hits;
          break;
        }
    }
    CHECK(r.covered == doctest::Approx(static_cast<double>(hits) / n).epsilon(0.02).scale(1));
  }
  CHECK(sparse_threshold(2) < 0.5);
  CHECK(sparse_threshold(3) < 0.5);
}

TEST_CASE("cube inside a branch is not sparse, cube away from the tree is sparse") {
  TreeSpec t;
  t.dim = 2;
  TubeSpec wide;
  wide.a = Point{0.0, 2.5};
  wide.b = Point{10.0, 2.5};
  wide.diameter = 4;
  wide.branch = true;
  t.tubes.push_back(wide);
  CHECK_FALSE(is_sparse(LatticeCube{IPoint{3, 2}}, t).sparse);
  auto far = is_sparse(LatticeCube{IPoint{3, 8}}, t);
  CHECK(far.sparse);
  CHECK(far.covered == 0);
}
