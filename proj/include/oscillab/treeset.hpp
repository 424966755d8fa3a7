#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "oscillab/frame.hpp"
#include "oscillab/geometry.hpp"
#include "oscillab/growth.hpp"

namespace oscillab {

inline constexpr double kLeafWidth = 1.0 / 8.0;

enum class TubeRole { Leaf, Wide, Thin, Handle };

// Length by which a piece's support reaches behind the child end of its tube.
double support_tail(double width, int dim);

struct TubeSpec {
  Point a;  // child end: center of the cube the tube drains
  Point b;  // parent end: junction with the next tube up
  double diameter = 0;
  int rank = 0;        // rank of the subtree the tube belongs to
  int generation = 0;  // 0 for handles, 1.. inside an outer subtree, leaf layer last
  TubeRole role = TubeRole::Leaf;
  bool inner = false;  // handle that carries the inner subtree
  bool branch = false;
  int parent = -1;
  double tail = 0;

  double length() const { return norm(b - a); }
  Point direction() const;
  // Frame with origin at `a` and first axis pointing at `b`.
  Frame frame() const { return Frame::aligned(a, b - a); }
  bool contains(const Point& x, bool with_tail) const;
};

// Oriented box used for overlap tests: center, frame axes, half extents.
struct OrientedBox {
  Point center;
  std::array<Point, kMaxDim> axes{};
  std::array<double, kMaxDim> half{};

  static OrientedBox of(const TubeSpec& tube, bool with_tail);
  bool contains(const Point& x) const;
  bool overlaps(const Point& lo, const Point& hi) const;
  bool covers(const Point& lo, const Point& hi) const;
  void bounds(Point& lo, Point& hi) const;
};

struct ScaleChoice {
  int s = 0;
  double eps = 0;
  double lower = 0, upper = 0;  // sandwich for s^{1/(d-1)} 2^s
};

// Smallest s >= 1 with lower <= s^{1/(d-1)} 2^s <= 4 lower, lower = (f(2^k)/2^k)^{1/(d-1)}.
ScaleChoice choose_s_k(const GrowthParameters& params, int k);

std::vector<TubeSpec> build_basic_subtree(const DyadicCube& cube, double leaf_width, int rank);

struct TreeSpec {
  int dim = 2;
  int rank = 0;  // point set lives in [0, 2^rank)^d
  std::vector<TubeSpec> tubes;
  double eps1 = kLeafWidth;
  std::map<int, ScaleChoice> scales;        // keyed by k
  std::map<int, double> handle_widths;      // absolute handle width 2^k delta_k keyed by k
  std::size_t inner_prefix = 0;             // tubes [0, inner_prefix) carry the inner function u_rank-1
  int inner_handle = -1;

  std::vector<int> roots() const;
  std::size_t branch_count() const;
};

// Outer subtree of rank k+1 centered at 2^k v0, covering [0, 2^{k+1})^d. k = 0 gives a basic subtree.
TreeSpec build_outer_subtree(const GrowthParameters& params, int k);
// T_{k+1}; k = 0 gives the basic subtree of [0,2)^d.
TreeSpec build_tree(const GrowthParameters& params, int k);

// Integer-cell bucket index over a box: each cell lists tubes overlapping it.
class TubeIndex {
 public:
  TubeIndex(const std::vector<TubeSpec>& tubes, std::size_t count, const IntBox& box, bool with_tail);
  std::span<const int> at(const Point& x) const;
  std::span<const int> at_cell(const IPoint& corner) const;
  const IntBox& box() const { return box_; }

 private:
  std::int64_t slot(const IPoint& corner) const;
  IntBox box_;
  std::vector<std::int64_t> offsets_;
  std::vector<int> items_;
};

enum class Certainty { Certain, Uncertain };

struct SparseResult {
  bool sparse = false;
  double covered = 0;  // estimate of m_d(I cap T)
  double threshold = 0;
  Certainty certainty = Certainty::Certain;
  bool monte_carlo = false;
};

double sparse_threshold(int dim, double eps1 = kLeafWidth);
SparseResult is_sparse(const LatticeCube& cube, const TreeSpec& tree, std::span<const int> candidates);
SparseResult is_sparse(const LatticeCube& cube, const TreeSpec& tree);

struct CensusResult {
  std::int64_t cubes = 0;
  std::int64_t nonsparse = 0;
  std::int64_t uncertain = 0;
  std::int64_t branch_cubes = 0;  // cubes meeting a branch (tails included)
  std::int64_t untouched = 0;     // cubes meeting no tube at all
  double f_value = 0;
  double ratio = 0;  // nonsparse / f(2^k)
};

// Census over [0, 2^k)^d using T_{k+1}.
CensusResult count_nonsparse(const GrowthParameters& params, int k);
CensusResult count_nonsparse(const TreeSpec& tree_k1, const GrowthParameters& params, int k);

// Cubes of the box meeting some branch of the tree, as a flag per enumerate_basic_cubes entry.
std::vector<char> branch_cube_mask(const TreeSpec& tree, const IntBox& box, bool with_tail);

}  // namespace oscillab
