#pragma once

#include <cstdint>
#include <vector>

#include "oscillab/vec.hpp"

namespace oscillab {

// Half-open unit cube prod_j [corner_j, corner_j + 1).
struct LatticeCube {
  IPoint corner;

  int dim() const { return corner.dim(); }
  Point center() const;
  bool contains(const Point& x) const;
  friend bool operator==(const LatticeCube&, const LatticeCube&) = default;
  friend auto operator<=>(const LatticeCube& a, const LatticeCube& b) { return a.corner <=> b.corner; }
};

// Half-open cube of edge 2^order whose corner coordinates are multiples of 2^order.
class DyadicCube {
 public:
  DyadicCube(int order, IPoint corner);

  int order() const { return order_; }
  const IPoint& corner() const { return corner_; }
  int dim() const { return corner_.dim(); }
  std::int64_t edge() const { return std::int64_t{1} << order_; }
  Point center() const;
  bool contains(const LatticeCube& cube) const;
  bool contains(const DyadicCube& other) const;
  // The 2^{d(order - j)} dyadic cubes of order j tiling this one, in lexicographic order.
  std::vector<DyadicCube> children(int j) const;
  std::vector<DyadicCube> children() const { return children(order_ - 1); }

  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;

 private:
  int order_;
  IPoint corner_;
};

// Axis-aligned box [lo, hi) with integer corners.
struct IntBox {
  IPoint lo, hi;
  int dim() const { return lo.dim(); }
  std::int64_t volume() const;
};

// Layer k of basic cubes around `center`: the (2k+1)-blowup minus the (2k-1)-blowup.
struct Annulus {
  LatticeCube center;
  int layer;

  IntBox outer() const;
  IntBox inner() const;
  bool contains(const LatticeCube& cube) const;
  std::int64_t cube_count() const;
};

// Coordinate sign flips taking v0 = (1,...,1) to the vertex with the given signs.
class OrthantMap {
 public:
  OrthantMap(int dim, unsigned index);
  explicit OrthantMap(IPoint signs);

  int dim() const { return signs_.dim(); }
  const IPoint& signs() const { return signs_; }
  unsigned index() const;
  Point apply(const Point& x) const;
  Point inverse(const Point& x) const { return apply(x); }
  bool is_identity() const;

  // All 2^dim maps; index 0 is the identity (vertex v0).
  static std::vector<OrthantMap> all(int dim);

 private:
  IPoint signs_;
};

std::int64_t floor_div(std::int64_t a, std::int64_t b);
std::int64_t ipow(std::int64_t base, int exp);

std::vector<LatticeCube> enumerate_basic_cubes(const IntBox& region);
std::vector<LatticeCube> annulus_cubes(const LatticeCube& cube, int layer);
DyadicCube containing_dyadic(const LatticeCube& cube, double rho);
// Smallest m with 2^m >= 2 rho; the unique power of two in [2 rho, 4 rho).
int dyadic_order_for(double rho);

}  // namespace oscillab
