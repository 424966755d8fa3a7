#pragma once

#include <array>

#include "oscillab/vec.hpp"

namespace oscillab {

// Affine isometry: local y maps to origin + sum_i y_i * axes[i]. Axes are orthonormal
// but may form an improper frame (reflections are allowed).
class Frame {
 public:
  Frame() = default;
  explicit Frame(int dim);  // identity
  Frame(Point origin, std::array<Point, kMaxDim> axes);

  // First axis along `direction`; the rest completed by Gram-Schmidt against the
  // coordinate axes taken in order of increasing |direction_i|.
  static Frame aligned(const Point& origin, const Point& direction);
  // x -> offset + diag(signs) x.
  static Frame reflection(const Point& offset, const IPoint& signs);

  int dim() const { return origin_.dim(); }
  const Point& origin() const { return origin_; }
  const Point& axis(int i) const { return axes_[i]; }

  Point to_local(const Point& x) const;
  Point to_world(const Point& y) const;
  Point vector_to_world(const Point& v) const;
  // Composite mapping local coordinates of `inner` through this frame.
  Frame compose(const Frame& inner) const;

 private:
  Point origin_;
  std::array<Point, kMaxDim> axes_{};
};

}  // namespace oscillab
