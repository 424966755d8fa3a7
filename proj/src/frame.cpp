#include "oscillab/frame.hpp"

#include <algorithm>
#include <numeric>

#include "oscillab/error.hpp"

namespace oscillab {

Frame::Frame(int dim) : origin_(dim, 0.0) {
  for (int i = 0; i < dim; ++i) {
    axes_[i] = Point(dim, 0.0);
    axes_[i][i] = 1.0;
  }
}

Frame::Frame(Point origin, std::array<Point, kMaxDim> axes) : origin_(origin), axes_(axes) {}

Frame Frame::aligned(const Point& origin, const Point& direction) {
  const int d = origin.dim();
  const double len = norm(direction);
  if (!(len > 0)) throw Error(ErrorKind::InvalidParameter, "frame direction must be non-zero");
  std::array<Point, kMaxDim> axes{};
  axes[0] = (1.0 / len) * direction;
  std::array<int, kMaxDim> order{};
  std::iota(order.begin(), order.begin() + d, 0);
  std::stable_sort(order.begin(), order.begin() + d,
                   [&](int a, int b) { return std::abs(axes[0][a]) < std::abs(axes[0][b]); });
  int filled = 1;
  for (int c = 0; c < d && filled < d; ++c) {
    Point v(d, 0.0);
    v[order[c]] = 1.0;
    for (int j = 0; j < filled; ++j) v = v - dot(v, axes[j]) * axes[j];
    const double n = norm(v);
    if (n < 1e-9) continue;
    axes[filled++] = (1.0 / n) * v;
  }
  return Frame(origin, axes);
}

Frame Frame::reflection(const Point& offset, const IPoint& signs) {
  Frame f(offset.dim());
  f.origin_ = offset;
  for (int i = 0; i < offset.dim(); ++i) f.axes_[i][i] = static_cast<double>(signs[i]);
  return f;
}

Point Frame::to_local(const Point& x) const {
  const Point rel = x - origin_;
  Point y(dim());
  for (int i = 0; i < dim(); ++i) y[i] = dot(rel, axes_[i]);
  return y;
}

Point Frame::vector_to_world(const Point& v) const {
  Point x(dim(), 0.0);
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) x[j] += v[i] * axes_[i][j];
  return x;
}

Point Frame::to_world(const Point& y) const { return origin_ + vector_to_world(y); }

Frame Frame::compose(const Frame& inner) const {
  std::array<Point, kMaxDim> axes{};
  for (int i = 0; i < dim(); ++i) axes[i] = vector_to_world(inner.axes_[i]);
  return Frame(to_world(inner.origin_), axes);
}

}  // namespace oscillab
