#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace oscillab {

inline constexpr int kMaxDim = 3;

// Fixed-capacity coordinate vector; the library never needs more than three axes.
template <class T>
class SmallVec {
 public:
  SmallVec() = default;
  explicit SmallVec(int dim, T fill = T{}) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
    for (int i = 0; i < dim; ++i) v_[i] = fill;
  }
  SmallVec(std::initializer_list<T> xs) : dim_(static_cast<int>(xs.size())) {
    if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("dimension out of range");
    std::copy(xs.begin(), xs.end(), v_.begin());
  }

  int dim() const { return dim_; }
  T& operator[](int i) { return v_[i]; }
  const T& operator[](int i) const { return v_[i]; }
  T* begin() { return v_.data(); }
  T* end() { return v_.data() + dim_; }
  const T* begin() const { return v_.data(); }
  const T* end() const { return v_.data() + dim_; }

  friend bool operator==(const SmallVec& a, const SmallVec& b) {
    return a.dim_ == b.dim_ && std::equal(a.begin(), a.end(), b.begin());
  }
  friend std::strong_ordering operator<=>(const SmallVec& a, const SmallVec& b)
    requires std::integral<T>
  {
    if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
    for (int i = 0; i < a.dim_; ++i)
      if (auto c = a.v_[i] <=> b.v_[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }

 private:
  std::array<T, kMaxDim> v_{};
  int dim_ = 0;
};

using Point = SmallVec<double>;
using IPoint = SmallVec<std::int64_t>;

inline Point operator+(Point a, const Point& b) {
  for (int i = 0; i < a.dim(); ++i) a[i] += b[i];
  return a;
}
inline Point operator-(Point a, const Point& b) {
  for (int i = 0; i < a.dim(); ++i) a[i] -= b[i];
  return a;
}
inline Point operator*(double s, Point a) {
  for (auto& x : a) x *= s;
  return a;
}
inline double dot(const Point& a, const Point& b) {
  double s = 0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }
inline double sup_norm(const Point& a) {
  double m = 0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}
inline Point to_point(const IPoint& p) {
  Point r(p.dim());
  for (int i = 0; i < p.dim(); ++i) r[i] = static_cast<double>(p[i]);
  return r;
}
inline Point uniform_point(int dim, double value) { return Point(dim, value); }

}  // namespace oscillab
