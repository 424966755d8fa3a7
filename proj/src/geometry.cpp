#include "oscillab/geometry.hpp"

#include <cmath>
#include <string>

#include "oscillab/error.hpp"

namespace oscillab {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

Point LatticeCube::center() const {
  Point c = to_point(corner);
  for (auto& x : c) x += 0.5;
  return c;
}

bool LatticeCube::contains(const Point& x) const {
  for (int i = 0; i < dim(); ++i) {
    double lo = static_cast<double>(corner[i]);
    if (x[i] < lo || x[i] >= lo + 1.0) return false;
  }
  return true;
}

DyadicCube::DyadicCube(int order, IPoint corner) : order_(order), corner_(corner) {
  if (order < 0 || order > 60) throw Error(ErrorKind::InvalidParameter, "dyadic order out of range");
  const std::int64_t e = edge();
  for (auto c : corner_)
    if (c % e != 0) throw Error(ErrorKind::InvalidParameter, "dyadic corner is not a multiple of 2^order");
}

Point DyadicCube::center() const {
  Point c = to_point(corner_);
  const double half = 0.5 * static_cast<double>(edge());
  for (auto& x : c) x += half;
  return c;
}

bool DyadicCube::contains(const LatticeCube& cube) const {
  for (int i = 0; i < dim(); ++i)
    if (cube.corner[i] < corner_[i] || cube.corner[i] >= corner_[i] + edge()) return false;
  return true;
}

bool DyadicCube::contains(const DyadicCube& other) const {
  if (other.order_ > order_) return false;
  for (int i = 0; i < dim(); ++i)
    if (other.corner_[i] < corner_[i] || other.corner_[i] + other.edge() > corner_[i] + edge()) return false;
  return true;
}

std::vector<DyadicCube> DyadicCube::children(int j) const {
  if (j < 0 || j > order_) throw Error(ErrorKind::InvalidParameter, "child order must lie in [0, order]");
  const std::int64_t step = std::int64_t{1} << j;
  const std::int64_t per_axis = std::int64_t{1} << (order_ - j);
  std::vector<DyadicCube> out;
  IntBox box{IPoint(dim(), 0), IPoint(dim(), per_axis)};
  for (const auto& c : enumerate_basic_cubes(box)) {
    IPoint corner = corner_;
    for (int i = 0; i < dim(); ++i) corner[i] += c.corner[i] * step;
    out.emplace_back(j, corner);
  }
  return out;
}

std::int64_t IntBox::volume() const {
  std::int64_t v = 1;
  for (int i = 0; i < dim(); ++i) v *= (hi[i] - lo[i]);
  return v;
}

IntBox Annulus::outer() const {
  IntBox b{center.corner, center.corner};
  for (int i = 0; i < center.dim(); ++i) {
    b.lo[i] -= layer;
    b.hi[i] += 1 + layer;
  }
  return b;
}

IntBox Annulus::inner() const {
  IntBox b{center.corner, center.corner};
  for (int i = 0; i < center.dim(); ++i) {
    b.lo[i] -= layer - 1;
    b.hi[i] += layer;
  }
  return b;
}

namespace {
bool box_contains(const IntBox& b, const IPoint& corner) {
  for (int i = 0; i < b.dim(); ++i)
    if (corner[i] < b.lo[i] || corner[i] >= b.hi[i]) return false;
  return true;
}
}  // namespace

bool Annulus::contains(const LatticeCube& cube) const {
  return box_contains(outer(), cube.corner) && !box_contains(inner(), cube.corner);
}

std::int64_t Annulus::cube_count() const {
  const int d = center.dim();
  return ipow(2 * layer + 1, d) - ipow(2 * layer - 1, d);
}

OrthantMap::OrthantMap(int dim, unsigned index) : signs_(dim, 1) {
  for (int i = 0; i < dim; ++i)
    if (index & (1u << i)) signs_[i] = -1;
}

OrthantMap::OrthantMap(IPoint signs) : signs_(signs) {
  for (auto s : signs_)
    if (s != 1 && s != -1) throw Error(ErrorKind::InvalidParameter, "orthant signs must be +1 or -1");
}

unsigned OrthantMap::index() const {
  unsigned idx = 0;
  for (int i = 0; i < dim(); ++i)
    if (signs_[i] < 0) idx |= 1u << i;
  return idx;
}

Point OrthantMap::apply(const Point& x) const {
  Point y = x;
  for (int i = 0; i < dim(); ++i) y[i] *= static_cast<double>(signs_[i]);
  return y;
}

bool OrthantMap::is_identity() const { return index() == 0; }

std::vector<OrthantMap> OrthantMap::all(int dim) {
  std::vector<OrthantMap> out;
  for (unsigned j = 0; j < (1u << dim); ++j) out.emplace_back(dim, j);
  return out;
}

std::vector<LatticeCube> enumerate_basic_cubes(const IntBox& region) {
  const int d = region.dim();
  if (region.hi.dim() != d) throw Error(ErrorKind::InvalidRegion, "region corners disagree on dimension");
  for (int i = 0; i < d; ++i)
    if (region.hi[i] <= region.lo[i]) throw Error(ErrorKind::InvalidRegion, "region has a non-positive edge");
  std::vector<LatticeCube> out;
  out.reserve(static_cast<std::size_t>(region.volume()));
  IPoint cur = region.lo;
  while (true) {
    out.push_back(LatticeCube{cur});
    int axis = d - 1;
    while (axis >= 0) {
      if (++cur[axis] < region.hi[axis]) break;
      cur[axis] = region.lo[axis];
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

std::vector<LatticeCube> annulus_cubes(const LatticeCube& cube, int layer) {
  if (layer < 1) throw Error(ErrorKind::InvalidLayer, "annulus layer must be at least 1, got " + std::to_string(layer));
  Annulus a{cube, layer};
  std::vector<LatticeCube> out;
  const IntBox inner = a.inner();
  for (auto& c : enumerate_basic_cubes(a.outer()))
    if (!box_contains(inner, c.corner)) out.push_back(c);
  return out;
}

int dyadic_order_for(double rho) {
  if (!(rho > 0) || !std::isfinite(rho)) throw Error(ErrorKind::InvalidParameter, "rho must be positive and finite");
  const double target = 2.0 * rho;
  int m = static_cast<int>(std::ceil(std::log2(target)));
  // Guard against rounding in log2: settle on the smallest m with 2^m >= target.
  while (m > 0 && std::ldexp(1.0, m - 1) >= target) --m;
  while (std::ldexp(1.0, m) < target) ++m;
  return std::max(m, 0);
}

DyadicCube containing_dyadic(const LatticeCube& cube, double rho) {
  const int m = dyadic_order_for(rho);
  const std::int64_t e = std::int64_t{1} << m;
  IPoint corner = cube.corner;
  for (auto& c : corner) c = floor_div(c, e) * e;
  return DyadicCube(m, corner);
}

}  // namespace oscillab
