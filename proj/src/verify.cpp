#include "oscillab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <iomanip>
#include <limits>
#include <ostream>

#include "oscillab/error.hpp"
#include "oscillab/parallel.hpp"

namespace oscillab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

std::int64_t product(const IPoint& e) {
  std::int64_t n = 1;
  for (auto v : e) n *= v;
  return n;
}

IPoint unflatten(std::int64_t flat, const IPoint& extents) {
  IPoint i(extents.dim());
  for (int a = extents.dim() - 1; a >= 0; --a) {
    i[a] = flat % extents[a];
    flat /= extents[a];
  }
  return i;
}

}  // namespace

// ---- grids -----------------------------------------------------------------------

GridField GridField::sample(const std::function<double(const Point&)>& fn, const Point& origin, double h,
                            const IPoint& extents, bool log_scaled) {
  if (!(h > 0)) throw Error(ErrorKind::InvalidParameter, "grid spacing must be positive");
  GridField g;
  g.origin = origin;
  g.h = h;
  g.extents = extents;
  g.log_scaled = log_scaled;
  const std::int64_t n = product(extents);
  if (n <= 0) throw Error(ErrorKind::EmptyDomain, "grid has no points");
  g.values.resize(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
    g.values[k] = fn(g.point(unflatten(static_cast<std::int64_t>(k), extents)));
  });
  return g;
}

std::size_t GridField::index(const IPoint& i) const {
  std::int64_t s = 0;
  for (int a = 0; a < extents.dim(); ++a) s = s * extents[a] + i[a];
  return static_cast<std::size_t>(s);
}

Point GridField::point(const IPoint& i) const {
  Point p = origin;
  for (int a = 0; a < origin.dim(); ++a) p[a] += h * static_cast<double>(i[a]);
  return p;
}

namespace {

template <class Visit>
std::size_t for_each_stencil(const GridField& field, const std::function<bool(const Point&)>& mask, Visit&& visit) {
  if (field.log_scaled) throw Error(ErrorKind::InvalidParameter, "Laplacian needs linear values");
  const int d = field.extents.dim();
  for (auto e : field.extents)
    if (e < 3) throw Error(ErrorKind::EmptyDomain, "grid needs at least three points per axis");
  const double inv = 1.0 / (field.h * field.h);
  std::size_t count = 0;
  const std::int64_t n = product(field.extents);
  for (std::int64_t k = 0; k < n; ++k) {
    const IPoint i = unflatten(k, field.extents);
    bool interior = true;
    for (int a = 0; a < d; ++a) interior = interior && i[a] > 0 && i[a] + 1 < field.extents[a];
    if (!interior) continue;
    const Point x = field.point(i);
    if (mask && !mask(x)) continue;
    const double c = field.at(i);
    double s = 0;
    for (int a = 0; a < d; ++a) {
      IPoint p = i, m = i;
      ++p[a];
      --m[a];
      s += field.at(p) + field.at(m) - 2 * c;
    }
    visit(x, s * inv);
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::EmptyDomain, "mask excludes every interior point");
  return count;
}

}  // namespace

LaplacianReport discrete_laplacian_report(const GridField& field, const std::function<bool(const Point&)>& mask,
                                          double tol) {
  LaplacianReport r;
  r.min_value = std::numeric_limits<double>::infinity();
  r.points = for_each_stencil(field, mask, [&](const Point& x, double v) {
    if (v < r.min_value) r.min_value = v, r.argmin = x;
    if (v < -tol) r.violations.push_back(x);
  });
  return r;
}

double min_abs_laplacian(const GridField& field, const std::function<bool(const Point&)>& mask) {
  double m = std::numeric_limits<double>::infinity();
  for_each_stencil(field, mask, [&](const Point&, double v) { m = std::min(m, std::abs(v)); });
  return m;
}

namespace {

// Unit-sphere quadrature: nodes and weights summing to one.
void sphere_rule(int d, std::vector<Point>& nodes, std::vector<double>& weights) {
  if (d == 2) {
    constexpr int m = 64;
    for (int i = 0; i < m; ++i) {
      const double t = 2 * std::numbers::pi * i / m;
      nodes.push_back(Point{std::cos(t), std::sin(t)});
      weights.push_back(1.0 / m);
    }
    return;
  }
  // 16-point Gauss-Legendre in z (Golub-Welsch would be overkill: Newton on P_16).
  constexpr int nz = 16, nphi = 32;
  for (int i = 0; i < nz; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (nz + 0.5)), dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int n = 2; n <= nz; ++n) {
        const double p2 = ((2 * n - 1) * z * p1 - (n - 1) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = nz * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    const double wz = 2 / ((1 - z * z) * dp * dp);
    const double s = std::sqrt(1 - z * z);
    for (int j = 0; j < nphi; ++j) {
      const double t = 2 * std::numbers::pi * j / nphi;
      nodes.push_back(Point{s * std::cos(t), s * std::sin(t), z});
      weights.push_back(wz / (2.0 * nphi));
    }
  }
}

}  // namespace

SubMeanReport sub_mean_value(const CompiledFunction& u, const Point& lo, const Point& hi, double h, double radius,
                             double tol) {
  const int d = lo.dim();
  if (!(h > 0) || !(radius > 0)) throw Error(ErrorKind::InvalidParameter, "grid spacing and radius must be positive");
  IPoint extents(d);
  double total = 1;
  for (int a = 0; a < d; ++a) {
    extents[a] = static_cast<std::int64_t>(std::floor((hi[a] - lo[a]) / h + 1e-9)) + 1;
    if (extents[a] < 1) throw Error(ErrorKind::EmptyDomain, "empty grid");
    total *= static_cast<double>(extents[a]);
  }
  if (total > double(1 << 24)) throw Error(ErrorKind::ParameterRange, "grid too large for the sub-mean-value check");
  std::vector<Point> nodes;
  std::vector<double> weights;
  sphere_rule(d, nodes, weights);

  const auto n = static_cast<std::size_t>(total);
  std::vector<double> excess(n, INFINITY);
  std::vector<char> active(n, 0);
  parallel_for(n, [&](std::size_t k) {
    IPoint i = unflatten(static_cast<std::int64_t>(k), extents);
    Point x = lo;
    for (int a = 0; a < d; ++a) x[a] += h * static_cast<double>(i[a]);
    const double c = u.log_value(x);
    if (!std::isfinite(c)) return;
    active[k] = 1;
    double mean = 0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double v = u.log_value(x + radius * nodes[q]);
      if (std::isfinite(v)) mean += weights[q] * std::exp(v - c);
    }
    excess[k] = std::log(mean);
  });
  SubMeanReport r;
  for (std::size_t k = 0; k < n; ++k) {
    if (!active[k]) continue;
    ++r.points;
    if (excess[k] < r.min_log_excess) {
      r.min_log_excess = excess[k];
      IPoint i = unflatten(static_cast<std::int64_t>(k), extents);
      r.argmin = lo;
      for (int a = 0; a < d; ++a) r.argmin[a] += h * static_cast<double>(i[a]);
    }
    if (excess[k] < -tol) ++r.violations;
  }
  return r;
}

// ---- suprema ---------------------------------------------------------------------

namespace {

struct GridSpec {
  IPoint count;
  Point step;
  double radius = 0;
};

GridSpec cell_centers(const Point& lo, const Point& hi, double h) {
  const int d = lo.dim();
  if (!(h > 0)) throw Error(ErrorKind::InvalidParameter, "resolution must be positive");
  GridSpec g{IPoint(d), Point(d), 0};
  double r2 = 0;
  for (int a = 0; a < d; ++a) {
    const double len = hi[a] - lo[a];
    if (!(len > 0)) throw Error(ErrorKind::EmptyDomain, "region is empty");
    g.count[a] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(len / h - 1e-9)));
    g.step[a] = len / static_cast<double>(g.count[a]);
    r2 += 0.25 * g.step[a] * g.step[a];
  }
  g.radius = std::sqrt(r2);
  return g;
}

Point center_of(const GridSpec& g, const Point& lo, std::int64_t flat) {
  const IPoint i = unflatten(flat, g.count);
  Point x = lo;
  for (int a = 0; a < lo.dim(); ++a) x[a] += (static_cast<double>(i[a]) + 0.5) * g.step[a];
  return x;
}

}  // namespace

SupBracket sup_on(const std::function<double(const Point&)>& fn,
                  const std::function<double(const Point&, double)>& grad_bound, const Point& lo, const Point& hi,
                  double h) {
  const GridSpec g = cell_centers(lo, hi, h);
  const std::int64_t n = product(g.count);
  SupBracket b{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), lo};
  for (std::int64_t k = 0; k < n; ++k) {
    const Point x = center_of(g, lo, k);
    const double v = fn(x);
    if (v > b.grid_max) b.grid_max = v, b.argmax = x;
    b.upper = std::max(b.upper, v + grad_bound(x, g.radius) * g.radius);
  }
  return b;
}

SupBracket log_sup_on(const CompiledFunction& u, const Point& lo, const Point& hi, double h) {
  for (int a = 0; a < u.dim(); ++a)
    if (lo[a] < u.domain_lo()[a] || hi[a] > u.domain_hi()[a])
      throw Error(ErrorKind::Domain, "region leaves the function's domain box");
  const GridSpec g = cell_centers(lo, hi, h);
  const std::int64_t n = product(g.count);
  const std::size_t chunks = static_cast<std::size_t>(std::min<std::int64_t>(n, 256));
  std::vector<SupBracket> part(chunks, SupBracket{kNegInf, kNegInf, lo});
  const double log_r = std::log(g.radius);
  parallel_for(chunks, [&](std::size_t c) {
    SupBracket& b = part[c];
    for (std::int64_t k = static_cast<std::int64_t>(c); k < n; k += static_cast<std::int64_t>(chunks)) {
      const Point x = center_of(g, lo, k);
      const double v = u.log_value(x);
      if (v > b.grid_max) b.grid_max = v, b.argmax = x;
      b.upper = std::max(b.upper, log_sum_exp(v, u.log_gradient_bound(x, g.radius) + log_r));
    }
  });
  SupBracket out{kNegInf, kNegInf, lo};
  for (const auto& b : part) {
    if (b.grid_max > out.grid_max) out.grid_max = b.grid_max, out.argmax = b.argmax;
    out.upper = std::max(out.upper, b.upper);
  }
  return out;
}

// ---- shapes --------------------------------------------------------------------

bool Shape::fiber_hits(const Point& y, int axis, double t0, double t1) const {
  constexpr int n = 32;
  Point x = y;
  for (int j = 0; j < n; ++j) {
    x[axis] = t0 + (j + 0.5) * (t1 - t0) / n;
    if (contains(x)) return true;
  }
  return false;
}

namespace {

double segment_distance(const Point& p0, const Point& p1, const Point& q0, const Point& q1) {
  // Closest points of two segments (clamped parameters).
  const Point u = p1 - p0, v = q1 - q0, w = p0 - q0;
  const double a = dot(u, u), b = dot(u, v), c = dot(v, v), dd = dot(u, w), e = dot(v, w);
  const double den = a * c - b * b;
  double s = 0, t = 0;
  if (a < 1e-300 && c < 1e-300) return norm(w);
  if (a < 1e-300) {
    t = std::clamp(e / c, 0.0, 1.0);
  } else if (c < 1e-300) {
    s = std::clamp(-dd / a, 0.0, 1.0);
  } else {
    s = den > 1e-14 * a * c ? std::clamp((b * e - c * dd) / den, 0.0, 1.0) : 0.0;
    t = (b * s + e) / c;
    if (t < 0) t = 0, s = std::clamp(-dd / a, 0.0, 1.0);
    else if (t > 1) t = 1, s = std::clamp((b - dd) / a, 0.0, 1.0);
  }
  return norm(w + s * u - t * v);
}

}  // namespace

bool SegmentShape::contains(const Point& x) const { return segment_distance(a_, b_, x, x) < 1e-12; }

Overlap SegmentShape::intersects_box(const Point& lo, const Point& hi) const {
  double t0 = 0, t1 = 1;
  const Point dir = b_ - a_;
  for (int i = 0; i < dim(); ++i) {
    if (std::abs(dir[i]) < 1e-300) {
      if (a_[i] < lo[i] || a_[i] > hi[i]) return Overlap::None;
      continue;
    }
    double ta = (lo[i] - a_[i]) / dir[i], tb = (hi[i] - a_[i]) / dir[i];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return Overlap::None;
  }
  return Overlap::Some;
}

bool SegmentShape::fiber_hits(const Point& y, int axis, double t0, double t1) const {
  Point p = y, q = y;
  p[axis] = t0;
  q[axis] = t1;
  return segment_distance(a_, b_, p, q) < 1e-12;
}

bool BoxShape::contains(const Point& x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
  return true;
}

Overlap BoxShape::intersects_box(const Point& lo, const Point& hi) const {
  for (int i = 0; i < dim(); ++i)
    if (hi[i] < lo_[i] || lo[i] > hi_[i]) return Overlap::None;
  return Overlap::Some;
}

bool BoxShape::fiber_hits(const Point& y, int axis, double t0, double t1) const {
  for (int i = 0; i < dim(); ++i) {
    if (i == axis) {
      if (t1 < lo_[i] || t0 > hi_[i]) return false;
    } else if (y[i] < lo_[i] || y[i] > hi_[i]) {
      return false;
    }
  }
  return true;
}

Overlap ZeroSetShape::intersects_box(const Point& lo, const Point& hi) const {
  const int d = dim();
  IPoint i(d, 0);
  while (true) {
    Point x(d);
    for (int a = 0; a < d; ++a) x[a] = lo[a] + 0.5 * static_cast<double>(i[a]) * (hi[a] - lo[a]);
    if (u_.vanishes(x)) return Overlap::Some;
    int a = d - 1;
    while (a >= 0 && ++i[a] == 3) i[a] = 0, --a;
    if (a < 0) break;
  }
  return Overlap::None;
}

bool ZeroSetShape::fiber_hits(const Point& y, int axis, double t0, double t1) const {
  Point x = y;
  for (int j = 0; j < fiber_samples_; ++j) {
    x[axis] = t0 + (j + 0.5) * (t1 - t0) / fiber_samples_;
    if (u_.vanishes(x)) return true;
  }
  return false;
}

// ---- content ---------------------------------------------------------------------

namespace {

double cover_cost(const Shape& s, const Point& lo, double edge, int level, int depth) {
  const int d = s.dim();
  const Point hi = lo + Point(d, edge);
  if (s.intersects_box(lo, hi) == Overlap::None) return 0;
  const double own = std::pow(edge, d - 1);
  if (level == depth) return own;
  double sum = 0;
  const double half = 0.5 * edge;
  for (int c = 0; c < (1 << d); ++c) {
    Point q = lo;
    for (int a = 0; a < d; ++a)
      if (c >> a & 1) q[a] += half;
    sum += cover_cost(s, q, half, level + 1, depth);
    if (sum >= own) return own;
  }
  return std::min(own, sum);
}

// Fraction of fibers hitting the shape, stopping once `stop` hits are found.
ProjectionEstimate project(const Shape& s, const Point& lo, double edge, int axis, int fibers, std::size_t stop) {
  const int d = s.dim();
  ProjectionEstimate e;
  e.axis = axis;
  const int m = d - 1;
  std::size_t total = 1;
  for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(fibers);
  e.fibers = total;
  for (std::size_t f = 0; f < total && e.hits < stop; ++f) {
    Point y = lo;
    std::size_t rest = f;
    for (int a = 0; a < d; ++a) {
      if (a == axis) continue;
      y[a] = lo[a] + (static_cast<double>(rest % static_cast<std::size_t>(fibers)) + 0.5) * edge / fibers;
      rest /= static_cast<std::size_t>(fibers);
    }
    if (s.fiber_hits(y, axis, lo[axis], lo[axis] + edge)) ++e.hits;
  }
  e.value = static_cast<double>(e.hits) / static_cast<double>(total) * std::pow(edge, m);
  return e;
}

}  // namespace

double content_upper(const Shape& shape, const Point& cube_lo, double edge, int depth) {
  if (depth < 1) throw Error(ErrorKind::InvalidParameter, "cover depth must be at least 1");
  return cover_cost(shape, cube_lo, edge, 0, depth);
}

ProjectionEstimate content_lower_projection(const Shape& shape, const Point& cube_lo, double edge, int axis,
                                            int fibers_per_axis) {
  if (axis < 0 || axis >= shape.dim()) throw Error(ErrorKind::InvalidParameter, "projection axis out of range");
  return project(shape, cube_lo, edge, axis, fibers_per_axis, std::numeric_limits<std::size_t>::max());
}

// ---- oscillation -------------------------------------------------------------------

OscillationReport classify_cube(const CompiledFunction& u, const LatticeCube& cube, const OscillationOptions& opt) {
  const int d = cube.dim();
  OscillationReport r;
  r.cube = cube;
  const Point lo = to_point(cube.corner), hi = lo + Point(d, 1.0);

  // P1: any attained value >= 1 certifies sup >= 1.
  auto try_point = [&](const Point& x) {
    r.log_sup_lower = std::max(r.log_sup_lower, u.log_value(x));
    return r.log_sup_lower >= 0;
  };
  bool p1 = try_point(cube.center());
  if (!p1)
    for (const Point& x : u.axis_samples(lo, hi, opt.axis_step))
      if ((p1 = try_point(x))) break;
  if (!p1) {
    const int n = opt.p1_grid > 0 ? opt.p1_grid : (d == 2 ? 8 : 5);
    IPoint i(d, 0);
    while (!p1) {
      Point x = lo;
      for (int a = 0; a < d; ++a) x[a] += (static_cast<double>(i[a]) + 0.5) / n;
      p1 = try_point(x);
      int a = d - 1;
      while (a >= 0 && ++i[a] == n) i[a] = 0, --a;
      if (a < 0) break;
    }
  }
  r.p1_satisfied = p1;

  // P2: projection of the zero set, best axis.
  const ZeroSetShape zero(u, opt.fiber_samples);
  std::size_t fibers = 1;
  for (int i = 1; i < d; ++i) fibers *= static_cast<std::size_t>(opt.fibers_per_axis);
  const auto enough = static_cast<std::size_t>(std::ceil((opt.eps_d + opt.band) * static_cast<double>(fibers)));
  for (int axis = 0; axis < d; ++axis) {
    const ProjectionEstimate e = project(zero, lo, 1.0, axis, opt.fibers_per_axis, enough);
    r.content_lower = std::max(r.content_lower, e.value);
    if (e.hits >= enough) break;
  }
  r.p2_satisfied = r.content_lower >= opt.eps_d + opt.band;
  r.uncertain = !r.p2_satisfied && r.content_lower >= opt.eps_d - opt.band;
  r.classification = r.p1_satisfied && r.p2_satisfied ? CubeClass::Oscillating : CubeClass::Rogue;
  return r;
}

RogueCensus rogue_census(const CompiledFunction& u, const IntBox& box, const GrowthFunction& f,
                         const OscillationOptions& opt) {
  RogueCensus c;
  c.box = box;
  const auto cubes = enumerate_basic_cubes(box);
  c.cubes.resize(cubes.size());
  parallel_for(cubes.size(), [&](std::size_t i) { c.cubes[i] = classify_cube(u, cubes[i], opt); });
  for (const auto& r : c.cubes) {
    c.rogue += r.classification == CubeClass::Rogue;
    c.uncertain += r.uncertain;
    c.p1_failures += !r.p1_satisfied;
    c.p2_failures += !r.p2_satisfied;
  }
  std::int64_t side = 0;
  for (int a = 0; a < box.dim(); ++a) side = std::max(side, box.hi[a] - box.lo[a]);
  c.f_value = f(static_cast<double>(side));
  c.gamma = static_cast<double>(c.rogue) / c.f_value;
  return c;
}

// ---- growth ------------------------------------------------------------------------

double growth_denominator(const GrowthParameters& params, double R) {
  const int d = params.dim;
  const double q = params.f(R) / R;
  return R * std::pow(std::log(2 + q), d / (d - 1.0)) / (1 + std::pow(q, 1.0 / (d - 1)));
}

GrowthProfile growth_profile(const GrowthParameters& params, int k_min, int k_max, int grid_per_axis) {
  if (k_min < 1 || k_max < k_min) throw Error(ErrorKind::InvalidParameter, "growth range must satisfy 1 <= k_min <= k_max");
  const int d = params.dim;
  GrowthProfile p;
  for (int k = k_min; k <= k_max; ++k) {
    const Construction c = build_u(params, k);
    const double R = std::ldexp(1.0, k);
    const CompiledFunction u(c.node(), Point(d, -1.0), Point(d, R + 1));
    const SupBracket b = log_sup_on(u, Point(d, 0.0), Point(d, R), R / grid_per_axis);
    p.k.push_back(k);
    p.radius.push_back(R);
    p.log_M_lower.push_back(b.grid_max);
    p.log_M_upper.push_back(b.upper);
    p.log_threshold.push_back(log_threshold(params, k));
    p.denominator.push_back(growth_denominator(params, R));
    p.ratio.push_back(b.upper / p.denominator.back());
  }
  p.ratio_min = *std::min_element(p.ratio.begin(), p.ratio.end());
  p.ratio_max = *std::max_element(p.ratio.begin(), p.ratio.end());
  return p;
}

// ---- artifacts -----------------------------------------------------------------------

void write_census_csv(std::ostream& out, const RogueCensus& census) {
  const int d = census.box.dim();
  for (int a = 0; a < d; ++a) out << "x" << a << ",";
  out << "p1,p2,uncertain,log_sup_lower,content_lower,class\n";
  out << std::setprecision(10);
  for (const auto& r : census.cubes) {
    for (int a = 0; a < d; ++a) out << r.cube.corner[a] << ",";
    out << r.p1_satisfied << "," << r.p2_satisfied << "," << r.uncertain << "," << r.log_sup_lower << ","
        << r.content_lower << "," << (r.classification == CubeClass::Rogue ? "rogue" : "oscillating") << "\n";
  }
}

void write_growth_csv(std::ostream& out, const GrowthProfile& p) {
  out << "k,R,logM_lower,logM_upper,logM_threshold,D,ratio\n" << std::setprecision(10);
  for (std::size_t i = 0; i < p.k.size(); ++i)
    out << p.k[i] << "," << p.radius[i] << "," << p.log_M_lower[i] << "," << p.log_M_upper[i] << ","
        << p.log_threshold[i] << "," << p.denominator[i] << "," << p.ratio[i] << "\n";
}

void write_census_svg(std::ostream& out, const RogueCensus& census, const std::vector<char>* branch_mask) {
  if (census.box.dim() != 2) throw Error(ErrorKind::InvalidParameter, "heatmap is drawn for d = 2 only");
  const auto w = census.box.hi[0] - census.box.lo[0], h = census.box.hi[1] - census.box.lo[1];
  const double px = std::clamp(800.0 / static_cast<double>(std::max(w, h)), 1.0, 24.0);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px * static_cast<double>(w) << "\" height=\""
      << px * static_cast<double>(h) << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < census.cubes.size(); ++i) {
    const auto& r = census.cubes[i];
    const bool branch = branch_mask && (*branch_mask)[i];
    if (r.classification != CubeClass::Rogue && !branch) continue;
    const char* fill = r.classification != CubeClass::Rogue ? "#9ecae1" : (r.uncertain ? "#fdae6b" : "#d62728");
    const double x = static_cast<double>(r.cube.corner[0] - census.box.lo[0]) * px;
    // y grows upward in the plot
    const double y = static_cast<double>(census.box.hi[1] - 1 - r.cube.corner[1]) * px;
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << px << "\" height=\"" << px << "\" fill=\"" << fill
        << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace oscillab
