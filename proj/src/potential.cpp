#include "oscillab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "oscillab/error.hpp"
#include "oscillab/parallel.hpp"

namespace oscillab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dim(int dim) {
  if (dim < 2 || dim > kMaxDim) throw Error(ErrorKind::InvalidParameter, "dimension must be 2 or 3");
}

// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_simplex(const std::vector<double>& v) {
  std::vector<double> s(v);
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0, theta = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

double point_segment_distance(const Point& x, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0 ? dot(x - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(x - (a + t * ab));
}

// Half the nearest-neighbour distance for each point.
std::vector<double> half_nn(const std::vector<Point>& pts) {
  std::vector<double> h(pts.size(), INFINITY);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j) h[i] = std::min(h[i], norm(pts[i] - pts[j]));
  for (auto& x : h) x *= 0.5;
  return h;
}

std::vector<double> kernel_matrix(const std::vector<Point>& pts, int dim) {
  const std::size_t n = pts.size();
  const auto h = half_nn(pts);
  std::vector<double> A(n * n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) A[i * n + j] = i == j ? kernel(h[i], dim) : kernel(norm(pts[i] - pts[j]), dim);
  });
  return A;
}

std::vector<double> matvec(const std::vector<double>& A, const std::vector<double>& w) {
  const std::size_t n = w.size();
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) {
    double s = 0;
    const double* row = &A[i * n];
    for (std::size_t j = 0; j < n; ++j) s += row[j] * w[j];
    out[i] = s;
  });
  return out;
}

double inner(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

Point unit_axis(int dim, int axis) {
  Point e(dim, 0.0);
  e[axis] = 1;
  return e;
}

// n points per axis on a grid filling [lo, hi].
void grid_samples(const Point& lo, const Point& hi, int n, std::vector<Point>& out) {
  const int dim = lo.dim();
  IPoint idx(dim, 0);
  while (true) {
    Point p(dim);
    for (int a = 0; a < dim; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * (idx[a] + 0.5) / n;
    out.push_back(p);
    int a = 0;
    while (a < dim && ++idx[a] == n) idx[a++] = 0;
    if (a == dim) break;
  }
}

// Roughly uniform directions: angles in the plane, a Fibonacci lattice in space.
std::vector<Point> sphere_directions(int dim, int count) {
  std::vector<Point> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (dim == 2) {
      const double t = 2 * kPi * i / count;
      out.push_back(Point{std::cos(t), std::sin(t)});
    } else {
      const double z = 1 - (2.0 * i + 1) / count;
      const double r = std::sqrt(std::max(0.0, 1 - z * z));
      const double t = i * kPi * (3 - std::sqrt(5.0));
      out.push_back(Point{r * std::cos(t), r * std::sin(t), z});
    }
  }
  return out;
}

}  // namespace

double kernel(double t, int dim) {
  if (!(t > 0)) throw Error(ErrorKind::Domain, "kernel needs t > 0");
  check_dim(dim);
  return dim == 2 ? std::log(t) : -std::pow(t, -(dim - 2.0));
}

double DiscreteMeasure::total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

DiscreteMeasure DiscreteMeasure::merged() const {
  std::map<std::vector<double>, std::size_t> seen;
  DiscreteMeasure out;
  out.probability = probability;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<double> key(points[i].begin(), points[i].end());
    auto [it, fresh] = seen.emplace(key, out.points.size());
    if (fresh) {
      out.points.push_back(points[i]);
      out.weights.push_back(weights[i]);
    } else {
      out.weights[it->second] += weights[i];
    }
  }
  return out;
}

EnergyResult energy(const DiscreteMeasure& nu) {
  if (nu.points.size() != nu.weights.size()) throw Error(ErrorKind::InvalidParameter, "points and weights differ in size");
  if (nu.points.empty()) throw Error(ErrorKind::EmptyDomain, "empty measure");
  for (double w : nu.weights)
    if (w < 0) throw Error(ErrorKind::InvalidParameter, "negative weight");
  const auto m = nu.merged();
  const int dim = m.dim();
  check_dim(dim);
  if (m.points.size() == 1) return {-INFINITY, true};
  const auto A = kernel_matrix(m.points, dim);
  return {inner(m.weights, matvec(A, m.weights)), false};
}

EquilibriumResult equilibrium(const std::vector<Point>& points, int max_iterations, double tolerance) {
  if (points.empty()) throw Error(ErrorKind::EmptyDomain, "no points");
  DiscreteMeasure start;
  start.points = points;
  start.weights.assign(points.size(), 1.0);
  auto m = start.merged();
  const int dim = m.dim();
  check_dim(dim);
  const std::size_t n = m.points.size();
  EquilibriumResult res;
  if (n == 1) {
    res.measure = m;
    res.measure.weights = {1.0};
    res.energy = -INFINITY;
    return res;
  }

  const auto A = kernel_matrix(m.points, dim);
  std::vector<double> w(n, 1.0 / n);
  auto Aw = matvec(A, w);
  double F = inner(w, Aw);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = 2 * Aw[i];

  auto residual = [&](const std::vector<double>& w, const std::vector<double>& g) {
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = w[i] + g[i];
    z = project_simplex(z);
    double r = 0;
    for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(z[i] - w[i]));
    return r;
  };

  double row_max = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(A[i * n + j]);
    row_max = std::max(row_max, s);
  }
  double step = 1.0 / (2 * row_max);
  int it = 0;
  double r = residual(w, g);
  for (; it < max_iterations && r >= tolerance; ++it) {
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = w[i] + step * g[i];
    z = project_simplex(z);
    std::vector<double> dir(n);
    for (std::size_t i = 0; i < n; ++i) dir[i] = z[i] - w[i];
    const double slope = inner(g, dir);
    // Armijo backtracking on the concave quadratic.
    double alpha = 1;
    std::vector<double> wn(n), Awn;
    double Fn = F;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < n; ++i) wn[i] = w[i] + alpha * dir[i];
      Awn = matvec(A, wn);
      Fn = inner(wn, Awn);
      if (Fn >= F + 1e-4 * alpha * slope) break;
      alpha *= 0.5;
    }
    std::vector<double> gn(n);
    for (std::size_t i = 0; i < n; ++i) gn[i] = 2 * Awn[i];
    // Barzilai-Borwein step for the next round.
    double ss = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = wn[i] - w[i], y = gn[i] - g[i];
      ss += s * s;
      sy += s * y;
    }
    step = (sy < 0 && ss > 0) ? std::clamp(ss / -sy, 1e-12, 1e12) : step * 2;
    w = std::move(wn);
    g = std::move(gn);
    F = Fn;
    r = residual(w, g);
  }
  if (r >= tolerance)
    throw Error(ErrorKind::Convergence, "equilibrium did not converge, KKT residual " + std::to_string(r));
  res.measure = m;
  res.measure.weights = w;
  res.energy = F;
  res.residual = r;
  res.iterations = it;
  return res;
}

FrostmanResult frostman(const std::vector<IPoint>& cells, int depth, int audit_balls, std::uint64_t seed) {
  if (cells.empty()) throw Error(ErrorKind::EmptyDomain, "no cells");
  if (depth < 0 || depth > 20) throw Error(ErrorKind::ParameterRange, "depth out of range");
  const int dim = cells.front().dim();
  check_dim(dim);
  const std::int64_t side = std::int64_t{1} << depth;
  for (const auto& c : cells)
    for (auto x : c)
      if (x < 0 || x >= side) throw Error(ErrorKind::Domain, "cell outside the unit cube");

  auto gauge = [&](int level) { return std::pow(std::ldexp(1.0, -level), dim - 1.0); };
  // levels[l]: cell -> (mass, scale applied to the subtree)
  std::vector<std::map<IPoint, std::pair<double, double>>> levels(depth + 1);
  for (const auto& c : cells) levels[depth][c] = {gauge(depth), 1.0};
  for (int l = depth; l > 0; --l) {
    for (const auto& [c, v] : levels[l]) {
      IPoint p = c;
      for (auto& x : p) x >>= 1;
      levels[l - 1][p].first += v.first;
    }
    for (auto& [c, v] : levels[l - 1]) {
      const double cap = gauge(l - 1);
      v.second = v.first > cap ? cap / v.first : 1.0;
      v.first = std::min(v.first, cap);
    }
  }

  FrostmanResult res;
  res.measure.probability = false;
  const double h = std::ldexp(1.0, -depth);
  for (const auto& [c, v] : levels[depth]) {
    double mass = v.first;
    IPoint p = c;
    for (int l = depth - 1; l >= 0; --l) {
      for (auto& x : p) x >>= 1;
      mass *= levels[l].at(p).second;
    }
    Point centre(dim);
    for (int a = 0; a < dim; ++a) centre[a] = (c[a] + 0.5) * h;
    res.measure.points.push_back(centre);
    res.measure.weights.push_back(mass);
  }
  res.total_mass = res.measure.total();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);
  const auto& pts = res.measure.points;
  const auto& ws = res.measure.weights;
  for (int b = 0; b < audit_balls; ++b) {
    Point x(dim);
    // Half the balls centred on the support, where the mass is.
    if (b % 2 == 0) {
      x = pts[static_cast<std::size_t>(unit(rng) * pts.size()) % pts.size()];
    } else {
      for (auto& xi : x) xi = unit(rng);
    }
    const double r = h * std::pow(1.0 / h, unit(rng));
    double mass = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (norm(pts[i] - x) <= r) mass += ws[i];
    res.growth_constant = std::max(res.growth_constant, mass / std::pow(r, dim - 1.0));
  }
  res.audited = audit_balls;
  return res;
}

double SegmentSet::distance(const Point& x) const { return point_segment_distance(x, a_, b_); }

CapSet::CapSet(Point c, double r, Point axis, double half_angle) : c_(c), axis_(axis), r_(r), half_(half_angle) {
  const double n = norm(axis_);
  if (!(n > 0) || !(r > 0)) throw Error(ErrorKind::InvalidParameter, "degenerate cap");
  axis_ = (1.0 / n) * axis_;
}

double CapSet::distance(const Point& x) const {
  const Point v = x - c_;
  const double len = norm(v);
  if (len == 0) return r_;
  const double along = dot(v, axis_);
  const double angle = std::acos(std::clamp(along / len, -1.0, 1.0));
  if (angle <= half_) return std::abs(len - r_);
  // Nearest point is on the rim, in the plane of v and the axis.
  Point perp = v - along * axis_;
  const double pn = norm(perp);
  if (pn == 0) {
    perp = Point(v.dim(), 0.0);
    perp[std::abs(axis_[0]) < 0.9 ? 0 : 1] = 1;
    perp = perp - dot(perp, axis_) * axis_;
    perp = (1.0 / norm(perp)) * perp;
  } else {
    perp = (1.0 / pn) * perp;
  }
  const Point rim = r_ * (std::cos(half_) * axis_ + std::sin(half_) * perp);
  return norm(v - rim);
}

double BoxUnionSet::distance(const Point& x) const {
  double best = INFINITY;
  for (const auto& [lo, hi] : boxes_) {
    double s = 0;
    for (int a = 0; a < x.dim(); ++a) {
      const double e = std::max({lo[a] - x[a], 0.0, x[a] - hi[a]});
      s += e * e;
    }
    best = std::min(best, s);
  }
  return std::sqrt(best);
}

double TubeUnionSet::distance(const Point& x) const {
  double best = INFINITY;
  for (const auto& t : tubes_) {
    const int dim = t.a.dim();
    Point a = t.a;
    if (with_tail_) a = a - t.tail * t.direction();
    const double radius = 0.5 * t.diameter * std::sqrt(dim - 1.0);
    best = std::min(best, std::max(0.0, point_segment_distance(x, a, t.b) - radius));
  }
  return best;
}

Overlap DistanceShape::intersects_box(const Point& lo, const Point& hi) const {
  const Point c = 0.5 * (lo + hi);
  const double half_diag = 0.5 * norm(hi - lo);
  return s_.distance(c) <= half_diag + tol_ ? Overlap::Some : Overlap::None;
}

bool DistanceShape::fiber_hits(const Point& y, int axis, double t0, double t1) const {
  Point p = y;
  double t = t0;
  for (int it = 0; it < 100000 && t <= t1; ++it) {
    p[axis] = t;
    const double d = s_.distance(p);
    if (d <= 1e-9) return true;
    t += d;
  }
  return false;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

WosEstimate wos_harmonic_measure(const Point& x, const DistanceSet& E, std::int64_t walks, std::uint64_t seed,
                                 double outer_radius, double shell, int step_cap) {
  const int dim = x.dim();
  check_dim(dim);
  if (E.dim() != dim) throw Error(ErrorKind::InvalidParameter, "dimension mismatch");
  if (walks <= 0 || !(shell > 0) || step_cap <= 0) throw Error(ErrorKind::InvalidParameter, "bad walk parameters");
  if (norm(x) >= outer_radius) throw Error(ErrorKind::Domain, "start point outside the ball");
  if (E.distance(x) <= 0) throw Error(ErrorKind::Domain, "start point lies on E");

  // Results are written per walk, so the estimate does not depend on the worker count.
  std::vector<std::int8_t> outcome(static_cast<std::size_t>(walks));
  parallel_for(outcome.size(), [&](std::size_t i) {
    std::mt19937_64 rng(splitmix64(seed ^ static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> gauss;
    Point y = x;
    for (int step = 0; step < step_cap; ++step) {
      const double dE = E.distance(y);
      if (dE < shell) {
        outcome[i] = 1;
        return;
      }
      const double dO = outer_radius - norm(y);
      if (dO < shell) {
        outcome[i] = 0;
        return;
      }
      Point dir(dim);
      for (auto& c : dir) c = gauss(rng);
      y = y + (std::min(dE, dO) / norm(dir)) * dir;
    }
    outcome[i] = -1;
  });

  WosEstimate est;
  est.walks = walks;
  est.seed = seed;
  std::int64_t hits = 0;
  for (auto o : outcome) {
    if (o == 1) ++hits;
    if (o < 0) ++est.capped;
  }
  est.p = static_cast<double>(hits) / walks;
  est.standard_error = std::sqrt(est.p * (1 - est.p) / walks);
  est.flagged = est.capped * 1000 > walks;
  return est;
}

std::vector<FamilyMember> claim_family(int dim, int samples_per_member) {
  check_dim(dim);
  Point centre(dim, 0.0);
  centre[0] = 0.25;
  const Point e1 = unit_axis(dim, 1);
  const int per_axis = std::max(2, static_cast<int>(std::round(std::pow(samples_per_member, 1.0 / dim))));
  std::vector<FamilyMember> out;
  for (double s : {1.0, 0.5, 0.25}) {
    {  // segment across the radial direction
      FamilyMember m{"segment", s, nullptr, {}};
      const Point a = centre - 0.15 * s * e1, b = centre + 0.15 * s * e1;
      m.set = std::make_shared<SegmentSet>(a, b);
      for (int i = 0; i < samples_per_member; ++i) m.samples.push_back(a + ((i + 0.5) / samples_per_member) * (b - a));
      out.push_back(std::move(m));
    }
    {  // arc or cap of the sphere of radius 1/4 about the origin
      FamilyMember m{"cap", s, nullptr, {}};
      const double r = 0.25, half = 0.6 * s;
      const Point axis = unit_axis(dim, 0);
      m.set = std::make_shared<CapSet>(Point(dim, 0.0), r, axis, half);
      if (dim == 2) {
        for (int i = 0; i < samples_per_member; ++i) {
          const double t = -half + 2 * half * (i + 0.5) / samples_per_member;
          m.samples.push_back(Point{r * std::cos(t), r * std::sin(t)});
        }
      } else {
        for (const auto& d : sphere_directions(3, samples_per_member * 8))
          if (std::acos(std::clamp(d[0], -1.0, 1.0)) <= half) m.samples.push_back(r * d);
      }
      out.push_back(std::move(m));
    }
    {  // one solid block of cells
      FamilyMember m{"block", s, nullptr, {}};
      const Point lo = centre - uniform_point(dim, 0.1 * s), hi = centre + uniform_point(dim, 0.1 * s);
      m.set = std::make_shared<BoxUnionSet>(std::vector<std::pair<Point, Point>>{{lo, hi}});
      grid_samples(lo, hi, per_axis, m.samples);
      out.push_back(std::move(m));
    }
    {  // 3^d small cells on a sparse lattice
      FamilyMember m{"scattered", s, nullptr, {}};
      std::vector<std::pair<Point, Point>> boxes;
      IPoint idx(dim, 0);
      while (true) {
        Point c = centre;
        for (int a = 0; a < dim; ++a) c[a] += 0.1 * s * (idx[a] - 1);
        boxes.emplace_back(c - uniform_point(dim, 0.01 * s), c + uniform_point(dim, 0.01 * s));
        int a = 0;
        while (a < dim && ++idx[a] == 3) idx[a++] = 0;
        if (a == dim) break;
      }
      const int per_cell = std::max(2, per_axis / 3);
      for (const auto& [lo, hi] : boxes) grid_samples(lo, hi, per_cell, m.samples);
      m.set = std::make_shared<BoxUnionSet>(std::move(boxes));
      out.push_back(std::move(m));
    }
  }
  return out;
}

ClaimReport check_claim1(const std::vector<FamilyMember>& family, std::int64_t walks, std::uint64_t seed,
                         int content_depth) {
  if (family.empty()) throw Error(ErrorKind::EmptyDomain, "empty family");
  ClaimReport rep;
  const int dim = family.front().set->dim();
  const Point origin(dim, 0.0);
  const Point cube_lo = uniform_point(dim, -0.5);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& m = family[i];
    ClaimRow row;
    row.name = m.name;
    row.scale = m.scale;
    DistanceShape shape(*m.set);
    row.content_upper = content_upper(shape, cube_lo, 1.0, content_depth);
    for (int a = 0; a < dim; ++a)
      row.content_lower = std::max(row.content_lower, content_lower_projection(shape, cube_lo, 1.0, a, 64).value);
    const auto w = wos_harmonic_measure(origin, *m.set, walks, splitmix64(seed + i));
    row.omega = w.p;
    row.omega_se = w.standard_error;
    row.energy = equilibrium(m.samples).energy;
    row.ratio = row.omega / row.content_upper;
    row.claim4 = row.content_upper * -row.energy;
    rep.rows.push_back(row);
  }
  rep.min_ratio = INFINITY;
  for (const auto& r : rep.rows) {
    rep.min_ratio = std::min(rep.min_ratio, r.ratio);
    rep.max_ratio = std::max(rep.max_ratio, r.ratio);
  }
  const double top = std::max_element(rep.rows.begin(), rep.rows.end(),
                                      [](const auto& a, const auto& b) { return a.scale < b.scale; })->scale;
  for (const auto& r : rep.rows)
    if (r.scale == top) rep.C_fit = std::max(rep.C_fit, r.claim4);
  for (const auto& r : rep.rows)
    if (!(r.energy < 0) || r.claim4 > rep.C_fit * (1 + 1e-9)) rep.claim4_holds = false;
  return rep;
}

Obs1Report check_obs1(const std::function<double(const Point&)>& u, const Point& x0, const DistanceSet& E,
                      std::int64_t walks, std::uint64_t seed) {
  const int dim = x0.dim();
  check_dim(dim);
  Obs1Report rep;
  rep.u_x0 = u(x0);
  rep.sup = u(Point(dim, 0.0));
  const int radial = dim == 2 ? 64 : 32;
  const auto dirs = sphere_directions(dim, dim == 2 ? 256 : 512);
  for (int i = 1; i <= radial; ++i) {
    const double r = static_cast<double>(i) / radial;
    for (const auto& d : dirs) rep.sup = std::max(rep.sup, u(r * d));
  }
  const auto w = wos_harmonic_measure(x0, E, walks, seed);
  rep.omega = w.p;
  rep.omega_se = w.standard_error;
  rep.predicted = rep.sup * (1 - rep.omega);
  const double noise = rep.sup * rep.omega_se;
  rep.gap_in_se = noise > 0 ? (rep.predicted - rep.u_x0) / noise : 0.0;
  rep.chain_holds = rep.u_x0 <= rep.predicted + 3 * noise + 1e-12 &&
                    rep.predicted <= rep.sup * std::exp(-rep.omega) + 1e-12;
  return rep;
}

}  // namespace oscillab
