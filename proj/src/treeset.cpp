#include "oscillab/treeset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "oscillab/error.hpp"
#include "oscillab/parallel.hpp"

namespace oscillab {

double support_tail(double width, int dim) {
  return 2.0 * width * dim * std::numbers::ln2 / (std::numbers::pi * std::sqrt(dim - 1.0));
}

Point TubeSpec::direction() const {
  const Point v = b - a;
  return (1.0 / norm(v)) * v;
}

bool TubeSpec::contains(const Point& x, bool with_tail) const {
  return OrientedBox::of(*this, with_tail).contains(x);
}

OrientedBox OrientedBox::of(const TubeSpec& tube, bool with_tail) {
  const Frame fr = tube.frame();
  const double back = with_tail ? tube.tail : 0.0;
  const double len = tube.length();
  OrientedBox box;
  box.center = tube.a + (0.5 * (len - back)) * fr.axis(0);
  const int d = tube.a.dim();
  for (int i = 0; i < d; ++i) box.axes[i] = fr.axis(i);
  box.half[0] = 0.5 * (len + back);
  for (int i = 1; i < d; ++i) box.half[i] = 0.5 * tube.diameter;
  return box;
}

bool OrientedBox::contains(const Point& x) const {
  const Point rel = x - center;
  const int d = center.dim();
  for (int i = 0; i < d; ++i) {
    const double c = dot(rel, axes[i]);
    // Axial extent closed, transverse extent open as in the tube definition.
    if (i == 0 ? std::abs(c) > half[0] : std::abs(c) >= half[i]) return false;
  }
  return true;
}

namespace {

bool separated_on(const Point& n, const OrientedBox& ob, const Point& bc, const Point& bh) {
  const double nn = norm(n);
  if (nn < 1e-12) return false;
  const int d = ob.center.dim();
  double r_ob = 0, r_bb = 0;
  for (int i = 0; i < d; ++i) {
    r_ob += ob.half[i] * std::abs(dot(n, ob.axes[i]));
    r_bb += bh[i] * std::abs(n[i]);
  }
  return std::abs(dot(n, ob.center - bc)) >= r_ob + r_bb - 1e-12 * nn;
}

Point cross(const Point& a, const Point& b) {
  return Point{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

bool OrientedBox::overlaps(const Point& lo, const Point& hi) const {
  const int d = center.dim();
  Point bc(d), bh(d);
  for (int i = 0; i < d; ++i) {
    bc[i] = 0.5 * (lo[i] + hi[i]);
    bh[i] = 0.5 * (hi[i] - lo[i]);
  }
  for (int i = 0; i < d; ++i) {
    Point e(d, 0.0);
    e[i] = 1.0;
    if (separated_on(e, *this, bc, bh)) return false;
    if (separated_on(axes[i], *this, bc, bh)) return false;
  }
  if (d == 3) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Point e(3, 0.0);
        e[i] = 1.0;
        if (separated_on(cross(e, axes[j]), *this, bc, bh)) return false;
      }
  }
  return true;
}

bool OrientedBox::covers(const Point& lo, const Point& hi) const {
  const int d = center.dim();
  for (int mask = 0; mask < (1 << d); ++mask) {
    Point c(d);
    for (int i = 0; i < d; ++i) c[i] = (mask >> i & 1) ? hi[i] : lo[i];
    if (!contains(c)) return false;
  }
  return true;
}

void OrientedBox::bounds(Point& lo, Point& hi) const {
  const int d = center.dim();
  lo = center;
  hi = center;
  for (int j = 0; j < d; ++j) {
    double r = 0;
    for (int i = 0; i < d; ++i) r += half[i] * std::abs(axes[i][j]);
    lo[j] -= r;
    hi[j] += r;
  }
}

ScaleChoice choose_s_k(const GrowthParameters& params, int k) {
  if (k < 1) throw Error(ErrorKind::ParameterRange, "choose_s_k needs k >= 1");
  const int d = params.dim;
  const double t = std::ldexp(1.0, k);
  const double log_ratio = params.f.log_value(t) - std::log(t);
  if (log_ratio < -1e-12)
    throw Error(ErrorKind::ParameterRange, "f(2^k) < 2^k at k = " + std::to_string(k));
  ScaleChoice c;
  c.lower = std::exp(log_ratio / (d - 1));
  c.upper = 4.0 * c.lower;
  for (int s = 1; s <= 62; ++s) {
    const double v = std::pow(static_cast<double>(s), 1.0 / (d - 1)) * std::ldexp(1.0, s);
    if (v >= c.lower * (1 - 1e-12) && v <= c.upper * (1 + 1e-12)) {
      if (s > k)
        throw Error(ErrorKind::ParameterRange, "s_k = " + std::to_string(s) + " exceeds k = " + std::to_string(k) +
                                                   " for sandwich [" + std::to_string(c.lower) + ", " +
                                                   std::to_string(c.upper) + "]");
      c.s = s;
      c.eps = std::ldexp(1.0, s - k);
      return c;
    }
    if (v > c.upper) break;
  }
  throw Error(ErrorKind::ParameterRange, "no integer s satisfies " + std::to_string(c.lower) +
                                             " <= s^{1/(d-1)} 2^s <= " + std::to_string(c.upper));
}

std::vector<TubeSpec> build_basic_subtree(const DyadicCube& cube, double leaf_width, int rank) {
  if (cube.order() != 1) throw Error(ErrorKind::InvalidParameter, "basic subtree needs an order-1 cube");
  if (!(leaf_width > 0) || leaf_width >= 1.0)
    throw Error(ErrorKind::InvalidParameter, "leaf diameter must lie in (0, 1)");
  const int d = cube.dim();
  std::vector<TubeSpec> out;
  for (const auto& child : cube.children(0)) {
    TubeSpec t;
    t.a = child.center();
    t.b = cube.center();
    t.diameter = leaf_width;
    t.rank = rank;
    t.generation = 1;
    t.role = TubeRole::Leaf;
    t.branch = leaf_width > 2 * kLeafWidth;
    t.tail = support_tail(leaf_width, d);
    out.push_back(t);
  }
  return out;
}

namespace {

// Linear slot of a dyadic cube of the given order inside [0, 2^top)^d.
std::size_t dyadic_slot(const IPoint& corner, int order, int top) {
  const std::int64_t per_axis = std::int64_t{1} << (top - order);
  std::size_t idx = 0;
  for (int i = 0; i < corner.dim(); ++i) idx = idx * per_axis + static_cast<std::size_t>(corner[i] >> order);
  return idx;
}

TubeSpec make_tube(const Point& a, const Point& b, double width, int rank, int generation, TubeRole role, int dim) {
  TubeSpec t;
  t.a = a;
  t.b = b;
  t.diameter = width;
  t.rank = rank;
  t.generation = generation;
  t.role = role;
  t.branch = width > 2 * kLeafWidth;
  t.tail = support_tail(width, dim);
  return t;
}

}  // namespace

TreeSpec build_outer_subtree(const GrowthParameters& params, int k) {
  const int d = params.dim;
  TreeSpec tree;
  tree.dim = d;
  tree.rank = k + 1;
  if (k == 0) {
    tree.tubes = build_basic_subtree(DyadicCube(1, IPoint(d, 0)), kLeafWidth, 1);
    return tree;
  }
  const ScaleChoice sc = choose_s_k(params, k);
  tree.scales[k] = sc;
  const int top = k + 1;
  std::vector<int> prev_index;  // tube index per dyadic slot of the previous order
  const DyadicCube whole(top, IPoint(d, 0));
  for (int g = 1; g <= k + 1; ++g) {
    const int order = top - g;
    const bool leaf = order == 0;
    const double width = leaf ? kLeafWidth : (g <= sc.s ? std::ldexp(sc.eps, top - g) : kLeafWidth);
    const TubeRole role = leaf ? TubeRole::Leaf : (g <= sc.s ? TubeRole::Wide : TubeRole::Thin);
    const auto cubes = whole.children(order);
    std::vector<int> index(cubes.size(), -1);
    for (const auto& c : cubes) {
      IPoint pc = c.corner();
      const std::int64_t pe = std::int64_t{1} << (order + 1);
      for (auto& x : pc) x = floor_div(x, pe) * pe;
      const DyadicCube parent(order + 1, pc);
      TubeSpec t = make_tube(c.center(), parent.center(), width, top, g, role, d);
      if (g > 1) t.parent = prev_index[dyadic_slot(pc, order + 1, top)];
      index[dyadic_slot(c.corner(), order, top)] = static_cast<int>(tree.tubes.size());
      tree.tubes.push_back(t);
    }
    prev_index = std::move(index);
  }
  return tree;
}

TreeSpec build_tree(const GrowthParameters& params, int k) {
  const int d = params.dim;
  if (k < 0) throw Error(ErrorKind::InvalidParameter, "tree rank must be non-negative");
  if (k == 0) {
    TreeSpec t;
    t.dim = d;
    t.rank = 1;
    t.tubes = build_basic_subtree(DyadicCube(1, IPoint(d, 0)), kLeafWidth, 1);
    t.inner_prefix = t.tubes.size();
    return t;
  }
  TreeSpec tree = build_tree(params, k - 1);
  const TreeSpec outer = build_outer_subtree(params, k - 1);
  for (auto& [kk, sc] : outer.scales) tree.scales[kk] = sc;
  const std::vector<int> inner_roots = tree.roots();
  const double width = std::ldexp(params.relative_handle_width(k), k);
  tree.handle_widths[k] = width;
  const double big = std::ldexp(1.0, k), half = std::ldexp(1.0, k - 1);
  const Point hub(d, big);

  const int inner_idx = static_cast<int>(tree.tubes.size());
  {
    TubeSpec h = make_tube(Point(d, half), hub, width, k + 1, 0, TubeRole::Handle, d);
    h.inner = true;
    tree.tubes.push_back(h);
  }
  for (int r : inner_roots) tree.tubes[r].parent = inner_idx;
  tree.inner_prefix = tree.tubes.size();
  tree.inner_handle = inner_idx;

  // Copies go into every order-k subcube other than the inner one (all signs -1).
  std::vector<IPoint> sigmas;
  for (const auto& m : OrthantMap::all(d)) {
    bool all_neg = true;
    for (auto s : m.signs()) all_neg = all_neg && s < 0;
    if (!all_neg) sigmas.push_back(m.signs());
  }
  std::vector<int> handle_idx;
  for (const auto& sg : sigmas) {
    Point center = hub;
    for (int i = 0; i < d; ++i) center[i] += half * static_cast<double>(sg[i]);
    handle_idx.push_back(static_cast<int>(tree.tubes.size()));
    tree.tubes.push_back(make_tube(center, hub, width, k + 1, 0, TubeRole::Handle, d));
  }
  for (std::size_t c = 0; c < sigmas.size(); ++c) {
    const IPoint& sg = sigmas[c];
    auto place = [&](const Point& y) {
      Point x(d);
      for (int i = 0; i < d; ++i) x[i] = big * (1.0 + static_cast<double>(sg[i])) - static_cast<double>(sg[i]) * y[i];
      return x;
    };
    const int base = static_cast<int>(tree.tubes.size());
    for (const auto& t : outer.tubes) {
      TubeSpec m = t;
      m.a = place(t.a);
      m.b = place(t.b);
      m.parent = t.parent < 0 ? handle_idx[c] : base + t.parent;
      tree.tubes.push_back(m);
    }
  }
  tree.rank = k + 1;
  return tree;
}

std::vector<int> TreeSpec::roots() const {
  std::vector<int> r;
  for (std::size_t i = 0; i < tubes.size(); ++i)
    if (tubes[i].parent < 0) r.push_back(static_cast<int>(i));
  return r;
}

std::size_t TreeSpec::branch_count() const {
  return static_cast<std::size_t>(std::count_if(tubes.begin(), tubes.end(), [](const TubeSpec& t) { return t.branch; }));
}

TubeIndex::TubeIndex(const std::vector<TubeSpec>& tubes, std::size_t count, const IntBox& box, bool with_tail)
    : box_(box) {
  const int d = box.dim();
  const std::int64_t cells = box.volume();
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(cells));
  for (std::size_t t = 0; t < count; ++t) {
    const OrientedBox ob = OrientedBox::of(tubes[t], with_tail);
    Point lo, hi;
    ob.bounds(lo, hi);
    IPoint clo(d), chi(d);
    bool empty = false;
    for (int i = 0; i < d; ++i) {
      clo[i] = std::max<std::int64_t>(box.lo[i], static_cast<std::int64_t>(std::floor(lo[i])));
      chi[i] = std::min<std::int64_t>(box.hi[i], static_cast<std::int64_t>(std::floor(hi[i])) + 1);
      if (chi[i] <= clo[i]) empty = true;
    }
    if (empty) continue;
    for (const auto& c : enumerate_basic_cubes(IntBox{clo, chi})) {
      Point clo_p = to_point(c.corner), chi_p = clo_p;
      for (auto& x : chi_p) x += 1.0;
      if (ob.overlaps(clo_p, chi_p)) buckets[static_cast<std::size_t>(slot(c.corner))].push_back(static_cast<int>(t));
    }
  }
  offsets_.assign(static_cast<std::size_t>(cells) + 1, 0);
  for (std::int64_t i = 0; i < cells; ++i) offsets_[i + 1] = offsets_[i] + static_cast<std::int64_t>(buckets[i].size());
  items_.reserve(static_cast<std::size_t>(offsets_.back()));
  for (auto& b : buckets) items_.insert(items_.end(), b.begin(), b.end());
}

std::int64_t TubeIndex::slot(const IPoint& corner) const {
  std::int64_t idx = 0;
  for (int i = 0; i < box_.dim(); ++i) idx = idx * (box_.hi[i] - box_.lo[i]) + (corner[i] - box_.lo[i]);
  return idx;
}

std::span<const int> TubeIndex::at_cell(const IPoint& corner) const {
  for (int i = 0; i < box_.dim(); ++i)
    if (corner[i] < box_.lo[i] || corner[i] >= box_.hi[i]) return {};
  const auto s = slot(corner);
  return std::span<const int>(items_.data() + offsets_[s], static_cast<std::size_t>(offsets_[s + 1] - offsets_[s]));
}

std::span<const int> TubeIndex::at(const Point& x) const {
  IPoint c(x.dim());
  for (int i = 0; i < x.dim(); ++i) c[i] = static_cast<std::int64_t>(std::floor(x[i]));
  return at_cell(c);
}

double sparse_threshold(int dim, double eps1) { return std::sqrt(static_cast<double>(dim)) * std::pow(2 * eps1, dim - 1); }

namespace {

struct Bracket {
  double inside = 0;     // volume certainly covered
  double undecided = 0;  // volume not yet classified
  double estimate = 0;   // midpoint-rule guess for undecided volume at the depth cap
};

void refine(const std::vector<OrientedBox>& boxes, const Point& lo, const Point& hi, int depth, int cap,
            Bracket& acc, std::vector<std::pair<Point, Point>>& pending) {
  const int d = lo.dim();
  double vol = 1;
  for (int i = 0; i < d; ++i) vol *= hi[i] - lo[i];
  bool any = false;
  for (const auto& b : boxes) {
    if (!b.overlaps(lo, hi)) continue;
    any = true;
    if (b.covers(lo, hi)) {
      acc.inside += vol;
      return;
    }
  }
  if (!any) return;
  if (depth >= cap) {
    pending.emplace_back(lo, hi);
    acc.undecided += vol;
    Point mid(d);
    for (int i = 0; i < d; ++i) mid[i] = 0.5 * (lo[i] + hi[i]);
    for (const auto& b : boxes)
      if (b.contains(mid)) {
        acc.estimate += vol;
        break;
      }
    return;
  }
  for (int mask = 0; mask < (1 << d); ++mask) {
    Point clo(d), chi(d);
    for (int i = 0; i < d; ++i) {
      const double m = 0.5 * (lo[i] + hi[i]);
      clo[i] = (mask >> i & 1) ? m : lo[i];
      chi[i] = (mask >> i & 1) ? hi[i] : m;
    }
    refine(boxes, clo, chi, depth + 1, cap, acc, pending);
  }
}

}  // namespace

SparseResult is_sparse(const LatticeCube& cube, const TreeSpec& tree, std::span<const int> candidates) {
  const int d = cube.dim();
  SparseResult res;
  res.threshold = sparse_threshold(d, tree.eps1);
  std::vector<OrientedBox> boxes;
  const Point lo = to_point(cube.corner);
  Point hi = lo;
  for (auto& x : hi) x += 1.0;
  for (int t : candidates) {
    OrientedBox ob = OrientedBox::of(tree.tubes[t], false);
    if (ob.overlaps(lo, hi)) boxes.push_back(ob);
  }
  if (boxes.empty()) {
    res.sparse = true;
    return res;
  }
  // Breadth-first deepening so that easy cubes stop early.
  const int max_depth = d == 2 ? 8 : 6;
  Bracket acc;
  std::vector<std::pair<Point, Point>> pending;
  for (int cap = 2; cap <= max_depth; cap += 2) {
    acc = Bracket{};
    pending.clear();
    refine(boxes, lo, hi, 0, cap, acc, pending);
    if (acc.inside >= res.threshold) {
      res.covered = acc.inside + acc.estimate;
      res.sparse = false;
      return res;
    }
    if (acc.inside + acc.undecided < res.threshold) {
      res.covered = acc.inside + acc.estimate;
      res.sparse = true;
      return res;
    }
  }
  // Monte Carlo over the undecided cells, fixed seed per cube.
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  for (auto c : cube.corner) seed = seed * 1000003ull ^ static_cast<std::uint64_t>(c + (1 << 20));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int samples = 100000;
  int hits = 0;
  for (int s = 0; s < samples; ++s) {
    Point x(d);
    for (int i = 0; i < d; ++i) x[i] = lo[i] + unif(rng);
    for (const auto& b : boxes)
      if (b.contains(x)) {
        ++hits;
        break;
      }
  }
  const double p = static_cast<double>(hits) / samples;
  const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / samples);
  res.monte_carlo = true;
  res.covered = p;
  res.sparse = p < res.threshold;
  if (std::abs(p - res.threshold) < 3 * se) res.certainty = Certainty::Uncertain;
  return res;
}

SparseResult is_sparse(const LatticeCube& cube, const TreeSpec& tree) {
  std::vector<int> all(tree.tubes.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return is_sparse(cube, tree, all);
}

std::vector<char> branch_cube_mask(const TreeSpec& tree, const IntBox& box, bool with_tail) {
  const auto cubes = enumerate_basic_cubes(box);
  std::vector<char> mask(cubes.size(), 0);
  const int d = box.dim();
  auto slot = [&](const IPoint& c) {
    std::int64_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * (box.hi[i] - box.lo[i]) + (c[i] - box.lo[i]);
    return idx;
  };
  for (const auto& t : tree.tubes) {
    if (!t.branch) continue;
    const OrientedBox ob = OrientedBox::of(t, with_tail);
    Point lo, hi;
    ob.bounds(lo, hi);
    IPoint clo(d), chi(d);
    bool empty = false;
    for (int i = 0; i < d; ++i) {
      clo[i] = std::max<std::int64_t>(box.lo[i], static_cast<std::int64_t>(std::floor(lo[i])));
      chi[i] = std::min<std::int64_t>(box.hi[i], static_cast<std::int64_t>(std::floor(hi[i])) + 1);
      if (chi[i] <= clo[i]) empty = true;
    }
    if (empty) continue;
    for (const auto& c : enumerate_basic_cubes(IntBox{clo, chi})) {
      Point cl = to_point(c.corner), ch = cl;
      for (auto& x : ch) x += 1.0;
      if (ob.overlaps(cl, ch)) mask[static_cast<std::size_t>(slot(c.corner))] = 1;
    }
  }
  return mask;
}

CensusResult count_nonsparse(const TreeSpec& tree, const GrowthParameters& params, int k) {
  const int d = params.dim;
  const IntBox box{IPoint(d, 0), IPoint(d, std::int64_t{1} << k)};
  const auto cubes = enumerate_basic_cubes(box);
  const TubeIndex index(tree.tubes, tree.tubes.size(), box, false);
  std::vector<SparseResult> results(cubes.size());
  parallel_for(cubes.size(), [&](std::size_t i) { results[i] = is_sparse(cubes[i], tree, index.at_cell(cubes[i].corner)); });
  const auto branch = branch_cube_mask(tree, box, true);
  CensusResult c;
  c.cubes = static_cast<std::int64_t>(cubes.size());
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (!results[i].sparse) ++c.nonsparse;
    if (results[i].certainty == Certainty::Uncertain) ++c.uncertain;
    if (branch[i]) ++c.branch_cubes;
    if (index.at_cell(cubes[i].corner).empty()) ++c.untouched;
  }
  c.f_value = params.f(std::ldexp(1.0, k));
  c.ratio = static_cast<double>(c.nonsparse) / c.f_value;
  return c;
}

CensusResult count_nonsparse(const GrowthParameters& params, int k) {
  return count_nonsparse(build_tree(params, k), params, k);
}

}  // namespace oscillab
