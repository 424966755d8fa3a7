#include "oscillab/subfun.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "oscillab/error.hpp"

namespace oscillab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;
// Extra room, in log units, added whenever a coefficient is lifted to make a dominance
// inequality hold; keeps sampled checks away from round-off.
constexpr double kLiftMargin = 0.05;

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// log(e^lt - 1) for lt > 0.
double log_minus_one(double lt) {
  if (!(lt > 0)) return kNegInf;
  return lt + std::log(-std::expm1(-lt));
}

}  // namespace

// ---- base formulas -------------------------------------------------------------

double log_cosh(double y) {
  const double a = std::abs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - kLn2;
}

double log_W(const Point& x) {
  const int d = x.dim();
  if (std::abs(x[0]) > 0.25) return kNegInf;
  const double c = std::cos(2.0 * kPi * x[0]);
  if (!(c > 0)) return kNegInf;
  double s = std::log(c);
  const double k = 2.0 * kPi / std::sqrt(d - 1.0);
  for (int j = 1; j < d; ++j) s += log_cosh(k * x[j]);
  return s;
}

double log_T(double eps, const Point& x) {
  const int d = x.dim();
  double s = log_cosh(kPi * std::sqrt(d - 1.0) * x[0] / eps);
  for (int j = 1; j < d; ++j) {
    if (std::abs(x[j]) >= 0.5 * eps) return kNegInf;
    const double c = std::cos(kPi * x[j] / eps);
    if (!(c > 0)) return kNegInf;
    s += std::log(c);
  }
  return s;
}

double log_L(double eps, const Point& x) {
  if (x[0] < 0) return kNegInf;
  return log_minus_one(log_T(eps, x));
}

double eval_W(const Point& x) {
  const double l = log_W(x);
  return l == kNegInf ? 0.0 : std::exp(l);
}

double eval_T(double eps, const Point& x) {
  const double l = log_T(eps, x);
  return l == kNegInf ? 0.0 : std::exp(l);
}

double eval_L(double eps, const Point& x) {
  const double l = log_L(eps, x);
  return l == kNegInf ? 0.0 : std::exp(l);
}

double g_threshold(double eps, int dim) { return eps * dim * kLn2 / (kPi * std::sqrt(dim - 1.0)); }

bool in_region_G(double eps, const Point& x) {
  const int d = x.dim();
  for (int j = 1; j < d; ++j)
    if (std::abs(x[j]) > eps / 3.0) return false;
  return std::abs(x[0]) >= g_threshold(eps, d);
}

bool in_upper_G(double eps, const Point& x) { return x[0] >= 0 && in_region_G(eps, x); }

double log_inf_L_on_G(int dim) {
  // corner x_1 = threshold, |x_j| = eps/3: cosh(d log 2) * cos(pi/3)^{d-1} - 1
  return std::log(std::cosh(dim * kLn2) * std::ldexp(1.0, 1 - dim) - 1.0);
}

// ---- guards ---------------------------------------------------------------------

bool GuardConstraint::contains(const Point& x) const {
  if (kind == Kind::HalfSpace) return dot(x - frame.origin(), frame.axis(0)) < 0;
  return !in_upper_G(width, frame.to_local(x));
}

GuardConstraint GuardConstraint::mapped(const Frame& outer) const {
  GuardConstraint g = *this;
  g.frame = outer.compose(frame);
  return g;
}

bool GuardRegion::contains(const Point& x) const {
  return std::all_of(constraints.begin(), constraints.end(), [&](const auto& c) { return c.contains(x); });
}

// ---- symbolic node -------------------------------------------------------------

struct FunctionNode::Data {
  NodeKind kind;
  int dim = 2;
  double eps = 0;
  double log_factor = 0;
  Frame motion;
  GuardRegion guard;
  std::vector<FunctionNode> children;
  std::size_t count = 1;
};

namespace {
void check_dim(int d) {
  if (d < 2 || d > kMaxDim) throw Error(ErrorKind::InvalidParameter, "dimension must be 2 or 3");
}
}  // namespace

FunctionNode FunctionNode::base_w(int dim) {
  check_dim(dim);
  auto d = std::make_shared<Data>();
  d->kind = NodeKind::BaseW;
  d->dim = dim;
  return FunctionNode(d);
}

FunctionNode FunctionNode::base_t(int dim, double eps) {
  check_dim(dim);
  if (!(eps > 0)) throw Error(ErrorKind::InvalidParameter, "tube diameter must be positive");
  auto d = std::make_shared<Data>();
  d->kind = NodeKind::BaseT;
  d->dim = dim;
  d->eps = eps;
  return FunctionNode(d);
}

FunctionNode FunctionNode::base_l(int dim, double eps) {
  FunctionNode n = base_t(dim, eps);
  const_cast<Data&>(*n.d_).kind = NodeKind::BaseL;
  return n;
}

FunctionNode FunctionNode::isometry(FunctionNode child, Frame motion) {
  auto d = std::make_shared<Data>();
  d->kind = NodeKind::Isometry;
  d->dim = child.dim();
  d->motion = std::move(motion);
  d->count = 1 + child.node_count();
  d->children.push_back(std::move(child));
  return FunctionNode(d);
}

FunctionNode FunctionNode::scale(FunctionNode child, double log_factor) {
  if (!std::isfinite(log_factor)) throw Error(ErrorKind::InvalidParameter, "scale factor must be positive and finite");
  auto d = std::make_shared<Data>();
  d->kind = NodeKind::Scale;
  d->dim = child.dim();
  d->log_factor = log_factor;
  d->count = 1 + child.node_count();
  d->children.push_back(std::move(child));
  return FunctionNode(d);
}

FunctionNode FunctionNode::guarded_max(FunctionNode a, FunctionNode b, GuardRegion guard) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::InvalidParameter, "dimension mismatch in max");
  auto d = std::make_shared<Data>();
  d->kind = NodeKind::GuardedMax;
  d->dim = a.dim();
  d->guard = std::move(guard);
  d->count = 1 + a.node_count() + b.node_count();
  d->children = {std::move(a), std::move(b)};
  return FunctionNode(d);
}

FunctionNode FunctionNode::sum(std::vector<FunctionNode> children) {
  if (children.empty()) throw Error(ErrorKind::InvalidParameter, "empty sum");
  auto d = std::make_shared<Data>();
  d->kind = NodeKind::Sum;
  d->dim = children.front().dim();
  for (const auto& c : children) {
    if (c.dim() != d->dim) throw Error(ErrorKind::InvalidParameter, "dimension mismatch in sum");
    d->count += c.node_count();
  }
  d->children = std::move(children);
  return FunctionNode(d);
}

NodeKind FunctionNode::kind() const { return d_->kind; }
int FunctionNode::dim() const { return d_->dim; }
double FunctionNode::eps() const { return d_->eps; }
double FunctionNode::log_factor() const { return d_->log_factor; }
const Frame& FunctionNode::motion() const { return d_->motion; }
const GuardRegion& FunctionNode::guard() const { return d_->guard; }
std::span<const FunctionNode> FunctionNode::children() const { return d_->children; }
std::size_t FunctionNode::node_count() const { return d_->count; }

double FunctionNode::log_eval(const Point& x) const {
  switch (d_->kind) {
    case NodeKind::BaseW: return log_W(x);
    case NodeKind::BaseT: return log_T(d_->eps, x);
    case NodeKind::BaseL: return log_L(d_->eps, x);
    case NodeKind::Isometry: return d_->children[0].log_eval(d_->motion.to_local(x));
    case NodeKind::Scale: {
      const double v = d_->children[0].log_eval(x);
      return v == kNegInf ? v : v + d_->log_factor;
    }
    case NodeKind::GuardedMax: {
      const double a = d_->children[0].log_eval(x);
      if (!d_->guard.contains(x)) return a;
      return std::max(a, d_->children[1].log_eval(x));
    }
    case NodeKind::Sum: {
      double s = kNegInf;
      for (const auto& c : d_->children) s = log_sum_exp(s, c.log_eval(x));
      return s;
    }
  }
  return kNegInf;
}

double FunctionNode::eval(const Point& x) const {
  const double l = log_eval(x);
  return l == kNegInf ? 0.0 : std::exp(l);
}

// ---- compiled evaluator ----------------------------------------------------------

CompiledFunction::CompiledFunction(const FunctionNode& node, const Point& domain_lo, const Point& domain_hi)
    : dim_(node.dim()), lo_(domain_lo), hi_(domain_hi), cell_lo_(node.dim()), cell_hi_(node.dim()) {
  for (int i = 0; i < dim_; ++i) {
    if (!(hi_[i] > lo_[i])) throw Error(ErrorKind::EmptyDomain, "evaluation box is empty");
    cell_lo_[i] = static_cast<std::int64_t>(std::floor(lo_[i]));
    cell_hi_[i] = static_cast<std::int64_t>(std::ceil(hi_[i]));
  }
  // Sum nodes (possibly under isometries or scalings) split into groups.
  std::function<void(const FunctionNode&, const Frame&, double)> top = [&](const FunctionNode& n, const Frame& m,
                                                                          double c) {
    switch (n.kind()) {
      case NodeKind::Sum:
        for (const auto& ch : n.children()) top(ch, m, c);
        return;
      case NodeKind::Isometry: top(n.children()[0], m.compose(n.motion()), c); return;
      case NodeKind::Scale: top(n.children()[0], m, c + n.log_factor()); return;
      default: {
        Group g;
        compile(n, m, c, -1, g);
        groups_.push_back(std::move(g));
      }
    }
  };
  top(node, Frame(dim_), 0.0);
  for (auto& g : groups_) build_index(g);
}

void CompiledFunction::compile(const FunctionNode& n, const Frame& motion, double log_coef, int guard, Group& g) {
  switch (n.kind()) {
    case NodeKind::BaseW:
    case NodeKind::BaseT:
    case NodeKind::BaseL: {
      Piece p{n.kind(), motion, n.eps(), log_coef, guard, std::numeric_limits<double>::infinity()};
      for (int q = guard; q >= 0; q = g.guards[q].parent) {
        const auto& c = g.guards[q].constraint;
        if (c.kind != GuardConstraint::Kind::HalfSpace) continue;
        if (dot(c.frame.axis(0), motion.axis(0)) < 1 - 1e-9) continue;
        p.axial_max = std::min(p.axial_max, dot(c.frame.origin() - motion.origin(), motion.axis(0)));
      }
      g.pieces.push_back(p);
      return;
    }
    case NodeKind::Isometry: compile(n.children()[0], motion.compose(n.motion()), log_coef, guard, g); return;
    case NodeKind::Scale: compile(n.children()[0], motion, log_coef + n.log_factor(), guard, g); return;
    case NodeKind::GuardedMax: {
      compile(n.children()[0], motion, log_coef, guard, g);
      int inner = guard;
      for (const auto& c : n.guard().constraints) {
        g.guards.push_back({c.mapped(motion), inner});
        inner = static_cast<int>(g.guards.size()) - 1;
      }
      compile(n.children()[1], motion, log_coef, inner, g);
      return;
    }
    case NodeKind::Sum:
      throw Error(ErrorKind::Construction, "a sum may not sit below a guarded max");
  }
}

void CompiledFunction::build_index(Group& g) {
  IntBox box{cell_lo_, cell_hi_};
  const std::int64_t cells = box.volume();
  double reach = 0;
  for (int i = 0; i < dim_; ++i) reach += (hi_[i] - lo_[i] + 2) * (hi_[i] - lo_[i] + 2);
  reach = 2 * std::sqrt(reach) + 4;
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(cells));
  for (std::size_t pi = 0; pi < g.pieces.size(); ++pi) {
    const Piece& p = g.pieces[pi];
    OrientedBox ob;
    double ax_lo = -reach, ax_hi = reach, trans = reach;
    if (p.kind == NodeKind::BaseW) {
      ax_lo = -0.25, ax_hi = 0.25;
    } else {
      trans = 0.5 * p.eps;
      if (p.kind == NodeKind::BaseL) ax_lo = 0;
      ax_hi = std::min(ax_hi, p.axial_max);
      // Distance from the origin to the box bounds how far the axis can matter.
      const double far = norm(p.frame.origin() - 0.5 * (lo_ + hi_)) + reach;
      ax_hi = std::min(ax_hi, far);
      ax_lo = std::max(ax_lo, -far);
    }
    if (ax_hi < ax_lo) continue;
    ob.center = p.frame.to_world(Point(dim_, 0.0)) + (0.5 * (ax_lo + ax_hi)) * p.frame.axis(0);
    for (int i = 0; i < dim_; ++i) ob.axes[i] = p.frame.axis(i);
    ob.half[0] = 0.5 * (ax_hi - ax_lo);
    for (int i = 1; i < dim_; ++i) ob.half[i] = trans;
    Point blo, bhi;
    ob.bounds(blo, bhi);
    IPoint clo(dim_), chi(dim_);
    bool empty = false;
    for (int i = 0; i < dim_; ++i) {
      clo[i] = std::max<std::int64_t>(cell_lo_[i], static_cast<std::int64_t>(std::floor(blo[i])));
      chi[i] = std::min<std::int64_t>(cell_hi_[i], static_cast<std::int64_t>(std::floor(bhi[i])) + 1);
      if (chi[i] <= clo[i]) empty = true;
    }
    if (empty) continue;
    IPoint c = clo;
    while (true) {
      Point lo(dim_), hi(dim_);
      for (int i = 0; i < dim_; ++i) lo[i] = static_cast<double>(c[i]), hi[i] = lo[i] + 1;
      if (ob.overlaps(lo, hi)) {
        std::int64_t slot = 0;
        for (int i = 0; i < dim_; ++i) slot = slot * (cell_hi_[i] - cell_lo_[i]) + (c[i] - cell_lo_[i]);
        buckets[static_cast<std::size_t>(slot)].push_back(static_cast<int>(pi));
      }
      int i = dim_ - 1;
      while (i >= 0 && ++c[i] == chi[i]) c[i] = clo[i], --i;
      if (i < 0) break;
    }
  }
  g.offsets.assign(static_cast<std::size_t>(cells) + 1, 0);
  for (std::size_t s = 0; s < buckets.size(); ++s)
    g.offsets[s + 1] = g.offsets[s] + static_cast<std::int64_t>(buckets[s].size());
  g.items.reserve(static_cast<std::size_t>(g.offsets.back()));
  for (auto& b : buckets) g.items.insert(g.items.end(), b.begin(), b.end());
}

std::span<const int> CompiledFunction::candidates(const Group& g, const Point& x) const {
  std::int64_t slot = 0;
  for (int i = 0; i < dim_; ++i) {
    const auto c = static_cast<std::int64_t>(std::floor(x[i]));
    if (c < cell_lo_[i] || c >= cell_hi_[i]) return {};
    slot = slot * (cell_hi_[i] - cell_lo_[i]) + (c - cell_lo_[i]);
  }
  const auto b = static_cast<std::size_t>(g.offsets[slot]), e = static_cast<std::size_t>(g.offsets[slot + 1]);
  return std::span<const int>(g.items.data() + b, e - b);
}

double CompiledFunction::piece_log(const Piece& p, const Point& x) {
  const Point y = p.frame.to_local(x);
  if (y[0] > p.axial_max) return kNegInf;
  double v = kNegInf;
  switch (p.kind) {
    case NodeKind::BaseW: v = log_W(y); break;
    case NodeKind::BaseT: v = log_T(p.eps, y); break;
    default: v = log_L(p.eps, y); break;
  }
  return v == kNegInf ? v : v + p.log_coef;
}

bool CompiledFunction::alive(const Group& g, int guard, const Point& x) const {
  for (int q = guard; q >= 0; q = g.guards[q].parent)
    if (!g.guards[q].constraint.contains(x)) return false;
  return true;
}

double CompiledFunction::group_log_value(const Group& g, const Point& x, bool stop_at_positive) const {
  bool inside = true;
  for (int i = 0; i < dim_; ++i) inside = inside && x[i] >= cell_lo_[i] && x[i] < cell_hi_[i];
  double best = kNegInf;
  auto visit = [&](int pi) {
    const Piece& p = g.pieces[pi];
    const double v = piece_log(p, x);
    if (v > best && alive(g, p.guard, x)) best = v;
  };
  if (inside) {
    for (int pi : candidates(g, x)) {
      visit(pi);
      if (stop_at_positive && best > kNegInf) break;
    }
  } else {
    for (std::size_t pi = 0; pi < g.pieces.size(); ++pi) visit(static_cast<int>(pi));
  }
  return best;
}

double CompiledFunction::log_value(const Point& x) const {
  double s = kNegInf;
  for (const auto& g : groups_) s = log_sum_exp(s, group_log_value(g, x, false));
  return s;
}

bool CompiledFunction::vanishes(const Point& x) const {
  for (const auto& g : groups_)
    if (group_log_value(g, x, true) > kNegInf) return false;
  return true;
}

double CompiledFunction::log_gradient_bound(const Point& x, double radius) const {
  // |grad e^c T| <= e^c cosh(a (|y_1| + r)) sqrt(a^2 + (d-1)(pi/eps)^2), summed over groups.
  double total = kNegInf;
  for (const auto& g : groups_) {
    double best = kNegInf;
    // Pieces can reach the ball from a neighbouring cell.
    const int span = static_cast<int>(std::ceil(radius));
    IPoint off(dim_, -span);
    std::vector<int> seen;
    while (true) {
      Point q = x;
      for (int i = 0; i < dim_; ++i) q[i] += static_cast<double>(off[i]);
      for (int pi : candidates(g, q)) {
        const Piece& p = g.pieces[pi];
        const Point y = p.frame.to_local(x);
        double a, rest;
        if (p.kind == NodeKind::BaseW) {
          a = 2 * kPi / std::sqrt(dim_ - 1.0);
          // cos factor bounded by 1; transverse factors grow like cosh.
          double s = 0;
          for (int j = 1; j < dim_; ++j) s += log_cosh(a * (std::abs(y[j]) + radius));
          rest = std::log(2 * kPi) + 0.5 * std::log(1.0 + (dim_ - 1.0));
          best = std::max(best, p.log_coef + s + rest);
          continue;
        }
        a = kPi * std::sqrt(dim_ - 1.0) / p.eps;
        rest = 0.5 * std::log(a * a + (dim_ - 1) * (kPi / p.eps) * (kPi / p.eps));
        double reach = std::abs(y[0]) + radius;
        if (std::isfinite(p.axial_max)) reach = std::min(reach, std::abs(p.axial_max) + radius);
        best = std::max(best, p.log_coef + log_cosh(a * reach) + rest);
      }
      int i = dim_ - 1;
      while (i >= 0 && ++off[i] > span) off[i] = -span, --i;
      if (i < 0) break;
    }
    total = log_sum_exp(total, best);
  }
  return total;
}

std::vector<Point> CompiledFunction::axis_samples(const Point& lo, const Point& hi, double step) const {
  std::vector<Point> out;
  Point mid = 0.5 * (lo + hi);
  for (const auto& g : groups_) {
    for (int pi : candidates(g, mid)) {
      const Piece& p = g.pieces[pi];
      if (p.kind == NodeKind::BaseW) continue;
      const Point y0 = p.frame.to_local(mid);
      const double half = norm(hi - lo);
      double t0 = y0[0] - half, t1 = y0[0] + half;
      if (p.kind == NodeKind::BaseL) t0 = std::max(t0, 0.0);
      t1 = std::min(t1, p.axial_max);
      for (double t = t0; t <= t1; t += step) {
        const Point x = p.frame.origin() + t * p.frame.axis(0);
        bool in = true;
        for (int i = 0; i < dim_; ++i) in = in && x[i] >= lo[i] && x[i] < hi[i];
        if (in) out.push_back(x);
      }
    }
  }
  return out;
}

std::size_t CompiledFunction::piece_count() const {
  std::size_t n = 0;
  for (const auto& g : groups_) n += g.pieces.size();
  return n;
}

// ---- schedules -----------------------------------------------------------------

double tube_log_sup(const TubeSpec& tube, int dim) {
  const double a = kPi * std::sqrt(dim - 1.0) / tube.diameter;
  return log_minus_one(log_cosh(a * (tube.length() + tube.tail)));
}

double log_threshold(const GrowthParameters& params, int k) {
  const int d = params.dim;
  if (k <= 0) return kPi * d / kLeafWidth;
  const double lf = params.f.log_value(std::ldexp(1.0, k));
  const double excess = lf - k * kLn2;
  if (!(excess > 0)) return kNegInf;
  const double e = 1.0 / (d - 1.0);
  return 4 * kPi * d * std::exp(k * d * e * kLn2 - e * lf) * std::pow(excess, d * e);
}

namespace {

// Unit-length model of a tube of the given order inside an outer subtree.
TubeSpec model_tube(double length, double width, int dim) {
  TubeSpec t;
  t.a = Point(dim, 0.0);
  t.b = Point(dim, 0.0);
  t.b[0] = length;
  t.diameter = width;
  t.tail = support_tail(width, dim);
  return t;
}

}  // namespace

GlueSchedule glue_schedule(const GrowthParameters& params, int k) {
  const int d = params.dim;
  if (k < 0) throw Error(ErrorKind::InvalidParameter, "schedule index must be non-negative");
  GlueSchedule g;
  g.k = k;
  if (k == 0) {
    g.s = 0;
    g.eps = kLeafWidth;
  } else {
    const ScaleChoice sc = choose_s_k(params, k);
    if (sc.s > k) throw Error(ErrorKind::ParameterRange, "s_k exceeds k");
    g.s = sc.s;
    g.eps = sc.eps;
  }
  g.log_inv_p1 = kPi * d / g.eps;
  g.log_M = log_threshold(params, k);
  const double kappa = -log_inf_L_on_G(d);
  const double sqd = std::sqrt(static_cast<double>(d));
  // Layers 0 (handle) .. k+1 (leaves). Layer h >= 1 has order k+1-h.
  const int layers = k + 2;
  std::vector<double> sup(layers, 0.0);  // coefficient + log sup, maxed over deeper layers
  g.layer_coef.assign(layers, 0.0);
  g.ratio.assign(k + 1, 0.0);
  g.base_ratio.assign(k + 1, 0.0);
  g.raised.assign(k + 1, 0);
  for (int h = layers - 1; h >= 1; --h) {
    const int order = k + 1 - h;
    const double width = (order == 0 || h > g.s) ? kLeafWidth : std::ldexp(g.eps, order);
    const double own = g.layer_coef[h] + tube_log_sup(model_tube(sqd * std::ldexp(1.0, order - 1), width, d), d);
    sup[h] = h + 1 < layers ? std::max(own, sup[h + 1]) : own;
    const int m = h - 1;  // ratio between layer m and layer h
    g.base_ratio[m] = h <= g.s ? kPi * d / g.eps : kPi * d * std::ldexp(1.0, k - m) / kLeafWidth;
    const double need = sup[h] + kappa + kLiftMargin - g.layer_coef[h];
    g.ratio[m] = std::max(g.base_ratio[m], need);
    g.raised[m] = need > g.base_ratio[m];
    g.layer_coef[m] = g.layer_coef[h] + g.ratio[m];
  }
  return g;
}

// ---- construction ----------------------------------------------------------------

namespace {

std::vector<std::vector<int>> child_lists(const std::vector<TubeSpec>& tubes, std::size_t count) {
  std::vector<std::vector<int>> ch(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int p = tubes[i].parent;
    if (p >= 0 && static_cast<std::size_t>(p) < count) ch[static_cast<std::size_t>(p)].push_back(static_cast<int>(i));
  }
  return ch;
}

// Per tube: max over its subtree of coefficient + log sup of the piece.
std::vector<double> subtree_sup(const std::vector<TubeSpec>& tubes, std::size_t count, const std::vector<double>& coef,
                                int dim) {
  const auto ch = child_lists(tubes, count);
  std::vector<double> m(count, kNegInf);
  std::vector<char> done(count, 0);
  std::vector<std::pair<int, bool>> stack;
  for (std::size_t r = 0; r < count; ++r) {
    if (done[r]) continue;
    stack.push_back({static_cast<int>(r), false});
    while (!stack.empty()) {
      auto [t, expanded] = stack.back();
      stack.pop_back();
      if (done[t]) continue;
      if (!expanded) {
        stack.push_back({t, true});
        for (int c : ch[t])
          if (!done[c]) stack.push_back({c, false});
        continue;
      }
      double v = coef[t] + tube_log_sup(tubes[t], dim);
      for (int c : ch[t]) v = std::max(v, m[c]);
      m[t] = v;
      done[t] = 1;
    }
  }
  return m;
}

}  // namespace

std::vector<double> tree_coefficients(const GrowthParameters& params, int k, std::vector<LevelInfo>* levels) {
  const int d = params.dim;
  const TreeSpec tree = build_tree(params, k);
  const double kappa = -log_inf_L_on_G(d);
  std::vector<double> coef(tree.tubes.size(), 0.0);
  if (levels) levels->clear();
  const std::size_t basic = static_cast<std::size_t>(1) << d;
  std::size_t pos = basic;  // T_1
  for (int j = 1; j <= k; ++j) {
    const GlueSchedule copy = glue_schedule(params, j - 1);
    // Roots of T_j are the tubes in [0, pos) without a parent inside the prefix.
    std::vector<TubeSpec> prefix(tree.tubes.begin(), tree.tubes.begin() + static_cast<std::ptrdiff_t>(pos));
    for (auto& t : prefix)
      if (t.parent >= static_cast<int>(pos)) t.parent = -1;
    const auto sup = subtree_sup(prefix, pos, coef, d);
    double need = kNegInf;
    for (std::size_t i = 0; i < pos; ++i)
      if (prefix[i].parent < 0) need = std::max(need, sup[i]);
    need += kappa + kLiftMargin;
    LevelInfo li;
    li.k = j;
    li.log_M_prev = log_threshold(params, j - 1);
    li.handle_coef = std::max(li.log_M_prev, need);
    li.raised = need > li.log_M_prev;
    li.copy_coef = copy.layer_coef[0];
    const std::size_t inner = pos;
    li.handle_width = tree.tubes[inner].diameter;
    coef[inner] = li.handle_coef;
    std::size_t i = inner + 1;
    const std::size_t copies = (static_cast<std::size_t>(1) << d) - 1;
    for (std::size_t c = 0; c < copies; ++c) coef[i++] = copy.layer_coef[0];
    const std::size_t outer_size = j == 1 ? basic : build_outer_subtree(params, j - 1).tubes.size();
    for (std::size_t c = 0; c < copies; ++c)
      for (std::size_t t = 0; t < outer_size; ++t, ++i)
        coef[i] = copy.layer_coef[static_cast<std::size_t>(tree.tubes[i].generation)];
    pos = i;
    if (levels) levels->push_back(li);
  }
  return coef;
}

FunctionNode node_from_tubes(const std::vector<TubeSpec>& tubes, std::size_t count, const std::vector<double>& coef,
                             int root) {
  if (count == 0 || root < 0 || static_cast<std::size_t>(root) >= count)
    throw Error(ErrorKind::Construction, "no root piece");
  const int d = tubes[static_cast<std::size_t>(root)].a.dim();
  const auto ch = child_lists(tubes, count);
  auto piece_frame = [&](const TubeSpec& t) {
    const Point u = t.direction();
    return Frame::aligned(t.a - t.tail * u, u);
  };
  std::function<FunctionNode(int)> build = [&](int t) {
    const TubeSpec& tube = tubes[static_cast<std::size_t>(t)];
    const Frame fr = piece_frame(tube);
    FunctionNode node = FunctionNode::isometry(FunctionNode::scale(FunctionNode::base_l(d, tube.diameter), coef[t]), fr);
    for (int c : ch[static_cast<std::size_t>(t)]) {
      const TubeSpec& child = tubes[static_cast<std::size_t>(c)];
      GuardRegion g;
      GuardConstraint outside;
      outside.kind = GuardConstraint::Kind::OutsideUpperG;
      outside.frame = fr;
      outside.width = tube.diameter;
      GuardConstraint cut;
      cut.kind = GuardConstraint::Kind::HalfSpace;
      cut.frame = Frame::aligned(child.b, child.direction());
      g.constraints = {outside, cut};
      node = FunctionNode::guarded_max(std::move(node), build(c), std::move(g));
    }
    return node;
  };
  return build(root);
}

FunctionNode Construction::node() const { return node_from_tubes(tree.tubes, count, coef, root); }

Construction build_tau(const GrowthParameters& params, int k, bool unscaled) {
  const int d = params.dim;
  Construction c;
  c.dim = d;
  c.tree = build_outer_subtree(params, k);
  const GlueSchedule sched = glue_schedule(params, k);
  const auto roots = c.tree.roots();
  TubeSpec h;
  h.a = Point(d, std::ldexp(1.0, k));
  h.b = Point(d, std::ldexp(1.0, k + 1));
  h.diameter = k == 0 ? 2 * params.relative_handle_width(1) : std::ldexp(sched.eps, k);
  h.rank = k + 1;
  h.role = TubeRole::Handle;
  h.branch = h.diameter > 2 * kLeafWidth;
  h.tail = support_tail(h.diameter, d);
  c.root = static_cast<int>(c.tree.tubes.size());
  c.tree.tubes.push_back(h);
  for (int r : roots) c.tree.tubes[static_cast<std::size_t>(r)].parent = c.root;
  c.count = c.tree.tubes.size();
  c.coef.resize(c.count);
  // v_k itself is p_k tau: every coefficient drops by the full ratio sum.
  const double shift = unscaled ? -sched.layer_coef[0] : 0.0;
  for (std::size_t i = 0; i + 1 < c.count; ++i)
    c.coef[i] = sched.layer_coef[static_cast<std::size_t>(c.tree.tubes[i].generation)] + shift;
  c.coef.back() = sched.layer_coef[0] + shift;
  return c;
}

Construction build_u(const GrowthParameters& params, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidParameter, "u_k needs k >= 1");
  Construction c;
  c.dim = params.dim;
  c.tree = build_tree(params, k);
  c.coef = tree_coefficients(params, k, &c.levels);
  c.count = c.tree.inner_prefix;
  c.root = c.tree.inner_handle;
  c.tree.tubes.resize(c.count);
  c.coef.resize(c.count);
  return c;
}

FunctionNode assemble_full(const FunctionNode& u0) {
  std::vector<FunctionNode> parts;
  for (const auto& m : OrthantMap::all(u0.dim()))
    parts.push_back(FunctionNode::isometry(u0, Frame::reflection(Point(u0.dim(), 0.0), m.signs())));
  return FunctionNode::sum(std::move(parts));
}

FunctionNode w_field(int dim, double lo, double hi) {
  const auto first = static_cast<long>(std::floor(lo - 1));
  const auto last = static_cast<long>(std::ceil(hi + 1));
  std::optional<FunctionNode> acc;
  for (long n = first; n <= last; ++n) {
    Point shift(dim, 0.0);
    shift[0] = static_cast<double>(n) + 0.5;
    FunctionNode w = FunctionNode::isometry(FunctionNode::base_w(dim), Frame::aligned(shift, [&] {
                                              Point e(dim, 0.0);
                                              e[0] = 1;
                                              return e;
                                            }()));
    acc = acc ? FunctionNode::guarded_max(std::move(*acc), std::move(w), GuardRegion{}) : std::move(w);
  }
  return *acc;
}

// ---- certificates ----------------------------------------------------------------

DominanceReport certify_dominance(const Construction& c) {
  DominanceReport r;
  r.min_margin = std::numeric_limits<double>::infinity();
  const double inf_g = log_inf_L_on_G(c.dim);
  const auto sup = subtree_sup(c.tree.tubes, c.count, c.coef, c.dim);
  for (std::size_t i = 0; i < c.count; ++i) {
    const int p = c.tree.tubes[i].parent;
    if (p < 0) continue;
    ++r.pairs;
    const double margin = c.coef[static_cast<std::size_t>(p)] + inf_g - sup[i];
    if (margin < r.min_margin) r.min_margin = margin, r.worst_child = static_cast<int>(i);
  }
  return r;
}

DominanceReport sample_dominance(const Construction& c, int samples_per_pair, bool throw_on_violation) {
  DominanceReport r = certify_dominance(c);
  const int d = c.dim;
  const auto& tubes = c.tree.tubes;
  const auto ch = child_lists(tubes, c.count);
  // Subtree membership by Euler tour.
  std::vector<int> tin(c.count), tout(c.count);
  {
    int clock = 0;
    std::vector<std::pair<int, std::size_t>> st;
    for (std::size_t s = 0; s < c.count; ++s) {
      if (tubes[s].parent >= 0) continue;
      st.push_back({static_cast<int>(s), 0});
      tin[s] = clock++;
      while (!st.empty()) {
        auto& [t, next] = st.back();
        if (next < ch[static_cast<std::size_t>(t)].size()) {
          const int cc = ch[static_cast<std::size_t>(t)][next++];
          tin[static_cast<std::size_t>(cc)] = clock++;
          st.push_back({cc, 0});
        } else {
          tout[static_cast<std::size_t>(t)] = clock;
          st.pop_back();
        }
      }
    }
  }
  Point lo(d, std::numeric_limits<double>::infinity()), hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < c.count; ++i) {
    Point a, b;
    OrientedBox::of(tubes[i], true).bounds(a, b);
    for (int j = 0; j < d; ++j) lo[j] = std::min(lo[j], a[j]), hi[j] = std::max(hi[j], b[j]);
  }
  IntBox box{IPoint(d), IPoint(d)};
  for (int j = 0; j < d; ++j)
    box.lo[j] = static_cast<std::int64_t>(std::floor(lo[j])) - 1, box.hi[j] = static_cast<std::int64_t>(std::ceil(hi[j])) + 1;
  const TubeIndex index(tubes, c.count, box, true);
  auto raw = [&](std::size_t t, const Point& x) {
    const TubeSpec& tb = tubes[t];
    const Point u = tb.direction();
    const Point y = Frame::aligned(tb.a - tb.tail * u, u).to_local(x);
    if (y[0] > tb.tail + tb.length()) return kNegInf;
    const double v = log_L(tb.diameter, y);
    return v == kNegInf ? v : v + c.coef[t];
  };
  // Deterministic low-discrepancy points (additive recurrence) on the facets of the upper G set.
  const double golden[3] = {0.6180339887498949, 0.7548776662466927, 0.5698402909980532};
  for (std::size_t p = 0; p < c.count; ++p) {
    if (ch[p].empty()) continue;
    const TubeSpec& tb = tubes[p];
    const Point u = tb.direction();
    const Frame fr = Frame::aligned(tb.a - tb.tail * u, u);
    const double thr = g_threshold(tb.diameter, d), w3 = tb.diameter / 3.0;
    const double reach = tb.tail + tb.length();
    for (int s = 0; s < samples_per_pair; ++s) {
      Point y(d);
      const double q0 = std::fmod(0.5 + s * golden[0], 1.0), q1 = std::fmod(0.5 + s * golden[1], 1.0);
      const int facet = s % (2 * d - 1);  // 0: near face, else a side face
      if (facet == 0) {
        y[0] = thr;
        for (int j = 1; j < d; ++j) y[j] = (2 * (j == 1 ? q0 : q1) - 1) * w3;
      } else {
        const int axis = 1 + (facet - 1) / 2;
        y[0] = thr + q0 * (reach - thr);
        for (int j = 1; j < d; ++j) y[j] = (2 * q1 - 1) * w3;
        y[axis] = (facet % 2 ? 1 : -1) * w3;
      }
      const Point x = fr.to_world(y);
      ++r.samples;
      const double parent = raw(p, x);
      for (int t : index.at(x)) {
        const auto tt = static_cast<std::size_t>(t);
        if (tin[tt] <= tin[p] || tin[tt] >= tout[p]) continue;
        const double v = raw(tt, x);
        if (v > parent + std::log1p(-1e-9)) {
          ++r.violations;
          r.worst_point = x;
          if (throw_on_violation)
            throw Error(ErrorKind::Construction, "guard dominance fails near a sampled boundary point");
        }
      }
    }
  }
  return r;
}

TruncationReport truncation_defect(const Construction& c, const CompiledFunction& f, int samples_per_face) {
  TruncationReport r;
  const int d = c.dim;
  for (std::size_t i = 0; i < c.count; ++i) {
    const TubeSpec& tb = c.tree.tubes[i];
    if (static_cast<int>(i) == c.root) continue;
    ++r.faces;
    const Point u = tb.direction();
    const Frame fr = Frame::aligned(tb.a - tb.tail * u, u);
    const double end = tb.tail + tb.length();
    bool bad = false;
    for (int s = 0; s < samples_per_face; ++s) {
      Point y(d, 0.0);
      y[0] = end - 1e-9;
      const double q = (s + 0.5) / samples_per_face;
      y[1] = (q - 0.5) * tb.diameter;
      if (d == 3) y[2] = (std::fmod(0.5 + s * 0.6180339887498949, 1.0) - 0.5) * tb.diameter;
      const Point inside = fr.to_world(y);
      y[0] = end + 1e-6;
      const Point beyond = fr.to_world(y);
      const double here = f.log_value(inside), there = f.log_value(beyond);
      if (here == kNegInf) continue;
      const double jump = here - there;
      r.worst_log_jump = std::max(r.worst_log_jump, jump);
      if (jump > 1e-3) bad = true;
    }
    if (bad) ++r.defective_faces;
  }
  return r;
}

}  // namespace oscillab
