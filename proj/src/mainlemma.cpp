#include "oscillab/mainlemma.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "oscillab/error.hpp"
#include "oscillab/parallel.hpp"

namespace oscillab {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

// ---- configuration ----------------------------------------------------------------

double LemmaConfig::delta0_value() const { return delta0 > 0 ? delta0 : std::pow(4.0, -dim); }
double LemmaConfig::layer_limit() const { return static_cast<double>(N) / (6.0 * dim); }
int LemmaConfig::max_layer() const { return static_cast<int>(std::floor(layer_limit())); }

int LemmaConfig::base_order() const {
  int m = 0;
  while (std::ldexp(1.0, m) <= 8 * std::sqrt(static_cast<double>(dim))) ++m;
  return m;
}

void LemmaConfig::validate() const {
  if (dim < 2 || dim > kMaxDim) throw Error(ErrorKind::InvalidParameter, "dimension must be 2 or 3");
  if (N < 2 || (N & (N - 1)) != 0) throw Error(ErrorKind::InvalidParameter, "N must be a power of two");
  if (!(alpha > 0)) throw Error(ErrorKind::InvalidParameter, "alpha must be positive");
  if (!(c0 > 0)) throw Error(ErrorKind::InvalidParameter, "c0 must be positive");
  const double d0 = delta0_value();
  if (!(d0 > 0) || d0 > std::ldexp(1.0, -dim)) throw Error(ErrorKind::InvalidParameter, "delta0 must lie in (0, 2^-d]");
  if (!(scan_start > 0) || !(scan_growth > 1)) throw Error(ErrorKind::InvalidParameter, "bad scan parameters");
}

// ---- configurations ---------------------------------------------------------------

RogueConfiguration::RogueConfiguration(int N, int dim, std::vector<LatticeCube> rogue)
    : N_(N), dim_(dim), box_{IPoint(dim, -N / 2), IPoint(dim, N / 2)}, rogue_(std::move(rogue)) {
  if (N < 2 || (N & (N - 1)) != 0) throw Error(ErrorKind::InvalidParameter, "N must be a power of two");
  mask_.assign(static_cast<std::size_t>(box_.volume()), 0);
  std::sort(rogue_.begin(), rogue_.end(), [](const auto& a, const auto& b) { return a.corner < b.corner; });
  rogue_.erase(std::unique(rogue_.begin(), rogue_.end()), rogue_.end());
  for (const auto& c : rogue_) {
    for (int i = 0; i < dim; ++i)
      if (c.corner[i] < box_.lo[i] || c.corner[i] >= box_.hi[i])
        throw Error(ErrorKind::InvalidRegion, "rogue cube lies outside Q");
    mask_[slot(c.corner)] = 1;
  }
}

RogueConfiguration RogueConfiguration::random(int N, int dim, std::int64_t count, std::uint64_t seed) {
  const std::int64_t total = static_cast<std::int64_t>(std::pow(N, dim));
  if (count < 0 || count > total) throw Error(ErrorKind::InvalidParameter, "rogue count out of range");
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(total));
  for (std::int64_t i = 0; i < total; ++i) idx[static_cast<std::size_t>(i)] = i;
  // partial Fisher-Yates
  for (std::int64_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::int64_t> pick(i, total - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<LatticeCube> cubes;
  for (std::int64_t i = 0; i < count; ++i) {
    IPoint c(dim);
    std::int64_t r = idx[static_cast<std::size_t>(i)];
    for (int a = dim - 1; a >= 0; --a) {
      c[a] = r % N - N / 2;
      r /= N;
    }
    cubes.push_back(LatticeCube{c});
  }
  return RogueConfiguration(N, dim, std::move(cubes));
}

std::size_t RogueConfiguration::slot(const IPoint& corner) const {
  std::int64_t s = 0;
  for (int a = 0; a < dim_; ++a) s = s * N_ + (corner[a] - box_.lo[a]);
  return static_cast<std::size_t>(s);
}

bool RogueConfiguration::is_rogue(const IPoint& corner) const {
  for (int a = 0; a < dim_; ++a)
    if (corner[a] < box_.lo[a] || corner[a] >= box_.hi[a]) return false;
  return mask_[slot(corner)] != 0;
}

// ---- measures ------------------------------------------------------------------------

namespace {

// Disk of radius R at the origin intersected with [x0,x1] x [y0,y1], exactly.
double disk_rect_area(double x0, double x1, double y0, double y1, double R) {
  if (!(R > 0)) return 0;
  x0 = std::max(x0, -R);
  x1 = std::min(x1, R);
  if (x1 <= x0 || y1 <= y0) return 0;
  std::array<double, 6> bp{};
  int n = 0;
  bp[n++] = x0;
  for (double y : {y0, y1}) {
    if (std::abs(y) >= R) continue;
    const double c = std::sqrt(R * R - y * y);
    for (double s : {-c, c})
      if (s > x0 && s < x1) bp[n++] = s;
  }
  bp[n++] = x1;
  std::sort(bp.begin(), bp.begin() + n);
  auto G = [&](double x) {
    const double s = std::sqrt(std::max(0.0, R * R - x * x));
    return 0.5 * (x * s + R * R * std::asin(std::clamp(x / R, -1.0, 1.0)));
  };
  double total = 0;
  for (int i = 0; i + 1 < n; ++i) {
    const double a = bp[i], b = bp[i + 1];
    if (b <= a) continue;
    const double m = 0.5 * (a + b);
    const double s = std::sqrt(std::max(0.0, R * R - m * m));
    if (std::min(y1, s) <= std::max(y0, -s)) continue;
    const double arc = G(b) - G(a);
    const double upper = y1 < s ? y1 * (b - a) : arc;
    const double lower = y0 > -s ? y0 * (b - a) : -arc;
    total += upper - lower;
  }
  return total;
}

double simpson_adaptive(const auto& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
  return simpson_adaptive(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_adaptive(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace

double ball_volume(int dim, double radius) {
  return std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0 + 1) * std::pow(radius, dim);
}

double box_ball_measure(const Point& lo, const Point& hi, const Point& center, double radius) {
  const int d = lo.dim();
  if (!(radius > 0)) return 0;
  double near2 = 0, far2 = 0;
  bool ball_inside = true;
  for (int i = 0; i < d; ++i) {
    const double a = lo[i] - center[i], b = hi[i] - center[i];
    if (b <= a) return 0;
    const double n = a > 0 ? a : (b < 0 ? -b : 0.0);
    near2 += n * n;
    far2 += std::max(a * a, b * b);
    ball_inside = ball_inside && a <= -radius && b >= radius;
  }
  if (near2 >= radius * radius) return 0;
  if (ball_inside) return ball_volume(d, radius);
  if (far2 <= radius * radius) {
    double v = 1;
    for (int i = 0; i < d; ++i) v *= hi[i] - lo[i];
    return v;
  }
  const double x0 = lo[0] - center[0], x1 = hi[0] - center[0], y0 = lo[1] - center[1], y1 = hi[1] - center[1];
  if (d == 2) return disk_rect_area(x0, x1, y0, y1, radius);
  const double z0 = std::max(lo[2] - center[2], -radius), z1 = std::min(hi[2] - center[2], radius);
  if (z1 <= z0) return 0;
  auto slice = [&](double z) { return disk_rect_area(x0, x1, y0, y1, std::sqrt(std::max(0.0, radius * radius - z * z))); };
  const double fa = slice(z0), fb = slice(z1), fm = slice(0.5 * (z0 + z1));
  const double whole = (z1 - z0) / 6 * (fa + 4 * fm + fb);
  return simpson_adaptive(slice, z0, z1, fa, fm, fb, whole, 1e-10 * std::max(1.0, radius * radius * radius), 40);
}

double measure_K_ball(const RogueConfiguration& cfg, const Point& x, double radius) {
  // Everything off the rogue cubes counts as K, outside Q included; the maximal-function
  // step needs the complement of K to be the rogue set alone.
  const int d = cfg.dim();
  const double total = ball_volume(d, radius);
  IPoint lo(d), hi(d);
  double cells = 1;
  for (int i = 0; i < d; ++i) {
    lo[i] = std::max<std::int64_t>(cfg.box().lo[i], static_cast<std::int64_t>(std::floor(x[i] - radius)));
    hi[i] = std::min<std::int64_t>(cfg.box().hi[i], static_cast<std::int64_t>(std::floor(x[i] + radius)) + 1);
    if (hi[i] <= lo[i]) return total;
    cells *= static_cast<double>(hi[i] - lo[i]);
  }
  double rogue = 0;
  auto add = [&](const IPoint& c) {
    const Point a = to_point(c);
    rogue += box_ball_measure(a, a + Point(d, 1.0), x, radius);
  };
  // Walk whichever is smaller, the bounding box or the rogue list.
  if (cells > static_cast<double>(cfg.rogue_count())) {
    for (const auto& c : cfg.rogue()) add(c.corner);
  } else {
    IPoint c = lo;
    while (true) {
      if (cfg.is_rogue(c)) add(c);
      int i = d - 1;
      while (i >= 0 && ++c[i] == hi[i]) c[i] = lo[i], --i;
      if (i < 0) break;
    }
  }
  return std::max(0.0, total - rogue);
}

RValue compute_r(const RogueConfiguration& cfg, const Point& x, const LemmaConfig& lc) {
  const int d = cfg.dim();
  const double need = lc.delta0_value() * ball_volume(d, 1.0);
  auto holds = [&](double t) { return measure_K_ball(cfg, x, 0.5 * t) >= need * std::pow(t, d); };
  const double diameter = cfg.N() * std::sqrt(static_cast<double>(d));
  RValue r;
  double t = lc.scan_start;
  if (holds(t)) {
    r.value = t;
    r.below_scan = true;
    return r;
  }
  double prev = t;
  while (true) {
    t *= lc.scan_growth;
    if (t > diameter) {
      r.value = diameter;
      r.capped = true;
      return r;
    }
    if (holds(t)) break;
    prev = t;
  }
  double lo = prev, hi = t;
  while ((hi - lo) > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  r.value = hi;
  return r;
}

double rho_cube(const RogueConfiguration& cfg, const LatticeCube& cube, const LemmaConfig& lc) {
  const int d = cfg.dim();
  const double floor_value = 2 * std::sqrt(static_cast<double>(d));
  // In a cube of K every point sees a K-fraction >= 2^{-d} of small balls, enough when delta0 <= 4^{-d}.
  if (!cfg.is_rogue(cube.corner) && lc.delta0_value() <= std::pow(4.0, -d) * (1 + 1e-12)) return floor_value;
  double worst = 0;
  IPoint i(d, 0);
  while (true) {
    Point x = to_point(cube.corner);
    for (int a = 0; a < d; ++a) x[a] += (2.0 * static_cast<double>(i[a]) + 1) / 6.0;
    worst = std::max(worst, compute_r(cfg, x, lc).value);
    int a = d - 1;
    while (a >= 0 && ++i[a] == 3) i[a] = 0, --a;
    if (a < 0) break;
  }
  if (worst <= floor_value) return floor_value;
  // r moves by at most twice the displacement; lattice points are within sqrt(d)/6 of any point.
  return worst + std::sqrt(static_cast<double>(d)) / 3.0;
}

RhoField compute_rho(const RogueConfiguration& cfg, const LemmaConfig& lc) {
  lc.validate();
  RhoField f;
  f.box = cfg.box();
  f.delta0 = lc.delta0_value();
  const auto cubes = enumerate_basic_cubes(cfg.box());
  f.rho.resize(cubes.size());
  parallel_for(cubes.size(), [&](std::size_t i) { f.rho[cfg.slot(cubes[i].corner)] = rho_cube(cfg, cubes[i], lc); });
  const double diameter = cfg.N() * std::sqrt(static_cast<double>(cfg.dim()));
  for (double v : f.rho) f.capped += v >= diameter;
  return f;
}

// ---- cover --------------------------------------------------------------------------

DyadicCover build_cover(const RogueConfiguration& cfg, const RhoField& rho, const LemmaConfig& lc) {
  const int d = cfg.dim();
  const auto cubes = enumerate_basic_cubes(cfg.box());
  std::vector<std::size_t> order(cubes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Descending rho; enumerate order is lexicographic, so a stable sort breaks ties by corner.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rho.rho[cfg.slot(cubes[a].corner)] > rho.rho[cfg.slot(cubes[b].corner)];
  });
  DyadicCover cov;
  cov.owner.assign(cubes.size(), -1);
  for (std::size_t i : order) {
    const std::size_t s = cfg.slot(cubes[i].corner);
    if (cov.owner[s] >= 0) continue;
    const DyadicCube J = containing_dyadic(cubes[i], rho.rho[s]);
    const int id = static_cast<int>(cov.cubes.size());
    cov.cubes.push_back(J);
    IPoint lo(d), hi(d);
    for (int a = 0; a < d; ++a) {
      lo[a] = std::max(J.corner()[a], cfg.box().lo[a]);
      hi[a] = std::min(J.corner()[a] + (std::int64_t{1} << J.order()), cfg.box().hi[a]);
    }
    IPoint c = lo;
    while (true) {
      auto& o = cov.owner[cfg.slot(c)];
      if (o < 0) o = id;
      int a = d - 1;
      while (a >= 0 && ++c[a] == hi[a]) c[a] = lo[a], --a;
      if (a < 0) break;
    }
  }
  cov.covers_all = std::all_of(cov.owner.begin(), cov.owner.end(), [](int o) { return o >= 0; });
  if (!cov.covers_all) throw Error(ErrorKind::Construction, "dyadic cover misses a basic cube");
  for (std::size_t a = 0; a < cov.cubes.size() && cov.maximal; ++a)
    for (std::size_t b = 0; b < cov.cubes.size(); ++b)
      if (a != b && cov.cubes[a].contains(cov.cubes[b])) {
        cov.maximal = false;
        break;
      }
  for (const auto& J : cov.cubes) ++cov.n[J.order()];

  cov.m0 = lc.base_order();
  const double limit = lc.layer_limit();
  const double mass = lc.alpha * std::pow(static_cast<double>(cfg.N()), d);
  for (int m = cov.m0;; ++m) {
    double denom = 0;
    for (const auto& [l, cnt] : cov.n)
      if (l >= m) denom += std::ldexp(1.0, l) * static_cast<double>(cnt);
    const double s = denom > 0 ? std::min(std::pow(mass / denom, 1.0 / (d - 1)), limit) : limit;
    cov.s.push_back(s);
    if (s >= limit) {
      cov.m_bar = m - 1;
      break;
    }
  }
  return cov;
}

double StepFunction::operator()(int k) const {
  if (k <= s_[0]) return std::ldexp(1.0, m0_);
  for (std::size_t i = 1; i < s_.size(); ++i)
    if (k <= s_[i]) return std::ldexp(1.0, m0_ + static_cast<int>(i));
  return std::ldexp(1.0, m0_ + static_cast<int>(s_.size()) - 1);
}

// ---- chains ---------------------------------------------------------------------------

LemmaReport kappa_chains(const RogueConfiguration& cfg, const RhoField& rho, const DyadicCover& cover,
                         const LemmaConfig& lc) {
  const int d = cfg.dim();
  const int kmax = lc.max_layer();
  const StepFunction M(cover);
  LemmaReport rep;
  rep.config = lc;
  const auto cubes = enumerate_basic_cubes(cfg.box());
  rep.cubes = static_cast<std::int64_t>(cubes.size());
  rep.rogue = cfg.rogue_count();
  rep.vacuous = kmax < 1;
  for (int k = 1; k <= kmax; ++k) rep.sum_inv_M += 1.0 / M(k);
  rep.chains.resize(cubes.size());
  parallel_for(cubes.size(), [&](std::size_t i) {
    KappaChain& ch = rep.chains[i];
    const LatticeCube& I = cubes[i];
    ch.central = true;
    for (int a = 0; a < d; ++a)
      ch.central = ch.central && I.corner[a] - kmax >= cfg.box().lo[a] && I.corner[a] + kmax < cfg.box().hi[a];
    for (int k = 1; k <= kmax; ++k) {
      double worst = 0;
      for (const auto& c : annulus_cubes(I, k)) {
        bool in = true;
        for (int a = 0; a < d; ++a) in = in && c.corner[a] >= cfg.box().lo[a] && c.corner[a] < cfg.box().hi[a];
        if (in) worst = std::max(worst, rho.at(cfg, c.corner));
      }
      if (worst <= M(k)) {
        ch.K.push_back(k);
        ch.B += 1.0 / M(k);
      }
    }
    for (int k : ch.K)
      if (ch.kappa.empty() || k > ch.kappa.back() + M(ch.kappa.back())) ch.kappa.push_back(k);
  });
  rep.layer_counts.assign(static_cast<std::size_t>(std::max(kmax, 0)), 0);
  const double n_d = static_cast<double>(rep.cubes);
  for (std::size_t i = 0; i < rep.chains.size(); ++i) {
    auto& ch = rep.chains[i];
    for (int k : ch.K) ++rep.layer_counts[static_cast<std::size_t>(k - 1)];
    ch.in_X = ch.B >= rep.sum_inv_M / 12.0 - 1e-15;
    rep.x_count += ch.in_X;
    rep.central += ch.central;
    rep.x_central += ch.in_X && ch.central;
    for (std::size_t j = 1; j < ch.kappa.size(); ++j)
      if (ch.kappa[j] - ch.kappa[j - 1] <= M(ch.kappa[j - 1])) rep.gap_property = false;
    if (ch.in_X && static_cast<double>(ch.kappa.size()) < rep.sum_inv_M / 24.0 - 1e-12 && rep.kappa_bound) {
      rep.kappa_bound = false;
      rep.first_bad_cube = static_cast<std::int64_t>(i);
    }
  }
  for (int k = 1; k <= kmax; ++k)
    if (static_cast<double>(rep.layer_counts[static_cast<std::size_t>(k - 1)]) < 11.0 / 12.0 * n_d) {
      rep.property_M = false;
      rep.first_bad_layer = k;
      break;
    }
  rep.x_large = static_cast<double>(rep.x_count) >= 10.0 / 11.0 * n_d;
  for (const auto& [m, cnt] : cover.n)
    if (m >= cover.m0) rep.claim1_lhs += std::ldexp(1.0, m * d) * static_cast<double>(cnt);
  rep.claim1_ratio = rep.rogue > 0 ? rep.claim1_lhs / static_cast<double>(rep.rogue) : 0.0;
  rep.c0_gate = static_cast<double>(rep.rogue) <= lc.c0 * n_d;
  return rep;
}

LemmaReport run_lemma(const RogueConfiguration& cfg, const LemmaConfig& lc) {
  lc.validate();
  if (cfg.N() != lc.N || cfg.dim() != lc.dim) throw Error(ErrorKind::InvalidParameter, "configuration does not match N, d");
  RhoField rho = compute_rho(cfg, lc);
  DyadicCover cover = build_cover(cfg, rho, lc);
  LemmaReport rep = kappa_chains(cfg, rho, cover, lc);
  rep.cover = std::move(cover);
  rep.rho = std::move(rho);
  return rep;
}

// ---- bound algebra ------------------------------------------------------------------------

double psi(double x, int dim) {
  if (x < 0) throw Error(ErrorKind::Domain, "psi needs x >= 0");
  const double e = 1.0 / (dim - 1);
  return std::pow(std::log(2 + x), dim * e) / (1 + std::pow(x, e));
}

double phi(double x, double N, double E_count, int dim) {
  const double e = 1.0 / (dim - 1);
  const double tail = E_count > 0 ? std::pow(x, dim * e) * std::pow(N / E_count, e) : 0.0;
  return std::exp2(-x) + tail;
}

PhiMinimum phi_argmin(double N, double E_count, int dim) {
  double lo = 1, hi = std::max(1.0, N / (6.0 * dim));
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
    if (phi(a, N, E_count, dim) <= phi(b, N, E_count, dim))
      hi = b;
    else
      lo = a;
  }
  const double x = 0.5 * (lo + hi);
  return {x, phi(x, N, E_count, dim)};
}

PhiMinimum phi_argmin_grid(double N, double E_count, int dim, int points) {
  const double lo = 1, hi = std::max(1.0, N / (6.0 * dim));
  PhiMinimum best{lo, phi(lo, N, E_count, dim)};
  for (int i = 1; i <= points; ++i) {
    const double x = lo + (hi - lo) * i / points;
    const double v = phi(x, N, E_count, dim);
    if (v < best.value) best = {x, v};
  }
  return best;
}

double bound_value(double N, double E_count, int dim) {
  if (E_count < 0) throw Error(ErrorKind::Domain, "rogue count must be non-negative");
  return N * psi(E_count / N, dim);
}

double psi_decreasing_from(int dim, double x_max) {
  constexpr int n = 4000;
  double last_rise = 0;
  double prev = psi(0, dim);
  for (int i = 1; i <= n; ++i) {
    const double x = std::expm1(std::log1p(x_max) * i / n);
    const double v = psi(x, dim);
    if (v > prev) last_rise = x;
    prev = v;
  }
  return last_rise;
}

// ---- contraction --------------------------------------------------------------------------

ContractionReport chain_contraction(const CompiledFunction& u, const LemmaReport& lemma, double grid_step) {
  const int d = lemma.config.dim;
  const int N = lemma.config.N;
  const IntBox box{IPoint(d, -N / 2), IPoint(d, N / 2)};
  const auto cubes = enumerate_basic_cubes(box);
  const int per = std::max(1, static_cast<int>(std::round(1.0 / grid_step)));
  std::vector<double> sup(cubes.size(), kNegInf);
  parallel_for(cubes.size(), [&](std::size_t i) {
    IPoint g(d, 0);
    while (true) {
      Point x = to_point(cubes[i].corner);
      for (int a = 0; a < d; ++a) x[a] += (static_cast<double>(g[a]) + 0.5) / per;
      sup[i] = std::max(sup[i], u.log_value(x));
      int a = d - 1;
      while (a >= 0 && ++g[a] == per) g[a] = 0, --a;
      if (a < 0) break;
    }
  });
  auto slot = [&](const IPoint& c) {
    std::int64_t s = 0;
    for (int a = 0; a < d; ++a) s = s * N + (c[a] + N / 2);
    return static_cast<std::size_t>(s);
  };
  const double whole = *std::max_element(sup.begin(), sup.end());
  auto box_sup = [&](const IPoint& corner, int layer) {
    IPoint lo(d), hi(d);
    for (int a = 0; a < d; ++a)
      lo[a] = std::max<std::int64_t>(corner[a] - layer, -N / 2), hi[a] = std::min<std::int64_t>(corner[a] + layer + 1, N / 2);
    double m = kNegInf;
    IPoint c = lo;
    while (true) {
      m = std::max(m, sup[slot(c)]);
      int a = d - 1;
      while (a >= 0 && ++c[a] == hi[a]) c[a] = lo[a], --a;
      if (a < 0) break;
    }
    return m;
  };
  ContractionReport rep;
  std::vector<double> per_step, scaled;
  const double bound = bound_value(N, static_cast<double>(lemma.rogue), d);
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    const auto& ch = lemma.chains[i];
    if (!ch.central || !ch.in_X) continue;
    ContractionRow row;
    row.cube = cubes[i];
    row.chain_length = static_cast<int>(ch.kappa.size());
    double inner = sup[i];
    row.worst_step = kNegInf;
    for (int k : ch.kappa) {
      const double outer = box_sup(cubes[i].corner, k);
      if (inner > kNegInf) row.worst_step = std::max(row.worst_step, inner - outer);
      inner = outer;
    }
    if (inner > kNegInf) row.worst_step = std::max(row.worst_step, inner - whole);
    row.log_ratio = sup[i] - whole;
    if (row.worst_step > 1e-12) rep.monotone = false;
    if (row.chain_length > 0 && std::isfinite(row.log_ratio)) per_step.push_back(-row.log_ratio / row.chain_length);
    scaled.push_back(bound > 0 ? -row.log_ratio / bound : 0.0);
    rep.rows.push_back(row);
  }
  auto median = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  rep.delta_estimate = median(per_step);
  rep.half_fraction_c = median(scaled);
  return rep;
}

}  // namespace oscillab
