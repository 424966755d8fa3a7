#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "oscillab/treeset.hpp"
#include "oscillab/vec.hpp"
#include "oscillab/verify.hpp"

namespace oscillab {

// log t in the plane, -1/t^{d-2} in space.
double kernel(double t, int dim);

struct DiscreteMeasure {
  std::vector<Point> points;
  std::vector<double> weights;
  bool probability = true;

  int dim() const { return points.empty() ? 0 : points.front().dim(); }
  double total() const;
  // Coincident points merged, weights added.
  DiscreteMeasure merged() const;
};

struct EnergyResult {
  double value = 0;
  bool flagged = false;  // single atom: self-energy only
};

// Double sum; the diagonal uses k(half the nearest-neighbour distance).
EnergyResult energy(const DiscreteMeasure& nu);

struct EquilibriumResult {
  DiscreteMeasure measure;
  double energy = 0;
  double residual = 0;  // || w - P(w + grad) ||_inf
  int iterations = 0;
};

EquilibriumResult equilibrium(const std::vector<Point>& points, int max_iterations = 50000, double tolerance = 1e-6);

// ---- Frostman measures ---------------------------------------------------------------------

struct FrostmanResult {
  DiscreteMeasure measure;  // leaf-cell centres, not normalised
  double total_mass = 0;
  double growth_constant = 0;  // max over audited balls of mu(B) / r^{d-1}
  int audited = 0;
};

// `cells` are integer cells of depth D inside [0,1)^d (coordinates in [0, 2^D)); gauge r^{d-1}.
FrostmanResult frostman(const std::vector<IPoint>& cells, int depth, int audit_balls = 10000, std::uint64_t seed = 1);

// ---- distance sets and walk on spheres ---------------------------------------------------------

class DistanceSet {
 public:
  virtual ~DistanceSet() = default;
  virtual int dim() const = 0;
  // Euclidean distance or a lower bound for it.
  virtual double distance(const Point& x) const = 0;
};

class EmptySet final : public DistanceSet {
 public:
  explicit EmptySet(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  double distance(const Point&) const override { return INFINITY; }

 private:
  int dim_;
};

class SphereSet final : public DistanceSet {  // the sphere |x - c| = r
 public:
  SphereSet(Point c, double r) : c_(c), r_(r) {}
  int dim() const override { return c_.dim(); }
  double distance(const Point& x) const override { return std::abs(norm(x - c_) - r_); }

 private:
  Point c_;
  double r_;
};

class BallSet final : public DistanceSet {  // the closed ball |x - c| <= r
 public:
  BallSet(Point c, double r) : c_(c), r_(r) {}
  int dim() const override { return c_.dim(); }
  double distance(const Point& x) const override { return std::max(0.0, norm(x - c_) - r_); }

 private:
  Point c_;
  double r_;
};

class SegmentSet final : public DistanceSet {
 public:
  SegmentSet(Point a, Point b) : a_(a), b_(b) {}
  int dim() const override { return a_.dim(); }
  double distance(const Point& x) const override;

 private:
  Point a_, b_;
};

// Arc of the circle |x - c| = r (plane) or spherical cap (space) around direction `axis` with
// angular half-width `half_angle`.
class CapSet final : public DistanceSet {
 public:
  CapSet(Point c, double r, Point axis, double half_angle);
  int dim() const override { return c_.dim(); }
  double distance(const Point& x) const override;

 private:
  Point c_, axis_;
  double r_, half_;
};

class BoxUnionSet final : public DistanceSet {
 public:
  explicit BoxUnionSet(std::vector<std::pair<Point, Point>> boxes) : boxes_(std::move(boxes)) {}
  int dim() const override { return boxes_.front().first.dim(); }
  double distance(const Point& x) const override;
  const std::vector<std::pair<Point, Point>>& boxes() const { return boxes_; }

 private:
  std::vector<std::pair<Point, Point>> boxes_;
};

// Tubes with rectangular cross-section, bounded below by the enclosing round tube.
class TubeUnionSet final : public DistanceSet {
 public:
  TubeUnionSet(std::vector<TubeSpec> tubes, bool with_tail) : tubes_(std::move(tubes)), with_tail_(with_tail) {}
  int dim() const override { return tubes_.front().a.dim(); }
  double distance(const Point& x) const override;

 private:
  std::vector<TubeSpec> tubes_;
  bool with_tail_;
};

// Shape adaptor for content estimates: a box meets the set when its centre is within half a diagonal.
class DistanceShape final : public Shape {
 public:
  explicit DistanceShape(const DistanceSet& s, double tol = 1e-12) : s_(s), tol_(tol) {}
  int dim() const override { return s_.dim(); }
  bool contains(const Point& x) const override { return s_.distance(x) <= tol_; }
  Overlap intersects_box(const Point& lo, const Point& hi) const override;
  // Sphere tracing along the fiber, so thin sets are not skipped.
  bool fiber_hits(const Point& y, int axis, double t0, double t1) const override;

 private:
  const DistanceSet& s_;
  double tol_;
};

struct WosEstimate {
  double p = 0;
  double standard_error = 0;
  std::int64_t walks = 0;
  std::uint64_t seed = 0;
  std::int64_t capped = 0;
  bool flagged = false;  // more than 0.1% of walks hit the step cap
};

std::uint64_t splitmix64(std::uint64_t x);

// Harmonic measure of E seen from x in B(0, outer_radius) \ E.
WosEstimate wos_harmonic_measure(const Point& x, const DistanceSet& E, std::int64_t walks, std::uint64_t seed,
                                 double outer_radius = 1.0, double shell = 1e-4, int step_cap = 100000);

// ---- claim checks --------------------------------------------------------------------------------

struct FamilyMember {
  std::string name;
  double scale = 1;
  std::shared_ptr<DistanceSet> set;
  std::vector<Point> samples;  // point cloud for the equilibrium solve
};

// Caps, segments, solid cell blocks and scattered cells in B(0, 1/2), three scales each.
std::vector<FamilyMember> claim_family(int dim, int samples_per_member = 256);

struct ClaimRow {
  std::string name;
  double scale = 0;
  double content_upper = 0, content_lower = 0;
  double omega = 0, omega_se = 0;
  double energy = 0;      // I(nu_0)
  double ratio = 0;       // omega / content_upper
  double claim4 = 0;      // content_upper * (-I(nu_0))
};

struct ClaimReport {
  std::vector<ClaimRow> rows;
  double min_ratio = 0, max_ratio = 0;
  double C_fit = 0;          // fitted on the largest scale of each shape
  bool claim4_holds = true;  // every member within the fitted C
};

ClaimReport check_claim1(const std::vector<FamilyMember>& family, std::int64_t walks, std::uint64_t seed,
                         int content_depth = 9);

struct Obs1Report {
  double u_x0 = 0;
  double sup = 0;
  double omega = 0, omega_se = 0;
  double predicted = 0;   // sup * (1 - omega)
  double gap_in_se = 0;   // (predicted - u(x0)) / (sup * se)
  bool chain_holds = true;  // u(x0) <= sup (1 - omega) + 3 sup se <= sup e^{-omega} + 3 sup se
};

// u is subharmonic near the unit ball with u <= 0 on E; sup taken over a polar sample of the closed ball.
Obs1Report check_obs1(const std::function<double(const Point&)>& u, const Point& x0, const DistanceSet& E,
                      std::int64_t walks, std::uint64_t seed);

}  // namespace oscillab
