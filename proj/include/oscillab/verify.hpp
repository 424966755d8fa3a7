#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "oscillab/geometry.hpp"
#include "oscillab/growth.hpp"
#include "oscillab/subfun.hpp"

namespace oscillab {

// ---- grids and the discrete Laplacian ---------------------------------------------

struct GridField {
  Point origin;
  double h = 0;
  IPoint extents;
  std::vector<double> values;
  bool log_scaled = false;

  static GridField sample(const std::function<double(const Point&)>& fn, const Point& origin, double h,
                          const IPoint& extents, bool log_scaled = false);
  std::size_t size() const { return values.size(); }
  std::size_t index(const IPoint& i) const;
  Point point(const IPoint& i) const;
  double at(const IPoint& i) const { return values[index(i)]; }
};

struct LaplacianReport {
  double min_value = 0;
  Point argmin;
  std::size_t points = 0;
  std::vector<Point> violations;  // masked points with stencil below -tol
};

// (2d+1)-point stencil at every interior point accepted by the mask; linear values only.
LaplacianReport discrete_laplacian_report(const GridField& field, const std::function<bool(const Point&)>& mask,
                                          double tol);
// Same, returning the smallest |stencil| over the masked points (the refinement statistic).
double min_abs_laplacian(const GridField& field, const std::function<bool(const Point&)>& mask);

// Sub-mean-value test on spheres of radius `radius` around every grid point of [lo, hi] where u > 0.
// Circle averages use the trapezoid rule, sphere averages Gauss-Legendre in z times trapezoid in angle,
// both spectrally accurate for the harmonic pieces. Excess is log(mean) - log u(x).
struct SubMeanReport {
  double min_log_excess = INFINITY;
  Point argmin;
  std::size_t points = 0;
  std::size_t violations = 0;  // excess below -tol
};
SubMeanReport sub_mean_value(const CompiledFunction& u, const Point& lo, const Point& hi, double h, double radius,
                             double tol = 1e-9);

// ---- suprema ----------------------------------------------------------------------

struct SupBracket {
  double grid_max = 0;  // attained at a sample: a certified lower bound
  double upper = 0;     // grid max plus gradient bound times the covering radius
  Point argmax;
};

// Linear-space bracket on a box with grid step h; grad_bound(x, r) bounds |grad| on B(x, r).
SupBracket sup_on(const std::function<double(const Point&)>& fn,
                  const std::function<double(const Point&, double)>& grad_bound, const Point& lo, const Point& hi,
                  double h);
// Log-space bracket for a compiled function (values are log u).
SupBracket log_sup_on(const CompiledFunction& u, const Point& lo, const Point& hi, double h);

// ---- Hausdorff content sandwich ------------------------------------------------------

enum class Overlap { None, Some };

class Shape {
 public:
  virtual ~Shape() = default;
  virtual int dim() const = 0;
  virtual bool contains(const Point& x) const = 0;
  // Conservative: may answer Some when the box misses the shape, never None when it meets it.
  virtual Overlap intersects_box(const Point& lo, const Point& hi) const = 0;
  // Does the segment {y + t e_axis : t in [t0, t1]} meet the shape?
  virtual bool fiber_hits(const Point& y, int axis, double t0, double t1) const;
};

class SegmentShape final : public Shape {
 public:
  SegmentShape(Point a, Point b) : a_(a), b_(b) {}
  int dim() const override { return a_.dim(); }
  bool contains(const Point& x) const override;
  Overlap intersects_box(const Point& lo, const Point& hi) const override;
  bool fiber_hits(const Point& y, int axis, double t0, double t1) const override;

 private:
  Point a_, b_;
};

class BoxShape final : public Shape {
 public:
  BoxShape(Point lo, Point hi) : lo_(lo), hi_(hi) {}
  int dim() const override { return lo_.dim(); }
  bool contains(const Point& x) const override;
  Overlap intersects_box(const Point& lo, const Point& hi) const override;
  bool fiber_hits(const Point& y, int axis, double t0, double t1) const override;

 private:
  Point lo_, hi_;
};

class EmptyShape final : public Shape {
 public:
  explicit EmptyShape(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  bool contains(const Point&) const override { return false; }
  Overlap intersects_box(const Point&, const Point&) const override { return Overlap::None; }
  bool fiber_hits(const Point&, int, double, double) const override { return false; }

 private:
  int dim_;
};

// Zero set of a compiled function, resolved by sampling.
class ZeroSetShape final : public Shape {
 public:
  ZeroSetShape(const CompiledFunction& u, int fiber_samples = 32) : u_(u), fiber_samples_(fiber_samples) {}
  int dim() const override { return u_.dim(); }
  bool contains(const Point& x) const override { return u_.vanishes(x); }
  Overlap intersects_box(const Point& lo, const Point& hi) const override;
  bool fiber_hits(const Point& y, int axis, double t0, double t1) const override;

 private:
  const CompiledFunction& u_;
  int fiber_samples_;
};

// Minimal dyadic cover of shape ∩ cube down to the given depth, cells scored by edge^{d-1}.
double content_upper(const Shape& shape, const Point& cube_lo, double edge, int depth);

struct ProjectionEstimate {
  double value = 0;  // m_{d-1} of the projection along `axis`
  int axis = 0;
  std::size_t fibers = 0, hits = 0;
};

ProjectionEstimate content_lower_projection(const Shape& shape, const Point& cube_lo, double edge, int axis,
                                            int fibers_per_axis = 16);

// ---- oscillation ------------------------------------------------------------------------

struct OscillationOptions {
  double eps_d = 0.25;
  double band = 0.05;        // content within this distance of eps_d is uncertain
  int fibers_per_axis = 16;
  int fiber_samples = 32;
  int p1_grid = 0;           // 0: 8 for d = 2, 5 for d = 3
  double axis_step = 1.0 / 16;
};

enum class CubeClass { Oscillating, Rogue };

struct OscillationReport {
  LatticeCube cube;
  bool p1_satisfied = false;
  bool p2_satisfied = false;
  bool uncertain = false;
  double log_sup_lower = -INFINITY;  // best sampled log u
  double content_lower = 0;          // best projection over axes
  CubeClass classification = CubeClass::Rogue;
};

OscillationReport classify_cube(const CompiledFunction& u, const LatticeCube& cube, const OscillationOptions& opt = {});

struct RogueCensus {
  IntBox box;
  std::vector<OscillationReport> cubes;  // enumerate_basic_cubes order
  std::int64_t rogue = 0, uncertain = 0, p1_failures = 0, p2_failures = 0;
  double f_value = 0;
  double gamma = 0;  // rogue / f(side length)
};

RogueCensus rogue_census(const CompiledFunction& u, const IntBox& box, const GrowthFunction& f,
                         const OscillationOptions& opt = {});

// ---- growth -----------------------------------------------------------------------------

// R log^{d/(d-1)}(2 + f(R)/R) / (1 + (f(R)/R)^{1/(d-1)}).
double growth_denominator(const GrowthParameters& params, double R);

struct GrowthProfile {
  std::vector<int> k;
  std::vector<double> radius;
  std::vector<double> log_M_lower;  // sampled max of u_k over [0,2^k)^d
  std::vector<double> log_M_upper;  // certified bracket top
  std::vector<double> log_threshold;
  std::vector<double> denominator;
  std::vector<double> ratio;  // log_M_upper / denominator
  double ratio_min = 0, ratio_max = 0;
};

GrowthProfile growth_profile(const GrowthParameters& params, int k_min, int k_max, int grid_per_axis = 128);

// ---- artifacts -------------------------------------------------------------------------

void write_census_csv(std::ostream& out, const RogueCensus& census);
void write_growth_csv(std::ostream& out, const GrowthProfile& profile);
// d = 2 only: rogue cubes filled, uncertain ones hatched.
void write_census_svg(std::ostream& out, const RogueCensus& census, const std::vector<char>* branch_mask = nullptr);

}  // namespace oscillab
