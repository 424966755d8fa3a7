#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "oscillab/frame.hpp"
#include "oscillab/growth.hpp"
#include "oscillab/treeset.hpp"

namespace oscillab {

// ---- base formulas -------------------------------------------------------------

double log_cosh(double y);
double eval_W(const Point& x);
double eval_T(double eps, const Point& x);
double eval_L(double eps, const Point& x);
double log_W(const Point& x);
double log_T(double eps, const Point& x);
double log_L(double eps, const Point& x);
// x_1 threshold of the G set: eps d log 2 / (pi sqrt(d-1)).
double g_threshold(double eps, int dim);
// The two-sided set {|x_j| <= eps/3, j >= 2} cap {|x_1| >= threshold}.
bool in_region_G(double eps, const Point& x);
// Half of it lying on the side where L is positive; this is what guards use.
bool in_upper_G(double eps, const Point& x);
// log of inf L over the boundary of the upper G set: log(2^{1-d} cosh(d log 2) - 1).
double log_inf_L_on_G(int dim);

// ---- symbolic functions ---------------------------------------------------------

struct GuardConstraint {
  enum class Kind { OutsideUpperG, HalfSpace };
  Kind kind = Kind::HalfSpace;
  Frame frame;       // OutsideUpperG: frame of the piece; HalfSpace: origin on plane, axis 0 = outward normal
  double width = 0;  // OutsideUpperG only

  bool contains(const Point& x) const;
  GuardConstraint mapped(const Frame& outer) const;
};

struct GuardRegion {
  std::vector<GuardConstraint> constraints;
  bool contains(const Point& x) const;
};

enum class NodeKind { BaseW, BaseT, BaseL, Isometry, Scale, GuardedMax, Sum };

class FunctionNode {
 public:
  static FunctionNode base_w(int dim);
  static FunctionNode base_t(int dim, double eps);
  static FunctionNode base_l(int dim, double eps);
  // value(x) = child(motion.to_local(x)).
  static FunctionNode isometry(FunctionNode child, Frame motion);
  static FunctionNode scale(FunctionNode child, double log_factor);
  // max(a, b) inside the guard, a outside.
  static FunctionNode guarded_max(FunctionNode a, FunctionNode b, GuardRegion guard);
  static FunctionNode sum(std::vector<FunctionNode> children);

  NodeKind kind() const;
  int dim() const;
  double eps() const;
  double log_factor() const;
  const Frame& motion() const;
  const GuardRegion& guard() const;
  std::span<const FunctionNode> children() const;
  std::size_t node_count() const;

  // Direct recursive evaluation; -inf where the function vanishes.
  double log_eval(const Point& x) const;
  double eval(const Point& x) const;

 private:
  struct Data;
  explicit FunctionNode(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  std::shared_ptr<const Data> d_;
};

// Flattened evaluator: the value is the max over alive base pieces, summed (log-sum-exp)
// across Sum groups. Pieces are bucketed by unit cell over the declared domain.
class CompiledFunction {
 public:
  CompiledFunction(const FunctionNode& node, const Point& domain_lo, const Point& domain_hi);

  int dim() const { return dim_; }
  double log_value(const Point& x) const;
  double value(const Point& x) const { return std::exp(log_value(x)); }
  bool vanishes(const Point& x) const;
  // Upper bound for log |grad u| on the ball B(x, radius).
  double log_gradient_bound(const Point& x, double radius) const;
  // Points on axes of pieces meeting the box, spaced by `step`.
  std::vector<Point> axis_samples(const Point& lo, const Point& hi, double step) const;
  std::size_t piece_count() const;
  const Point& domain_lo() const { return lo_; }
  const Point& domain_hi() const { return hi_; }

 private:
  struct Piece {
    NodeKind kind;
    Frame frame;
    double eps;
    double log_coef;
    int guard;
    double axial_max;  // support ends here along axis 0 (from half-space cuts)
  };
  struct GuardNode {
    GuardConstraint constraint;
    int parent;
  };
  struct Group {
    std::vector<Piece> pieces;
    std::vector<GuardNode> guards;
    std::vector<std::int64_t> offsets;
    std::vector<int> items;
  };

  void compile(const FunctionNode& n, const Frame& motion, double log_coef, int guard, Group& g);
  void build_index(Group& g);
  bool alive(const Group& g, int guard, const Point& x) const;
  double group_log_value(const Group& g, const Point& x, bool stop_at_positive) const;
  std::span<const int> candidates(const Group& g, const Point& x) const;
  static double piece_log(const Piece& p, const Point& x);

  int dim_;
  Point lo_, hi_;
  IPoint cell_lo_, cell_hi_;
  std::vector<Group> groups_;
};

// ---- glueing schedules and the recursive construction -----------------------------

// log sup of L_W / coefficient over a tube's support (axial reach length + tail).
double tube_log_sup(const TubeSpec& tube, int dim);
// log M_k = 4 pi d 2^{kd/(d-1)} f(2^k)^{-1/(d-1)} log^{d/(d-1)}(f(2^k)/2^k); k = 0 gives pi d / eps_1.
double log_threshold(const GrowthParameters& params, int k);

struct GlueSchedule {
  int k = 0;
  int s = 0;
  double eps = 0;
  std::vector<double> ratio;        // log(p_m / p_{m+1}) between layer m and m+1; layer 0 is the handle
  std::vector<double> base_ratio;  // the unraised value
  std::vector<char> raised;         // ratio lifted to the dominance requirement
  std::vector<double> layer_coef;   // log coefficient per layer, leaves last (= 0)
  double log_inv_p1 = 0;            // pi d / eps_k
  double log_M = 0;                 // log M_k
};

// Schedule for tau_{k+1} built on the outer subtree of rank k+1.
GlueSchedule glue_schedule(const GrowthParameters& params, int k);

struct LevelInfo {
  int k = 0;
  double handle_width = 0;   // 2^k delta_k
  double handle_coef = 0;    // log coefficient of the inner handle L_k
  double log_M_prev = 0;     // log M_{k-1}, the unraised coefficient
  bool raised = false;
  double copy_coef = 0;      // log coefficient of the outer copies' handles at level k
};

struct Construction {
  int dim = 2;
  TreeSpec tree;               // tubes; only [0, count) take part
  std::size_t count = 0;
  std::vector<double> coef;    // log coefficient per tube
  int root = -1;               // uncut top piece
  std::vector<LevelInfo> levels;
  FunctionNode node() const;
};

Construction build_tau(const GrowthParameters& params, int k, bool unscaled = false);
Construction build_u(const GrowthParameters& params, int k);
// Coefficients for every tube of build_tree(params, k), with level bookkeeping.
std::vector<double> tree_coefficients(const GrowthParameters& params, int k, std::vector<LevelInfo>* levels);

FunctionNode node_from_tubes(const std::vector<TubeSpec>& tubes, std::size_t count, const std::vector<double>& coef,
                             int root);
// Sum over the 2^d orthant reflections.
FunctionNode assemble_full(const FunctionNode& u0);
// Max over integer translates of W along x_1 covering [lo, hi].
FunctionNode w_field(int dim, double lo, double hi);

struct DominanceReport {
  double min_margin = 0;  // analytic: parent inf on G boundary minus child sup, in log units
  int worst_child = -1;
  std::size_t pairs = 0;
  std::size_t samples = 0;
  std::size_t violations = 0;  // sampled boundary points where the child subtree wins
  Point worst_point;
};

DominanceReport certify_dominance(const Construction& c);
// Samples the boundary of every distinct parent G set; throws Construction on a violation.
DominanceReport sample_dominance(const Construction& c, int samples_per_pair, bool throw_on_violation);

struct TruncationReport {
  std::size_t faces = 0;
  std::size_t defective_faces = 0;
  double worst_log_jump = -INFINITY;  // log(child value at the face) - log(value just beyond)
};
TruncationReport truncation_defect(const Construction& c, const CompiledFunction& f, int samples_per_face);

}  // namespace oscillab
