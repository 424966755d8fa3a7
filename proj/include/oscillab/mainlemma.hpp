#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oscillab/geometry.hpp"
#include "oscillab/subfun.hpp"

namespace oscillab {

struct LemmaConfig {
  int N = 64;  // power of two; Q = [-N/2, N/2]^d
  int dim = 2;
  double delta0 = 0;      // 0 selects 4^{-d}
  double alpha = 1.0;
  double c0 = 0.125;
  double scan_start = 0.125;
  double scan_growth = 1.05;

  double delta0_value() const;
  // N / (6d) as a real and the largest integer layer index it admits.
  double layer_limit() const;
  int max_layer() const;
  // First m with 2^m > 8 sqrt(d).
  int base_order() const;
  void validate() const;
};

class RogueConfiguration {
 public:
  RogueConfiguration(int N, int dim, std::vector<LatticeCube> rogue);
  // `count` distinct cubes drawn uniformly from Q with a fixed-seed generator.
  static RogueConfiguration random(int N, int dim, std::int64_t count, std::uint64_t seed);

  int N() const { return N_; }
  int dim() const { return dim_; }
  const IntBox& box() const { return box_; }
  const std::vector<LatticeCube>& rogue() const { return rogue_; }
  std::int64_t rogue_count() const { return static_cast<std::int64_t>(rogue_.size()); }
  bool is_rogue(const IPoint& corner) const;
  std::size_t slot(const IPoint& corner) const;

 private:
  int N_, dim_;
  IntBox box_;
  std::vector<LatticeCube> rogue_;
  std::vector<char> mask_;
};

// m_d(box ∩ ball), exact in the plane, adaptive quadrature over slices in space.
double box_ball_measure(const Point& lo, const Point& hi, const Point& center, double radius);
double ball_volume(int dim, double radius);
// m_d(K ∩ B(x, radius)).
double measure_K_ball(const RogueConfiguration& cfg, const Point& x, double radius);

struct RValue {
  double value = 0;
  bool below_scan = false;  // condition already holds at the first scanned t
  bool capped = false;      // never holds below the diameter of Q
};

RValue compute_r(const RogueConfiguration& cfg, const Point& x, const LemmaConfig& lc);

struct RhoField {
  IntBox box;
  double delta0 = 0;
  std::vector<double> rho;  // per basic cube, enumerate_basic_cubes order
  std::int64_t capped = 0;
  double at(const RogueConfiguration& cfg, const IPoint& corner) const { return rho[cfg.slot(corner)]; }
};

double rho_cube(const RogueConfiguration& cfg, const LatticeCube& cube, const LemmaConfig& lc);
RhoField compute_rho(const RogueConfiguration& cfg, const LemmaConfig& lc);

struct DyadicCover {
  std::vector<DyadicCube> cubes;
  std::vector<int> owner;          // cover element per basic cube
  std::map<int, std::int64_t> n;   // count per order
  int m0 = 0, m_bar = 0;
  std::vector<double> s;           // s_{m0} .. s_{m_bar+1}
  bool maximal = true;             // pairwise non-nested
  bool covers_all = true;
};

DyadicCover build_cover(const RogueConfiguration& cfg, const RhoField& rho, const LemmaConfig& lc);

class StepFunction {
 public:
  explicit StepFunction(const DyadicCover& cover) : m0_(cover.m0), s_(cover.s) {}
  double operator()(int k) const;

 private:
  int m0_;
  std::vector<double> s_;
};

struct KappaChain {
  std::vector<int> K;
  std::vector<int> kappa;
  double B = 0;
  bool central = false;
  bool in_X = false;
};

struct LemmaReport {
  LemmaConfig config;
  std::int64_t cubes = 0, rogue = 0;
  bool c0_gate = true;
  bool vacuous = false;             // no admissible layer index
  double sum_inv_M = 0;             // sum over k of 1/M(k)
  std::vector<std::int64_t> layer_counts;  // #{I : k in K_I}, k = 1..max_layer
  bool property_M = true;
  int first_bad_layer = -1;
  std::int64_t x_count = 0, x_central = 0, central = 0;
  bool x_large = true;
  bool kappa_bound = true;
  std::int64_t first_bad_cube = -1;
  bool gap_property = true;
  double claim1_lhs = 0;
  double claim1_ratio = 0;  // lhs / #E, 0 when E is empty
  std::vector<KappaChain> chains;
  DyadicCover cover;
  RhoField rho;

  bool passed() const { return c0_gate && property_M && x_large && kappa_bound && gap_property; }
};

LemmaReport kappa_chains(const RogueConfiguration& cfg, const RhoField& rho, const DyadicCover& cover,
                         const LemmaConfig& lc);
LemmaReport run_lemma(const RogueConfiguration& cfg, const LemmaConfig& lc);

// ---- bound algebra ----------------------------------------------------------------

double psi(double x, int dim);
double phi(double x, double N, double E_count, int dim);
struct PhiMinimum {
  double x = 0, value = 0;
};
PhiMinimum phi_argmin(double N, double E_count, int dim);
PhiMinimum phi_argmin_grid(double N, double E_count, int dim, int points = 100000);
// N psi(#E / N): the exponent of the lemma's bound without the dimensional constant.
double bound_value(double N, double E_count, int dim);
// Smallest sampled x from which psi is decreasing on the sampled range.
double psi_decreasing_from(int dim, double x_max = 1e6);

// ---- contraction along kappa chains -----------------------------------------------------

struct ContractionRow {
  LatticeCube cube;
  int chain_length = 0;
  double log_ratio = 0;      // log(M_u(I) / M_u(Q))
  double worst_step = 0;     // max over j of log(M_u(Q_j) / M_u(Q_{j+1}))
};

struct ContractionReport {
  std::vector<ContractionRow> rows;
  double delta_estimate = 0;  // median of -log_ratio / chain_length
  double half_fraction_c = 0; // largest c with half the rows at log_ratio <= -c * bound_value
  bool monotone = true;       // every step ratio <= 1
};

// Cubes failing P2 form E. The function must be defined on a neighbourhood of Q.
ContractionReport chain_contraction(const CompiledFunction& u, const LemmaReport& lemma, double grid_step = 0.25);

}  // namespace oscillab
