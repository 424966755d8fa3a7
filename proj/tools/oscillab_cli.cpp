#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oscillab/error.hpp"
#include "oscillab/growth.hpp"
#include "oscillab/mainlemma.hpp"
#include "oscillab/parallel.hpp"
#include "oscillab/potential.hpp"
#include "oscillab/subfun.hpp"
#include "oscillab/treeset.hpp"
#include "oscillab/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace oscillab;

namespace {

constexpr int kExitPass = 0, kExitFail = 2, kExitConfig = 3;

struct RunConfig {
  int dim = 2;
  std::string f = "t^1.5";
  int k = 3;
  int N = 64;
  std::uint64_t seed = 1;
  double eps_d = 0.25;
  double delta0 = 0;
  double alpha = 1;
  double c0 = 0.125;
  std::string out = ".";
  int threads = 0;
};

// Ten significant digits keep reports byte-stable across runs and platforms.
ordered_json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return std::strtod(buf, nullptr);
}

ordered_json point_json(const Point& p) {
  ordered_json a = ordered_json::array();
  for (double x : p) a.push_back(num(x));
  return a;
}

ordered_json ipoint_json(const IPoint& p) {
  ordered_json a = ordered_json::array();
  for (auto x : p) a.push_back(x);
  return a;
}

enum class Status { Pass, Fail, Flagged };

const char* status_name(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    default: return "flagged";
  }
}

class Verdict {
 public:
  explicit Verdict(std::string command) { doc_["command"] = std::move(command); }
  ordered_json& config() { return doc_["config"]; }
  void add(const std::string& name, Status s, ordered_json measured) {
    failed_ = failed_ || s == Status::Fail;
    checks_.push_back({{"name", name}, {"status", status_name(s)}, {"measured", std::move(measured)}});
  }
  void add(const std::string& name, bool ok, ordered_json measured) {
    add(name, ok ? Status::Pass : Status::Fail, std::move(measured));
  }
  bool failed() const { return failed_; }
  void write(const fs::path& path) {
    doc_["checks"] = checks_;
    doc_["status"] = failed_ ? "fail" : "pass";
    std::ofstream(path) << doc_.dump(2) << "\n";
    std::cout << path.string() << ": " << (failed_ ? "FAIL" : "PASS") << "\n";
    for (const auto& c : checks_)
      std::cout << "  " << c["name"].get<std::string>() << ": " << c["status"].get<std::string>() << "\n";
  }
  int exit_code() const { return failed_ ? kExitFail : kExitPass; }

 private:
  ordered_json doc_;
  ordered_json checks_ = ordered_json::array();
  bool failed_ = false;
};

fs::path out_dir(const RunConfig& cfg) {
  fs::path p(cfg.out);
  fs::create_directories(p);
  return p;
}

GrowthParameters make_params(const RunConfig& cfg) {
  GrowthParameters p{GrowthFunction::parse(cfg.f), cfg.dim};
  p.validate();
  return p;
}

ordered_json base_config(const RunConfig& cfg) {
  return {{"d", cfg.dim}, {"f", GrowthFunction::parse(cfg.f).describe()}};
}

const char* role_name(TubeRole r) {
  switch (r) {
    case TubeRole::Leaf: return "leaf";
    case TubeRole::Wide: return "wide";
    case TubeRole::Thin: return "thin";
    default: return "handle";
  }
}

Construction construct(const GrowthParameters& params, const std::string& kind, int k) {
  if (kind == "u") return build_u(params, k);
  if (kind == "tau") return build_tau(params, k);
  throw Error(ErrorKind::Config, "function must be u or tau, got " + kind);
}

// ---- build ---------------------------------------------------------------------------------

void write_tree_svg(const fs::path& path, const Construction& c, double extent) {
  std::ofstream svg(path);
  const double pad = 1.5, size = extent + 2 * pad, px = 800;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px << "\" height=\"" << px << "\" viewBox=\""
      << -pad << ' ' << -pad << ' ' << size << ' ' << size << "\">\n";
  svg << "<g transform=\"matrix(1 0 0 -1 0 " << extent << ")\" stroke-linecap=\"butt\" fill=\"none\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << extent << "\" height=\"" << extent
      << "\" stroke=\"#bbb\" stroke-width=\"0.02\"/>\n";
  for (std::size_t i = 0; i < c.count; ++i) {
    const auto& t = c.tree.tubes[i];
    const char* colour = t.role == TubeRole::Handle ? "#c0392b" : t.role == TubeRole::Thin ? "#2471a3"
                         : t.role == TubeRole::Wide ? "#7d3c98" : "#229954";
    svg << "<line x1=\"" << t.a[0] << "\" y1=\"" << t.a[1] << "\" x2=\"" << t.b[0] << "\" y2=\"" << t.b[1]
        << "\" stroke=\"" << colour << "\" stroke-opacity=\"0.6\" stroke-width=\"" << std::max(t.diameter, 0.02)
        << "\"/>\n";
  }
  svg << "</g>\n</svg>\n";
}

int cmd_build(const RunConfig& cfg, const std::string& kind) {
  const auto params = make_params(cfg);
  if (cfg.k < 1 || cfg.k > 12) throw Error(ErrorKind::ParameterRange, "k must lie in [1, 12]");
  const auto c = construct(params, kind, cfg.k);
  const auto dir = out_dir(cfg);

  ordered_json tree;
  tree["dim"] = c.dim;
  tree["rank"] = c.tree.rank;
  tree["eps1"] = num(c.tree.eps1);
  tree["tube_count"] = c.count;
  ordered_json scales = ordered_json::object();
  for (const auto& [k, s] : c.tree.scales) scales[std::to_string(k)] = {{"s", s.s}, {"eps", num(s.eps)}};
  tree["scales"] = scales;
  ordered_json widths = ordered_json::object();
  for (const auto& [k, w] : c.tree.handle_widths) widths[std::to_string(k)] = num(w);
  tree["handle_widths"] = widths;
  ordered_json tubes = ordered_json::array();
  for (std::size_t i = 0; i < c.count; ++i) {
    const auto& t = c.tree.tubes[i];
    tubes.push_back({{"a", point_json(t.a)}, {"b", point_json(t.b)}, {"diameter", num(t.diameter)},
                     {"tail", num(t.tail)}, {"rank", t.rank}, {"generation", t.generation},
                     {"role", role_name(t.role)}, {"branch", t.branch}, {"inner", t.inner},
                     {"parent", t.parent}, {"log_coef", num(c.coef[i])}});
  }
  tree["tubes"] = tubes;
  std::ofstream(dir / "tree.json") << tree.dump(2) << "\n";

  ordered_json fn;
  fn["function"] = kind;
  fn["dim"] = cfg.dim;
  fn["f"] = params.f.describe();
  fn["k"] = cfg.k;
  fn["pieces"] = c.count;
  fn["root"] = c.root;
  fn["log_threshold"] = num(log_threshold(params, cfg.k));
  ordered_json levels = ordered_json::array();
  for (const auto& l : c.levels)
    levels.push_back({{"k", l.k}, {"handle_width", num(l.handle_width)}, {"handle_log_coef", num(l.handle_coef)},
                      {"log_M_prev", num(l.log_M_prev)}, {"raised", l.raised}, {"copy_log_coef", num(l.copy_coef)}});
  fn["levels"] = levels;
  // The full function is the sum of the 2^d reflections of this piece into the orthants.
  ordered_json comps = ordered_json::array();
  for (int m = 0; m < (1 << cfg.dim); ++m) {
    IPoint signs(cfg.dim);
    for (int a = 0; a < cfg.dim; ++a) signs[a] = (m >> a) & 1 ? -1 : 1;
    comps.push_back({{"signs", ipoint_json(signs)}});
  }
  fn["assembly"] = {{"kind", "orthant_sum"}, {"components", comps}};
  const auto cert = certify_dominance(c);
  fn["dominance"] = {{"min_margin", num(cert.min_margin)}, {"pairs", cert.pairs}};
  std::ofstream(dir / "function.json") << fn.dump(2) << "\n";

  if (cfg.dim == 2) write_tree_svg(dir / "tree.svg", c, std::ldexp(1.0, c.tree.rank));
  std::cout << "wrote " << (dir / "tree.json").string() << ", " << (dir / "function.json").string()
            << (cfg.dim == 2 ? ", tree.svg" : "") << " (" << c.count << " pieces)\n";
  return kExitPass;
}

// ---- verify --------------------------------------------------------------------------------

int cmd_verify(RunConfig cfg, const std::string& function_file, double grid_h, double radius) {
  std::string kind = "u";
  if (!function_file.empty()) {
    std::ifstream in(function_file);
    if (!in) throw Error(ErrorKind::Config, "cannot open " + function_file);
    const auto j = ordered_json::parse(in);
    kind = j.at("function").get<std::string>();
    cfg.dim = j.at("dim").get<int>();
    cfg.f = j.at("f").get<std::string>();
    cfg.k = j.at("k").get<int>();
  }
  if (!(grid_h > 0)) throw Error(ErrorKind::Config, "grid-h must be positive");
  if (radius <= 0) radius = grid_h;
  const auto params = make_params(cfg);
  const auto c = construct(params, kind, cfg.k);
  const double R = std::ldexp(1.0, cfg.k);
  const int d = cfg.dim;
  CompiledFunction u(c.node(), Point(d, -1.0), Point(d, R + 1));

  Verdict v("verify");
  v.config() = base_config(cfg);
  v.config()["function"] = kind;
  v.config()["k"] = cfg.k;
  v.config()["grid_h"] = num(grid_h);
  v.config()["radius"] = num(radius);
  v.config()["eps_d"] = num(cfg.eps_d);

  const auto sub = sub_mean_value(u, Point(d, 0.0), Point(d, R), grid_h, radius);
  v.add("sub_mean_value", sub.violations == 0,
        {{"points", sub.points}, {"violations", sub.violations}, {"min_log_excess", num(sub.min_log_excess)},
         {"argmin", sub.points ? point_json(sub.argmin) : ordered_json(nullptr)}});

  const auto cert = certify_dominance(c);
  const auto samp = sample_dominance(c, 64, false);
  v.add("dominance", cert.min_margin > 0 && samp.violations == 0,
        {{"min_margin", num(cert.min_margin)}, {"pairs", cert.pairs}, {"samples", samp.samples},
         {"sampled_violations", samp.violations}});

  const auto trunc = truncation_defect(c, u, 8);
  v.add("truncation", trunc.defective_faces == 0 ? Status::Pass : Status::Flagged,
        {{"faces", trunc.faces}, {"defective_faces", trunc.defective_faces},
         {"worst_log_jump", num(trunc.worst_log_jump)}});

  IntBox box{IPoint(d, 0), IPoint(d, static_cast<std::int64_t>(R))};
  OscillationOptions opt;
  opt.eps_d = cfg.eps_d;
  const auto census = rogue_census(u, box, params.f, opt);
  const auto tree = build_tree(params, cfg.k);
  const auto mask = branch_cube_mask(tree, box, true);
  std::int64_t nonbranch = 0, nonbranch_rogue = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) {
      ++nonbranch;
      nonbranch_rogue += census.cubes[i].classification == CubeClass::Rogue;
    }
  v.add("census_nonbranch_oscillating", nonbranch_rogue == 0,
        {{"nonbranch_cubes", nonbranch}, {"nonbranch_rogue", nonbranch_rogue}});
  v.add("census", census.uncertain == 0 ? Status::Pass : Status::Flagged,
        {{"cubes", census.cubes.size()}, {"rogue", census.rogue}, {"uncertain", census.uncertain},
         {"p1_failures", census.p1_failures}, {"p2_failures", census.p2_failures},
         {"f_value", num(census.f_value)}, {"gamma", num(census.gamma)}});

  const auto dir = out_dir(cfg);
  {
    std::ofstream csv(dir / "census.csv");
    write_census_csv(csv, census);
  }
  if (d == 2) {
    std::ofstream svg(dir / "census.svg");
    write_census_svg(svg, census, &mask);
  }
  v.write(dir / "verify.json");
  return v.exit_code();
}

// ---- growth --------------------------------------------------------------------------------

int cmd_growth(const RunConfig& cfg, int k_min, int k_max, int judge_from, int grid) {
  if (k_min < 1 || k_max < k_min || k_max > 10) throw Error(ErrorKind::ParameterRange, "need 1 <= k-min <= k-max <= 10");
  const auto params = make_params(cfg);
  const auto g = growth_profile(params, k_min, k_max, grid);
  Verdict v("growth");
  v.config() = base_config(cfg);
  v.config()["k_min"] = k_min;
  v.config()["k_max"] = k_max;
  v.config()["judged_from"] = judge_from;
  v.config()["grid"] = grid;

  ordered_json rows = ordered_json::array();
  bool below = true;
  double rmin = INFINITY, rmax = 0;
  for (std::size_t i = 0; i < g.k.size(); ++i) {
    const bool judged = g.k[i] >= judge_from;
    const bool ok = g.log_M_upper[i] <= g.log_threshold[i];
    if (judged) {
      below = below && ok;
      rmin = std::min(rmin, g.ratio[i]);
      rmax = std::max(rmax, g.ratio[i]);
    }
    rows.push_back({{"k", g.k[i]}, {"judged", judged}, {"log_sup_lower", num(g.log_M_lower[i])},
                    {"log_sup_upper", num(g.log_M_upper[i])}, {"log_threshold", num(g.log_threshold[i])},
                    {"below_threshold", ok}, {"denominator", num(g.denominator[i])}, {"ratio", num(g.ratio[i])}});
  }
  v.add("sup_below_threshold", below, {{"rows", rows}});
  const double spread = rmin > 0 && std::isfinite(rmin) ? rmax / rmin : INFINITY;
  v.add("ratio_bounded", spread < 4, {{"ratio_min", num(rmin)}, {"ratio_max", num(rmax)}, {"spread", num(spread)}});

  const auto dir = out_dir(cfg);
  {
    std::ofstream csv(dir / "growth.csv");
    write_growth_csv(csv, g);
  }
  v.write(dir / "growth.json");
  return v.exit_code();
}

// ---- lemma ---------------------------------------------------------------------------------

std::map<std::string, std::string> parse_fields(const std::string& s) {
  std::map<std::string, std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Config, "expected key=value in \"" + s + "\"");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error(ErrorKind::Config, "not a number: \"" + s + "\"");
  return x;
}

// random:density=zero|sqrt|linear|<exponent> | random:count=<n> | file:<path> | function:<function.json>
RogueConfiguration make_rogue(const RunConfig& cfg, const std::string& spec, std::string& description) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "random") {
    const auto fields = parse_fields(rest);
    std::int64_t count = 0;
    if (auto it = fields.find("count"); it != fields.end()) {
      count = static_cast<std::int64_t>(parse_number(it->second));
    } else if (auto jt = fields.find("density"); jt != fields.end()) {
      const std::string& dv = jt->second;
      const double p = dv == "zero" ? -1 : dv == "sqrt" ? 0.5 : dv == "linear" ? 1.0 : parse_number(dv);
      count = p < 0 || dv == "0" ? 0 : std::llround(std::pow(cfg.N, p));
    } else {
      throw Error(ErrorKind::Config, "random E needs density= or count=");
    }
    description = "random, " + std::to_string(count) + " cubes, seed " + std::to_string(cfg.seed);
    return RogueConfiguration::random(cfg.N, cfg.dim, count, cfg.seed);
  }
  if (kind == "file") {
    std::ifstream in(rest);
    if (!in) throw Error(ErrorKind::Config, "cannot open " + rest);
    std::vector<LatticeCube> cubes;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::stringstream ls(line);
      IPoint c(cfg.dim);
      for (int a = 0; a < cfg.dim; ++a)
        if (!(ls >> c[a])) throw Error(ErrorKind::Config, "bad cube line: " + line);
      cubes.push_back({c});
    }
    description = "file " + rest;
    return RogueConfiguration(cfg.N, cfg.dim, std::move(cubes));
  }
  if (kind == "function") {
    std::ifstream in(rest);
    if (!in) throw Error(ErrorKind::Config, "cannot open " + rest);
    const auto j = ordered_json::parse(in);
    if (j.at("dim").get<int>() != cfg.dim) throw Error(ErrorKind::Config, "function dimension differs from --d");
    GrowthParameters params{GrowthFunction::parse(j.at("f").get<std::string>()), cfg.dim};
    params.validate();
    const auto c = construct(params, j.at("function").get<std::string>(), j.at("k").get<int>());
    const auto full = assemble_full(c.node());
    const double half = cfg.N / 2.0;
    CompiledFunction u(full, Point(cfg.dim, -half - 1), Point(cfg.dim, half + 1));
    IntBox box{IPoint(cfg.dim, -cfg.N / 2), IPoint(cfg.dim, cfg.N / 2)};
    OscillationOptions opt;
    opt.eps_d = cfg.eps_d;
    const auto census = rogue_census(u, box, params.f, opt);
    std::vector<LatticeCube> cubes;
    for (const auto& r : census.cubes)
      if (r.classification == CubeClass::Rogue) cubes.push_back(r.cube);
    description = "rogue cubes of " + rest;
    return RogueConfiguration(cfg.N, cfg.dim, std::move(cubes));
  }
  throw Error(ErrorKind::Config, "unknown E specification \"" + spec + "\"");
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ";" : "") + std::to_string(xs[i]);
  return s;
}

int cmd_lemma(const RunConfig& cfg, const std::string& E_spec) {
  LemmaConfig lc;
  lc.N = cfg.N;
  lc.dim = cfg.dim;
  lc.delta0 = cfg.delta0;
  lc.alpha = cfg.alpha;
  lc.c0 = cfg.c0;
  lc.validate();
  std::string description;
  const auto rogue = make_rogue(cfg, E_spec, description);
  const auto rep = run_lemma(rogue, lc);

  Verdict v("lemma");
  v.config() = {{"d", cfg.dim}, {"N", cfg.N}, {"E", E_spec}, {"E_description", description}, {"seed", cfg.seed},
                {"delta0", num(lc.delta0_value())}, {"alpha", num(cfg.alpha)}, {"c0", num(cfg.c0)}};
  const double needed = 10.0 / 11.0 * static_cast<double>(rep.cubes);
  const ordered_json layers = rep.layer_counts;
  // Above the density gate the lemma says nothing; the remaining checks are informational.
  v.add("c0_gate", rep.c0_gate ? Status::Pass : Status::Flagged, {{"rogue", rep.rogue}, {"cubes", rep.cubes}});
  v.add("property_M", rep.property_M,
        {{"max_layer", lc.max_layer()}, {"first_bad_layer", rep.first_bad_layer}, {"layer_counts", layers}});
  v.add("x_fraction", rep.x_large,
        {{"x_count", rep.x_count}, {"required", num(needed)}, {"x_central", rep.x_central},
         {"central", rep.central}});
  v.add("kappa_bound", rep.kappa_bound, {{"sum_inv_M", num(rep.sum_inv_M)}, {"first_bad_cube", rep.first_bad_cube}});
  v.add("gap_property", rep.gap_property, ordered_json::object());
  v.add("claim1", rep.rogue == 0 ? Status::Flagged : Status::Pass,
        {{"lhs", num(rep.claim1_lhs)}, {"ratio_to_E", num(rep.claim1_ratio)}, {"cover_size", rep.cover.cubes.size()},
         {"m0", rep.cover.m0}, {"m_bar", rep.cover.m_bar}});
  if (rep.vacuous) v.add("non_vacuous", Status::Flagged, {{"layer_limit", num(lc.layer_limit())}});
  v.add("bound", Status::Pass,
        {{"bound_value", num(bound_value(cfg.N, static_cast<double>(rep.rogue), cfg.dim))},
         {"psi_at_density", num(psi(static_cast<double>(rep.rogue) / cfg.N, cfg.dim))}});

  const auto dir = out_dir(cfg);
  {
    std::ofstream csv(dir / "chains.csv");
    csv << "corner";
    csv << ",rho,central,in_X,B,K,kappa\n";
    const auto cubes = enumerate_basic_cubes(rogue.box());
    char buf[64];
    for (std::size_t i = 0; i < cubes.size() && i < rep.chains.size(); ++i) {
      const auto& ch = rep.chains[i];
      std::string corner;
      for (int a = 0; a < cfg.dim; ++a) corner += (a ? " " : "") + std::to_string(cubes[i].corner[a]);
      std::snprintf(buf, sizeof buf, "%.6g", rep.rho.rho[i]);
      csv << corner << ',' << buf << ',' << ch.central << ',' << ch.in_X << ',';
      std::snprintf(buf, sizeof buf, "%.6g", ch.B);
      csv << buf << ',' << join(ch.K) << ',' << join(ch.kappa) << '\n';
    }
  }
  v.write(dir / "lemma.json");
  return v.exit_code();
}

// ---- potential -----------------------------------------------------------------------------

int cmd_potential(const RunConfig& cfg, const std::string& oracle, std::int64_t walks, std::int64_t claim_walks) {
  const std::vector<std::string> known = {"all", "annulus", "circle", "segment", "claims", "obs1", "frostman"};
  if (std::find(known.begin(), known.end(), oracle) == known.end())
    throw Error(ErrorKind::Config, "unknown oracle " + oracle);
  if (cfg.dim < 2 || cfg.dim > 3) throw Error(ErrorKind::Config, "dimension must be 2 or 3");
  if (walks <= 0 || claim_walks <= 0) throw Error(ErrorKind::Config, "walk counts must be positive");
  const int d = cfg.dim;
  auto want = [&](const char* name) { return oracle == "all" || oracle == name; };
  const auto dir = out_dir(cfg);

  Verdict v("potential");
  v.config() = {{"d", d}, {"oracle", oracle}, {"walks", walks}, {"claim_walks", claim_walks}, {"seed", cfg.seed}};

  if (want("annulus")) {
    Point x(d, 0.0);
    x[0] = 0.5;
    SphereSet E(Point(d, 0.0), 0.25);
    const auto w = wos_harmonic_measure(x, E, walks, cfg.seed);
    const double target = d == 2 ? 0.5 : 1.0 / 3.0;
    const double z = (w.p - target) / w.standard_error;
    v.add("wos_annulus", std::abs(z) <= 3 && !w.flagged,
          {{"estimate", num(w.p)}, {"standard_error", num(w.standard_error)}, {"target", num(target)},
           {"z", num(z)}, {"capped", w.capped}});
  }
  if (d == 2 && want("circle")) {
    std::vector<Point> pts;
    for (int i = 0; i < 512; ++i) {
      const double t = 2 * std::numbers::pi * i / 512;
      pts.push_back(Point{0.25 * std::cos(t), 0.25 * std::sin(t)});
    }
    const auto e = equilibrium(pts);
    const double target = -std::log(4.0);
    v.add("equilibrium_circle", std::abs(e.energy / target - 1) <= 0.05,
          {{"energy", num(e.energy)}, {"target", num(target)}, {"residual", num(e.residual)},
           {"iterations", e.iterations}});
  }
  if (d == 2 && want("segment")) {
    std::vector<Point> pts;
    for (int i = 0; i < 512; ++i) pts.push_back(Point{-1 + 2 * (i + 0.5) / 512, 0.0});
    const auto e = equilibrium(pts);
    const double target = std::log(0.5);
    v.add("equilibrium_segment", std::abs(e.energy / target - 1) <= 0.05,
          {{"energy", num(e.energy)}, {"target", num(target)}, {"residual", num(e.residual)},
           {"iterations", e.iterations}});
  }
  if (want("claims")) {
    const auto rep = check_claim1(claim_family(d), claim_walks, cfg.seed);
    const double spread = rep.min_ratio > 0 ? rep.max_ratio / rep.min_ratio : INFINITY;
    v.add("claim1_positive", rep.min_ratio > 0, {{"min_ratio", num(rep.min_ratio)}});
    v.add("claim1_stable", spread < 50, {{"max_ratio", num(rep.max_ratio)}, {"spread", num(spread)}});
    v.add("claim4_direction", rep.claim4_holds, {{"C", num(rep.C_fit)}});
    std::ofstream csv(dir / "claims.csv");
    csv << "shape,scale,content_upper,content_lower,omega,omega_se,energy,omega_over_content,content_times_neg_energy\n";
    char buf[256];
    for (const auto& r : rep.rows) {
      std::snprintf(buf, sizeof buf, "%s,%.4g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n", r.name.c_str(), r.scale,
                    r.content_upper, r.content_lower, r.omega, r.omega_se, r.energy, r.ratio, r.claim4);
      csv << buf;
    }
  }
  if (want("obs1")) {
    // Sharp case: harmonic in the annulus, zero on the inner ball, one on the unit sphere.
    const double r0 = 0.25;
    std::function<double(const Point&)> u = [=](const Point& x) {
      const double r = std::max(norm(x), 1e-300);
      const double v = d == 2 ? std::log(r / r0) / std::log(1 / r0) : (1 / r0 - 1 / r) / (1 / r0 - 1);
      return std::max(0.0, v);
    };
    Point x0(d, 0.0);
    x0[0] = 0.5;
    BallSet E(Point(d, 0.0), r0);
    const auto o = check_obs1(u, x0, E, walks, cfg.seed + 1);
    v.add("obs1_sharp", o.chain_holds && std::abs(o.gap_in_se) <= 3,
          {{"u_x0", num(o.u_x0)}, {"sup", num(o.sup)}, {"omega", num(o.omega)}, {"omega_se", num(o.omega_se)},
           {"predicted", num(o.predicted)}, {"gap_in_se", num(o.gap_in_se)}});
  }
  if (want("frostman")) {
    // A diagonal chain of cells: the growth constant should settle as the depth grows.
    ordered_json rows = ordered_json::array();
    double first = 0, last = 0;
    for (int D = 5; D <= 7; ++D) {
      std::vector<IPoint> cells;
      const std::int64_t side = std::int64_t{1} << D;
      for (std::int64_t i = 0; i < side; ++i) {
        IPoint c(d, side / 2);
        c[0] = i;
        c[1] = i;
        cells.push_back(c);
      }
      const auto fr = frostman(cells, D, 4000, cfg.seed);
      if (D == 5) first = fr.growth_constant;
      last = fr.growth_constant;
      rows.push_back({{"depth", D}, {"mass", num(fr.total_mass)}, {"growth_constant", num(fr.growth_constant)}});
    }
    v.add("frostman_stable", last <= 2 * first && first <= 2 * last ? Status::Pass : Status::Flagged, {{"rows", rows}});
  }
  v.write(dir / "potential.json");
  return v.exit_code();
}

// ---- report --------------------------------------------------------------------------------

int cmd_report(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Config, "no such directory " + cfg.out);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json" && e.path().filename() != "report.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  ordered_json summary = ordered_json::array();
  bool failed = false;
  std::ofstream md(dir / "report.md");
  md << "| report | check | status |\n|---|---|---|\n";
  for (const auto& f : files) {
    std::ifstream in(f);
    ordered_json j;
    try {
      j = ordered_json::parse(in);
    } catch (const std::exception&) {
      continue;
    }
    if (!j.contains("checks")) continue;
    for (const auto& c : j["checks"]) {
      const auto status = c["status"].get<std::string>();
      failed = failed || status == "fail";
      summary.push_back({{"report", f.filename().string()}, {"check", c["name"]}, {"status", status}});
      md << "| " << f.filename().string() << " | " << c["name"].get<std::string>() << " | " << status << " |\n";
    }
  }
  ordered_json doc = {{"command", "report"}, {"status", failed ? "fail" : "pass"}, {"checks", summary}};
  std::ofstream(dir / "report.json") << doc.dump(2) << "\n";
  std::cout << (dir / "report.md").string() << ": " << (failed ? "FAIL" : "PASS") << " (" << summary.size()
            << " checks)\n";
  return failed ? kExitFail : kExitPass;
}

bool is_config_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::Construction:
    case ErrorKind::Convergence: return false;
    default: return true;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oscillab: oscillating subharmonic constructions, lemma engine and potential checks"};
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--threads", cfg.threads, "worker cap (default: OSCILLAB_THREADS or all cores)");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--d", cfg.dim, "dimension (2 or 3)")->check(CLI::IsMember({2, 3}));
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_option("--seed", cfg.seed, "random seed");
  };
  auto growth_opts = [&](CLI::App* sub) {
    sub->add_option("--f", cfg.f, "growth function, e.g. \"t^1.5\" or \"t^2/log(2+t)\"");
    sub->add_option("--k", cfg.k, "scale index");
    sub->add_option("--eps-d", cfg.eps_d, "content threshold for the oscillation test");
  };

  std::string function_kind = "u";
  auto* build = app.add_subcommand("build", "build a function and its tree");
  common(build);
  growth_opts(build);
  build->add_option("--function", function_kind, "u or tau");

  std::string function_file;
  double grid_h = 0.0625, radius = 0;
  auto* verify = app.add_subcommand("verify", "sub-mean-value, dominance and census checks");
  common(verify);
  growth_opts(verify);
  verify->add_option("--function", function_file, "function.json written by build");
  verify->add_option("--grid-h", grid_h, "grid spacing for the sub-mean-value test");
  verify->add_option("--radius", radius, "sphere radius (default: grid spacing)");

  int k_min = 1, k_max = 6, judge_from = 3, grid = 128;
  auto* growth = app.add_subcommand("growth", "sup of u_k against the threshold and the growth denominator");
  common(growth);
  growth_opts(growth);
  growth->add_option("--k-min", k_min);
  growth->add_option("--k-max", k_max);
  growth->add_option("--judge-from", judge_from, "smallest k held to the threshold");
  growth->add_option("--grid", grid, "samples per axis");

  std::string E_spec = "random:density=sqrt";
  auto* lemma = app.add_subcommand("lemma", "run the covering lemma engine");
  common(lemma);
  lemma->add_option("--N", cfg.N, "side of Q (power of two)");
  lemma->add_option("--E", E_spec, "random:density=zero|sqrt|linear|<exponent>, random:count=<n>, file:<path>, function:<json>");
  lemma->add_option("--delta0", cfg.delta0, "density threshold (0: 4^-d)");
  lemma->add_option("--alpha", cfg.alpha);
  lemma->add_option("--c0", cfg.c0);
  lemma->add_option("--eps-d", cfg.eps_d);

  std::string oracle = "all";
  std::int64_t walks = 100000, claim_walks = 20000;
  auto* potential = app.add_subcommand("potential", "harmonic measure, equilibrium and claim checks");
  common(potential);
  potential->add_option("--oracle", oracle, "all, annulus, circle, segment, claims, obs1, frostman");
  potential->add_option("--walks", walks, "walks for the annulus and sharp-case estimates");
  potential->add_option("--claim-walks", claim_walks, "walks per family member");

  auto* report = app.add_subcommand("report", "collect the JSON verdicts in --out into report.json / report.md");
  report->add_option("--out", cfg.out, "directory holding the reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  if (cfg.threads == 0)
    if (const char* env = std::getenv("OSCILLAB_THREADS")) cfg.threads = std::atoi(env);
  set_thread_count(std::max(0, cfg.threads));

  try {
    if (*build) return cmd_build(cfg, function_kind);
    if (*verify) return cmd_verify(cfg, function_file, grid_h, radius);
    if (*growth) return cmd_growth(cfg, k_min, k_max, judge_from, grid);
    if (*lemma) return cmd_lemma(cfg, E_spec);
    if (*potential) return cmd_potential(cfg, oracle, walks, claim_walks);
    if (*report) return cmd_report(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e.kind()) ? kExitConfig : kExitFail;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
