#include "oscillab/growth.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

#include "oscillab/error.hpp"

namespace oscillab {
namespace {

[[noreturn]] void bad(const std::string& text, const std::string& why) {
  throw Error(ErrorKind::Config, "cannot parse f = \"" + text + "\": " + why);
}

double parse_number(const std::string& s, const std::string& text) {
  std::string body = s;
  if (body.size() >= 2 && body.front() == '(' && body.back() == ')') body = body.substr(1, body.size() - 2);
  auto slash = body.find('/');
  try {
    if (slash != std::string::npos) {
      std::size_t used = 0;
      double num = std::stod(body.substr(0, slash), &used);
      if (used != slash) bad(text, "malformed rational '" + s + "'");
      std::string den_s = body.substr(slash + 1);
      double den = std::stod(den_s, &used);
      if (used != den_s.size() || den == 0) bad(text, "malformed rational '" + s + "'");
      return num / den;
    }
    std::size_t used = 0;
    double v = std::stod(body, &used);
    if (used != body.size()) bad(text, "malformed number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    bad(text, "malformed number '" + s + "'");
  }
}

// Splits on top-level '*' and '/', remembering which operator preceded each factor.
std::vector<std::pair<char, std::string>> split_factors(const std::string& s, const std::string& text) {
  std::vector<std::pair<char, std::string>> out;
  int depth = 0;
  char op = '*';
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0) bad(text, "unbalanced parentheses");
    if (depth == 0 && (c == '*' || c == '/')) {
      if (cur.empty()) bad(text, "empty factor");
      out.emplace_back(op, cur);
      cur.clear();
      op = c;
      continue;
    }
    cur.push_back(c);
  }
  if (depth != 0) bad(text, "unbalanced parentheses");
  if (cur.empty()) bad(text, "empty factor");
  out.emplace_back(op, cur);
  return out;
}

}  // namespace

GrowthFunction::GrowthFunction(double coef, double power, int log_power, double log_shift)
    : coef_(coef), power_(power), log_power_(log_power), log_shift_(log_shift) {
  if (!(coef > 0)) throw Error(ErrorKind::Config, "growth coefficient must be positive");
  if (log_shift != 0.0 && log_shift != 2.0) throw Error(ErrorKind::Config, "log shift must be 0 or 2");
}

GrowthFunction GrowthFunction::parse(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) bad(text, "empty expression");
  double coef = 1.0, power = 0.0, shift = 2.0;
  int log_power = 0;
  bool saw_log = false;
  for (auto& [op, factor] : split_factors(s, text)) {
    const double sign = op == '/' ? -1.0 : 1.0;
    std::string base = factor, expo;
    int depth = 0;
    for (std::size_t i = 0; i < factor.size(); ++i) {
      if (factor[i] == '(') ++depth;
      if (factor[i] == ')') --depth;
      if (depth == 0 && factor[i] == '^') {
        base = factor.substr(0, i);
        expo = factor.substr(i + 1);
        break;
      }
    }
    double e = expo.empty() ? 1.0 : parse_number(expo, text);
    if (base == "t") {
      power += sign * e;
    } else if (base == "log(2+t)" || base == "log(t+2)" || base == "log(t)") {
      if (e != std::floor(e)) bad(text, "log exponent must be an integer");
      const double this_shift = base == "log(t)" ? 0.0 : 2.0;
      if (saw_log && this_shift != shift) bad(text, "mixed log(t) and log(2+t) factors");
      shift = this_shift;
      saw_log = true;
      log_power += static_cast<int>(sign * e);
    } else if (expo.empty()) {
      double v = parse_number(base, text);
      if (!(v > 0)) bad(text, "constant factors must be positive");
      coef = op == '/' ? coef / v : coef * v;
    } else {
      bad(text, "unsupported factor '" + factor + "'");
    }
  }
  return GrowthFunction(coef, power, log_power, shift);
}

double GrowthFunction::operator()(double t) const { return std::exp(log_value(t)); }

double GrowthFunction::log_value(double t) const {
  if (!(t > 0)) throw Error(ErrorKind::Domain, "growth function evaluated at t <= 0");
  double v = std::log(coef_) + power_ * std::log(t);
  if (log_power_ != 0) {
    double l = std::log(log_shift_ + t);
    if (!(l > 0)) return -INFINITY;
    v += log_power_ * std::log(l);
  }
  return v;
}

std::string GrowthFunction::describe() const {
  std::ostringstream os;
  os.precision(12);
  if (coef_ != 1.0) os << coef_ << "*";
  os << "t^" << power_;
  if (log_power_ != 0) os << "*" << (log_shift_ == 0 ? "log(t)" : "log(2+t)") << "^" << log_power_;
  return os.str();
}

void GrowthParameters::validate(double t_max, int samples) const {
  if (dim < 2 || dim > 3) throw Error(ErrorKind::Config, "dimension must be 2 or 3");
  if (f.power() < 0 || f.power() > dim)
    throw Error(ErrorKind::Config, "index of f must lie in [0, d], got " + std::to_string(f.power()));
  double prev = -INFINITY;
  for (int i = 0; i < samples; ++i) {
    const double t = std::exp(std::log(t_max) * i / (samples - 1));
    const double lv = f.log_value(t);
    if (lv < prev - 1e-12) throw Error(ErrorKind::Config, "f is not monotone near t = " + std::to_string(t));
    if (lv > dim * std::log(t) + 1e-9)
      throw Error(ErrorKind::Config, "f exceeds t^d at t = " + std::to_string(t) + " (" + f.describe() + ")");
    prev = lv;
  }
}

RegularityReport GrowthParameters::regularity(int max_exponent) const {
  RegularityReport rep;
  const double lo = std::pow(2.0, -(dim + 1)), hi = 2.0 / 3.0;
  std::vector<double> ratio(max_exponent);
  for (int j = 0; j < max_exponent; ++j) {
    const double t = std::ldexp(1.0, j);
    ratio[j] = std::exp(f.log_value(t) - f.log_value(2 * t));
  }
  int start = max_exponent;
  for (int j = max_exponent - 1; j >= 0; --j) {
    if (!(ratio[j] > lo && ratio[j] < hi)) break;
    start = j;
  }
  if (start < max_exponent) {
    rep.window_found = true;
    rep.t0 = std::ldexp(1.0, start);
    rep.min_ratio = rep.max_ratio = ratio[start];
    for (int j = start; j < max_exponent; ++j) {
      rep.min_ratio = std::min(rep.min_ratio, ratio[j]);
      rep.max_ratio = std::max(rep.max_ratio, ratio[j]);
    }
  }
  return rep;
}

double GrowthParameters::relative_handle_width(int k) const {
  const double t = std::ldexp(1.0, k);
  return std::exp((f.log_value(t) - k * dim * std::log(2.0)) / (dim - 1));
}

}  // namespace oscillab
