#pragma once

#include <string>

namespace oscillab {

// Comparison function c * t^p * log(shift + t)^q with shift in {0, 2}.
class GrowthFunction {
 public:
  GrowthFunction() = default;
  GrowthFunction(double coef, double power, int log_power, double log_shift = 2.0);

  // Accepts forms such as "t^1.5", "2*t^(3/2)*log(2+t)^2", "t^2/log(t)", "t".
  static GrowthFunction parse(const std::string& text);

  double operator()(double t) const;
  double log_value(double t) const;
  double coefficient() const { return coef_; }
  double power() const { return power_; }
  int log_power() const { return log_power_; }
  double log_shift() const { return log_shift_; }
  std::string describe() const;

 private:
  double coef_ = 1.0;
  double power_ = 1.0;
  int log_power_ = 0;
  double log_shift_ = 2.0;
};

struct RegularityReport {
  double t0 = 0;            // smallest sampled 2^j from which the ratio window holds
  bool window_found = false;
  double min_ratio = 0;     // extremes of f(t)/f(2t) over t >= t0
  double max_ratio = 0;
};

struct GrowthParameters {
  GrowthFunction f;
  int dim = 2;

  // Index in [0, d], monotone and f <= t^d on [1, t_max]; throws Config on failure.
  void validate(double t_max = 1 << 20, int samples = 1000) const;
  RegularityReport regularity(int max_exponent = 24) const;
  // (f(2^k) / 2^{kd})^{1/(d-1)}.
  double relative_handle_width(int k) const;
};

}  // namespace oscillab
