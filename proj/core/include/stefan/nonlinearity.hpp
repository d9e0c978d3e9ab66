#pragma once

#include <string>
#include <utility>
#include <vector>

namespace stefan {

/// Monotone piecewise-linear constitutive map from enthalpy to temperature.
/// Stored as breakpoints; both tails continue with slope `a`, so the
/// offset |alpha(u) - a*u| stays bounded by `offset_bound`.
class Nonlinearity {
 public:
  /// Breakpoints must be strictly increasing in u and nondecreasing in value.
  Nonlinearity(std::vector<std::pair<double, double>> breakpoints, double slope_at_infinity,
               double offset_bound);

  /// The standard two-phase map: flat on [-1, 1], slope 1 outside.
  static Nonlinearity two_phase();

  /// Identity map (plain heat equation), a = 1, offset 0.
  static Nonlinearity identity();

  double eval(double u) const;
  double operator()(double u) const { return eval(u); }

  /// Slope of the active segment at u (tail slope outside the breakpoints;
  /// at a breakpoint, the slope of the right segment).
  double slope(double u) const;

  /// (eval(u) - eval(v)) / (u - v), defined as 0 when u == v exactly.
  double difference_quotient(double u, double v) const;

  double slope_at_infinity() const { return a_; }
  double offset_bound() const { return b_; }
  double lipschitz() const { return lipschitz_; }
  const std::vector<std::pair<double, double>>& breakpoints() const { return bp_; }

  struct Validation {
    bool pass = true;
    double worst_offset = 0.0;      // max |alpha(u) - a*u| over samples
    double worst_slope = 0.0;       // max difference quotient over sample pairs
    double min_slope = 0.0;         // min difference quotient (negative => fail)
    std::vector<std::string> violations;
  };

  /// Samples [lo, hi] at n_samples points and checks monotonicity, the
  /// Lipschitz constant, and the offset bound. n_samples >= 2.
  Validation validate(double lo, double hi, int n_samples) const;

 private:
  std::vector<std::pair<double, double>> bp_;
  double a_ = 1.0;
  double b_ = 0.0;
  double lipschitz_ = 1.0;
};

}  // namespace stefan
