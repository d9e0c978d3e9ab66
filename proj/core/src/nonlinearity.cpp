#include "stefan/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stefan {

Nonlinearity::Nonlinearity(std::vector<std::pair<double, double>> breakpoints,
                           double slope_at_infinity, double offset_bound)
    : bp_(std::move(breakpoints)), a_(slope_at_infinity), b_(offset_bound) {
  if (bp_.empty()) throw std::invalid_argument("Nonlinearity: need at least one breakpoint");
  if (a_ < 0) throw std::invalid_argument("Nonlinearity: tail slope must be >= 0");
  for (size_t i = 1; i < bp_.size(); ++i) {
    if (!(bp_[i].first > bp_[i - 1].first))
      throw std::invalid_argument("Nonlinearity: breakpoints must be strictly increasing");
    if (bp_[i].second < bp_[i - 1].second)
      throw std::invalid_argument("Nonlinearity: map must be nondecreasing");
  }
  lipschitz_ = a_;
  for (size_t i = 1; i < bp_.size(); ++i) {
    const double s = (bp_[i].second - bp_[i - 1].second) / (bp_[i].first - bp_[i - 1].first);
    lipschitz_ = std::max(lipschitz_, s);
  }
}

Nonlinearity Nonlinearity::two_phase() {
  return Nonlinearity({{-1.0, 0.0}, {1.0, 0.0}}, 1.0, 1.0);
}

Nonlinearity Nonlinearity::identity() {
  return Nonlinearity({{0.0, 0.0}}, 1.0, 0.0);
}

double Nonlinearity::eval(double u) const {
  if (u <= bp_.front().first) return bp_.front().second + a_ * (u - bp_.front().first);
  if (u >= bp_.back().first) return bp_.back().second + a_ * (u - bp_.back().first);
  auto it = std::upper_bound(bp_.begin(), bp_.end(), u,
                             [](double x, const auto& p) { return x < p.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double s = (hi.second - lo.second) / (hi.first - lo.first);
  return lo.second + s * (u - lo.first);
}

double Nonlinearity::slope(double u) const {
  if (u < bp_.front().first || u >= bp_.back().first) return a_;
  auto it = std::upper_bound(bp_.begin(), bp_.end(), u,
                             [](double x, const auto& p) { return x < p.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  return (hi.second - lo.second) / (hi.first - lo.first);
}

double Nonlinearity::difference_quotient(double u, double v) const {
  if (u == v) return 0.0;
  return (eval(u) - eval(v)) / (u - v);
}

Nonlinearity::Validation Nonlinearity::validate(double lo, double hi, int n_samples) const {
  if (n_samples < 2) throw std::invalid_argument("validate: need at least 2 samples");
  if (!(hi > lo)) throw std::invalid_argument("validate: empty interval");
  Validation rep;
  rep.min_slope = a_;
  double prev_u = lo;
  double prev_a = eval(lo);
  rep.worst_offset = std::abs(prev_a - a_ * lo);
  for (int i = 1; i < n_samples; ++i) {
    const double u = lo + (hi - lo) * i / (n_samples - 1);
    const double au = eval(u);
    const double s = (au - prev_a) / (u - prev_u);
    rep.worst_slope = std::max(rep.worst_slope, s);
    rep.min_slope = std::min(rep.min_slope, s);
    rep.worst_offset = std::max(rep.worst_offset, std::abs(au - a_ * u));
    prev_u = u;
    prev_a = au;
  }
  const double tol = 1e-12 * std::max(1.0, lipschitz_);
  if (rep.min_slope < -tol) {
    rep.pass = false;
    rep.violations.push_back("decreasing segment: slope " + std::to_string(rep.min_slope));
  }
  if (rep.worst_slope > lipschitz_ + tol) {
    rep.pass = false;
    rep.violations.push_back("Lipschitz bound exceeded: " + std::to_string(rep.worst_slope) +
                             " > " + std::to_string(lipschitz_));
  }
  if (rep.worst_offset > b_ + tol) {
    rep.pass = false;
    rep.violations.push_back("offset bound exceeded: |alpha(u) - a*u| = " +
                             std::to_string(rep.worst_offset) + " > " + std::to_string(b_));
  }
  return rep;
}

}  // namespace stefan
