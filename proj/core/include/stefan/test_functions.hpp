#pragma once

#include <array>
#include <vector>

#include "stefan/grid.hpp"

namespace stefan {

/// Smooth compactly supported radial bump A*(1 - |x-c|^2/rho^2)^4 with exact
/// gradient and Laplacian (C^3 at the support edge).
struct SpatialBump {
  int dim = 1;
  std::array<double, 2> center{0.0, 0.0};
  double radius = 1.0;
  double amplitude = 1.0;

  double value(const std::array<double, 2>& x) const;
  std::array<double, 2> gradient(const std::array<double, 2>& x) const;
  double laplacian(const std::array<double, 2>& x) const;

  /// Support strictly inside the grid box with the given margin.
  bool supported_inside(const Grid& g, double margin) const;

  Field sample(const Grid& g) const;
};

/// Time factor: either a polynomial c0 + c1 t + c2 t^2 (never vanishing need)
/// or a compact bump (1 - s^2)^4 on (t_lo, t_hi).
struct TimeFactor {
  enum class Kind { poly, bump };
  Kind kind = Kind::poly;
  double c0 = 1.0, c1 = 0.0, c2 = 0.0;  // poly coefficients
  double t_lo = 0.0, t_hi = 1.0;        // bump support

  static TimeFactor poly(double a0, double a1 = 0.0, double a2 = 0.0);
  static TimeFactor bump(double lo, double hi);

  double value(double t) const;
  double dt(double t) const;
};

/// Tensor product test function phi(x, t) = space(x) * time(t).
struct SpaceTimeTestFunction {
  SpatialBump space;
  TimeFactor time;

  double value(const std::array<double, 2>& x, double t) const {
    return space.value(x) * time.value(t);
  }
  double dt(const std::array<double, 2>& x, double t) const {
    return space.value(x) * time.dt(t);
  }
  double laplacian(const std::array<double, 2>& x, double t) const {
    return space.laplacian(x) * time.value(t);
  }
};

/// The built-in family used by identity checks: five bump/time-poly products
/// sized for a ball of the given radius.
std::vector<SpaceTimeTestFunction> builtin_test_functions(int dim, double ball_radius);

}  // namespace stefan
