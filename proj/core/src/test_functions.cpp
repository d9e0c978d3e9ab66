#include "stefan/test_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace stefan {

double SpatialBump::value(const std::array<double, 2>& x) const {
  const double dx = x[0] - center[0];
  const double dy = dim == 2 ? x[1] - center[1] : 0.0;
  const double q = (dx * dx + dy * dy) / (radius * radius);
  if (q >= 1.0) return 0.0;
  const double p = 1.0 - q;
  return amplitude * p * p * p * p;
}

std::array<double, 2> SpatialBump::gradient(const std::array<double, 2>& x) const {
  const double dx = x[0] - center[0];
  const double dy = dim == 2 ? x[1] - center[1] : 0.0;
  const double q = (dx * dx + dy * dy) / (radius * radius);
  if (q >= 1.0) return {0.0, 0.0};
  const double p = 1.0 - q;
  const double f = -8.0 * amplitude * p * p * p / (radius * radius);
  return {f * dx, dim == 2 ? f * dy : 0.0};
}

double SpatialBump::laplacian(const std::array<double, 2>& x) const {
  const double dx = x[0] - center[0];
  const double dy = dim == 2 ? x[1] - center[1] : 0.0;
  const double q = (dx * dx + dy * dy) / (radius * radius);
  if (q >= 1.0) return 0.0;
  const double p = 1.0 - q;
  return 8.0 * amplitude / (radius * radius) * p * p * (6.0 * q - dim * p);
}

bool SpatialBump::supported_inside(const Grid& g, double margin) const {
  for (int axis = 0; axis < g.dim; ++axis) {
    if (center[axis] - radius < g.box_lo(axis) + margin) return false;
    if (center[axis] + radius > g.box_hi(axis) - margin) return false;
  }
  return true;
}

Field SpatialBump::sample(const Grid& g) const {
  Field f(g);
  for (int c = 0; c < g.size(); ++c) f[c] = value(g.center(c));
  return f;
}

TimeFactor TimeFactor::poly(double a0, double a1, double a2) {
  TimeFactor t;
  t.kind = Kind::poly;
  t.c0 = a0;
  t.c1 = a1;
  t.c2 = a2;
  return t;
}

TimeFactor TimeFactor::bump(double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("TimeFactor: empty bump support");
  TimeFactor t;
  t.kind = Kind::bump;
  t.t_lo = lo;
  t.t_hi = hi;
  return t;
}

double TimeFactor::value(double t) const {
  if (kind == Kind::poly) return c0 + t * (c1 + t * c2);
  const double s = (2.0 * t - (t_lo + t_hi)) / (t_hi - t_lo);
  if (std::abs(s) >= 1.0) return 0.0;
  const double p = 1.0 - s * s;
  return p * p * p * p;
}

double TimeFactor::dt(double t) const {
  if (kind == Kind::poly) return c1 + 2.0 * c2 * t;
  const double s = (2.0 * t - (t_lo + t_hi)) / (t_hi - t_lo);
  if (std::abs(s) >= 1.0) return 0.0;
  const double p = 1.0 - s * s;
  return -16.0 * s * p * p * p / (t_hi - t_lo);
}

std::vector<SpaceTimeTestFunction> builtin_test_functions(int dim, double ball_radius) {
  const double r = ball_radius;
  std::vector<SpaceTimeTestFunction> out;
  auto bump = [&](double cx, double cy, double rho) {
    SpatialBump b;
    b.dim = dim;
    b.center = {cx, dim == 2 ? cy : 0.0};
    b.radius = rho;
    b.amplitude = 1.0;
    return b;
  };
  out.push_back({bump(0.0, 0.0, 0.6 * r), TimeFactor::poly(1.0)});
  out.push_back({bump(0.0, 0.0, 0.8 * r), TimeFactor::poly(0.5, 1.0)});
  out.push_back({bump(0.25 * r, 0.0, 0.5 * r), TimeFactor::poly(1.0, -0.5, 0.25)});
  out.push_back({bump(-0.3 * r, 0.15 * r, 0.45 * r), TimeFactor::poly(2.0, 0.0, -0.5)});
  out.push_back({bump(0.1 * r, -0.2 * r, 0.7 * r), TimeFactor::poly(0.0, 2.0)});
  return out;
}

}  // namespace stefan
