#include "stefan/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stefan/calculus.hpp"
#include "stefan/linear.hpp"

namespace stefan {

namespace {

constexpr double kEnvelopeConstant = 2.2567583341910251;  // 4/sqrt(pi)

// Profile solve on explicit nodes with spacing h: node 0 pinned at 1 (for
// t > 0), last node pinned at 0, zero initial state, implicit Euler.
std::vector<std::vector<double>> evolve_pinned_profile(int nnodes, double h, double dt,
                                                       int steps) {
  if (nnodes < 3) throw std::invalid_argument("profile: need at least 3 nodes");
  const double r = dt / (h * h);
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<size_t>(steps) + 1);
  std::vector<double> w(static_cast<size_t>(nnodes), 0.0);
  out.push_back(w);
  const int n = nnodes - 2;  // interior unknowns
  std::vector<double> a(static_cast<size_t>(n)), b(static_cast<size_t>(n)),
      c(static_cast<size_t>(n)), d(static_cast<size_t>(n));
  for (int k = 0; k < steps; ++k) {
    for (int j = 0; j < n; ++j) {
      a[static_cast<size_t>(j)] = -r;
      b[static_cast<size_t>(j)] = 1.0 + 2.0 * r;
      c[static_cast<size_t>(j)] = -r;
      d[static_cast<size_t>(j)] = w[static_cast<size_t>(j + 1)];
    }
    d[0] += r * 1.0;  // left Dirichlet value
    tridiag_solve(a, b, c, d);
    w[0] = 1.0;
    for (int j = 0; j < n; ++j) w[static_cast<size_t>(j + 1)] = d[static_cast<size_t>(j)];
    w[static_cast<size_t>(nnodes - 1)] = 0.0;
    out.push_back(w);
  }
  return out;
}

}  // namespace

SpaceTimeField solve_profile(const BarrierParams& p) {
  if (p.R <= 1.0) throw std::invalid_argument("solve_profile: need R > 1");
  const double h = (p.R - 1.0) / p.cells;
  const int steps = static_cast<int>(std::lround(p.T / p.dt));
  auto hist = evolve_pinned_profile(p.cells + 1, h, p.dt, steps);
  Grid g(1, {1.0 - 0.5 * h, 0.0}, h, {p.cells + 1, 1});
  SpaceTimeField out(g, 0.0, p.dt);
  for (auto& s : hist) out.push(std::move(s));
  return out;
}

double closed_form_barrier(double x, double t, double R) {
  if (t <= 0) throw std::invalid_argument("closed_form_barrier: need t > 0");
  const double rt = 2.0 * std::sqrt(t);
  const double A = (x - 1.0) / rt;
  const double B = (2.0 * R - x - 1.0) / rt;
  return 2.0 * (std::erfc(A) - std::erfc(B));
}

double closed_form_barrier_dx(double x, double t, double R) {
  if (t <= 0) throw std::invalid_argument("closed_form_barrier_dx: need t > 0");
  const double rt = 2.0 * std::sqrt(t);
  const double A = (x - 1.0) / rt;
  const double B = (2.0 * R - x - 1.0) / rt;
  return -2.0 / std::sqrt(M_PI * t) * (std::exp(-A * A) + std::exp(-B * B));
}

double closed_form_barrier_dt(double x, double t, double R) {
  if (t <= 0) throw std::invalid_argument("closed_form_barrier_dt: need t > 0");
  const double rt = 2.0 * std::sqrt(t);
  const double A = (x - 1.0) / rt;
  const double B = (2.0 * R - x - 1.0) / rt;
  // d/dt erfc(A) = (A/t) * e^{-A^2} / sqrt(pi), since dA/dt = -A/(2t).
  return 2.0 / (std::sqrt(M_PI) * t) * (A * std::exp(-A * A) - B * std::exp(-B * B));
}

double closed_form_barrier_dxx(double x, double t, double R) {
  if (t <= 0) throw std::invalid_argument("closed_form_barrier_dxx: need t > 0");
  const double rt = 2.0 * std::sqrt(t);
  const double A = (x - 1.0) / rt;
  const double B = (2.0 * R - x - 1.0) / rt;
  // differentiate the dx formula once more in x
  const double p = 1.0 / rt;
  return -2.0 / std::sqrt(M_PI * t) *
         (-2.0 * A * std::exp(-A * A) * p + 2.0 * B * std::exp(-B * B) * p);
}

double closed_form_flux_at_outer(double t, double R) {
  if (t <= 0) throw std::invalid_argument("closed_form_flux_at_outer: need t > 0");
  const double e = (R - 1.0) * (R - 1.0) / (4.0 * t);
  return 4.0 / std::sqrt(M_PI * t) * std::exp(-e);
}

double flux_envelope(double t, double R) {
  if (t <= 0) throw std::invalid_argument("flux_envelope: need t > 0");
  return kEnvelopeConstant * std::exp(-R * R / (8.0 * t));
}

bool envelope_admissible(double R, double T, int scan_points) {
  if (R <= 1.0) return false;
  // Compare in log space so tiny-t underflow cannot mask a violation:
  // log flux = log4 - (1/2) log(pi t) - (R-1)^2/(4t)
  // log env  = log(4/sqrt(pi)) - R^2/(8t)
  for (int i = 0; i < scan_points; ++i) {
    const double f = static_cast<double>(i + 1) / scan_points;
    const double t = T * std::pow(10.0, -8.0 * (1.0 - f));  // log-spaced in (T*1e-8, T]
    const double lf = std::log(4.0) - 0.5 * std::log(M_PI * t) - (R - 1.0) * (R - 1.0) / (4.0 * t);
    const double le = std::log(kEnvelopeConstant) - R * R / (8.0 * t);
    if (lf > le) return false;
  }
  // Inner-edge condition: the closed form stays above 1 at x = 1 for t < T,
  // i.e. erfc((R-1)/sqrt(t)) < 1/2; worst at t = T.
  if (std::erfc((R - 1.0) / std::sqrt(T)) >= 0.5) return false;
  return true;
}

double admissible_radius(double T) {
  double lo = 1.0 + 1e-6, hi = 4.0;
  while (!envelope_admissible(hi, T)) hi *= 2.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (envelope_admissible(mid, T))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

FluxBoundReport check_flux_bound(const SpaceTimeField& w, const BarrierParams& p) {
  FluxBoundReport rep;
  const Grid& g = w.grid;
  const int n = g.cells[0];
  const double h = g.h;
  rep.slack = 10.0 * h * h * w.max_abs() / h;
  rep.worst_margin = -1e300;
  for (int k = 1; k < w.steps(); ++k) {
    const double t = w.time(k);
    const auto& sl = w.slice(k);
    const double flux = std::abs((3.0 * sl[static_cast<size_t>(n - 1)] -
                                  4.0 * sl[static_cast<size_t>(n - 2)] +
                                  sl[static_cast<size_t>(n - 3)]) /
                                 (2.0 * h));
    const double env = flux_envelope(t, p.R);
    rep.times.push_back(t);
    rep.numeric_flux.push_back(flux);
    rep.envelope.push_back(env);
    rep.closed_form_flux.push_back(closed_form_flux_at_outer(t, p.R));
    const double margin = flux - env;
    if (margin > rep.worst_margin) rep.worst_margin = margin;
    if (margin > rep.slack && rep.first_fail_time < 0) {
      rep.pass = false;
      rep.first_fail_time = t;
    }
  }
  return rep;
}

SpaceTimeField solve_coefficient_problem(const CoefficientProblem& prob) {
  if (!prob.ball) throw std::invalid_argument("solve_coefficient_problem: no ball");
  const BallDomain& B = *prob.ball;
  const Grid& g = B.grid;
  if (!(prob.initial.grid == g))
    throw std::invalid_argument("solve_coefficient_problem: initial field grid mismatch");
  const int steps = static_cast<int>(std::lround(prob.T / prob.dt));
  if (steps < 1) throw std::invalid_argument("solve_coefficient_problem: empty horizon");

  SpaceTimeField out(g, 0.0, prob.dt);
  std::vector<double> hval(static_cast<size_t>(g.size()), 0.0);
  for (int cell : B.interior) hval[static_cast<size_t>(cell)] = prob.initial[cell];
  out.push(hval);

  BallImplicitSolver solver(B, prob.dt);
  std::vector<double> coef(static_cast<size_t>(g.size()), 1.0);
  for (int k = 1; k <= steps; ++k) {
    const double t_new = k * prob.dt;
    double dmin = 1e300, dmax = -1e300;
    for (int cell : B.interior) {
      const double d = prob.d(g.center(cell), t_new);
      coef[static_cast<size_t>(cell)] = d;
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    if (!(dmin > 0.0) || dmax > 1.0 + 1e-12)
      throw std::invalid_argument("solve_coefficient_problem: need 0 < d <= 1");
    solver.factor(coef);
    solver.step(hval);
    out.push(hval);
  }
  return out;
}

ComparisonReport check_comparison(const SpaceTimeField& h, const BallDomain& ball) {
  const Grid& g = h.grid;
  ComparisonReport rep;
  rep.envelope_constant = kEnvelopeConstant;

  // Column of the half-space boundary plane x1 = 1.
  int k0 = -1;
  for (int ix = 0; ix < g.cells[0]; ++ix) {
    if (g.origin[0] + (ix + 0.5) * g.h <= 1.0) k0 = ix;
  }
  if (k0 < 1 || k0 + 2 >= g.cells[0])
    throw std::invalid_argument("check_comparison: plane x1=1 not inside the grid");

  // Initial data must vanish on the half space and stay within [0, 1].
  double fmax = 0.0;
  const auto& f0 = h.slice(0);
  for (int cell : ball.interior) {
    const double v = f0[static_cast<size_t>(cell)];
    fmax = std::max(fmax, v);
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw std::invalid_argument("check_comparison: initial data outside [0, 1]");
    if (g.ix_of(cell) > k0 && std::abs(v) > 1e-12)
      throw std::invalid_argument("check_comparison: initial data enters the half space x1 > 1");
  }

  // 1D profile on the column nodes, matched time steps.
  const int nnodes = g.cells[0] - k0;
  auto W = evolve_pinned_profile(nnodes, g.h, h.dt, h.steps() - 1);

  rep.domination_slack = 1e-10 * std::max(1.0, fmax);
  rep.worst_excess = -1e300;
  for (int k = 0; k < h.steps(); ++k) {
    const auto& sl = h.slice(k);
    const auto& wk = W[static_cast<size_t>(k)];
    for (int cell : ball.interior) {
      const int ix = g.ix_of(cell);
      if (ix <= k0) continue;
      const double excess = sl[static_cast<size_t>(cell)] - wk[static_cast<size_t>(ix - k0)];
      rep.worst_excess = std::max(rep.worst_excess, excess);
    }
  }
  if (rep.worst_excess > rep.domination_slack) rep.pass = false;

  // Shell flux against the envelope.
  rep.flux_slack = 10.0 * (g.h * g.h + h.dt) * std::max(1.0, fmax);
  rep.worst_flux_margin = -1e300;
  for (int k = 1; k < h.steps(); ++k) {
    const double t = h.time(k);
    Field fk = h.field_at(k);
    const auto flux = normal_derivative(fk, ball);
    const double env = kEnvelopeConstant * std::exp(-ball.radius * ball.radius / (8.0 * t));
    for (double fx : flux)
      rep.worst_flux_margin = std::max(rep.worst_flux_margin, std::abs(fx) - env);
  }
  if (rep.worst_flux_margin > rep.flux_slack) rep.pass = false;
  return rep;
}

RestartReport check_restart(const Field& h_at_T1, const BallDomain& ball, double T1, double T,
                            double dt) {
  if (!(T > T1) || T1 < 0) throw std::invalid_argument("check_restart: need 0 <= T1 < T");
  const Grid& g = ball.grid;
  if (!(h_at_T1.grid == g)) throw std::invalid_argument("check_restart: grid mismatch");
  for (int cell : ball.interior) {
    const double v = h_at_T1[cell];
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw std::invalid_argument("check_restart: data outside [0, 1]");
  }

  RestartReport rep;
  const int steps = static_cast<int>(std::lround((T - T1) / dt));
  const int k1 = static_cast<int>(std::lround(T1 / dt));
  if (std::abs(k1 * dt - T1) > 1e-9 * std::max(1.0, T1) ||
      std::abs(steps * dt - (T - T1)) > 1e-9 * std::max(1.0, T))
    throw std::invalid_argument("check_restart: T1 and T must sit on the dt lattice");

  int k0 = -1;
  for (int ix = 0; ix < g.cells[0]; ++ix)
    if (g.origin[0] + (ix + 0.5) * g.h <= 1.0) k0 = ix;
  const bool have_plane = (k0 >= 1 && k0 + 2 < g.cells[0]);
  std::vector<std::vector<double>> W;
  if (have_plane) W = evolve_pinned_profile(g.cells[0] - k0, g.h, dt, k1 + steps);

  std::vector<double> rval(static_cast<size_t>(g.size()), 0.0);
  for (int cell : ball.interior) rval[static_cast<size_t>(cell)] = h_at_T1[cell];

  BallImplicitSolver solver(ball, dt);
  solver.factor_uniform(1.0);

  rep.flux_slack = 10.0 * (g.h * g.h + dt);
  rep.worst_flux_margin = -1e300;
  rep.worst_excess = -1e300;
  Field fk(g);
  for (int k = 1; k <= steps; ++k) {
    solver.step(rval);
    const double t = T1 + k * dt;
    fk.v = rval;
    const auto flux = normal_derivative(fk, ball);
    const double env = kEnvelopeConstant * std::exp(-ball.radius * ball.radius / (8.0 * t));
    for (double fx : flux)
      rep.worst_flux_margin = std::max(rep.worst_flux_margin, std::abs(fx) - env);
    if (have_plane) {
      const auto& wk = W[static_cast<size_t>(k1 + k)];
      for (int cell : ball.interior) {
        const int ix = g.ix_of(cell);
        if (ix <= k0) continue;
        rep.worst_excess =
            std::max(rep.worst_excess, rval[static_cast<size_t>(cell)] -
                                           wk[static_cast<size_t>(ix - k0)]);
      }
    }
  }
  if (rep.worst_flux_margin > rep.flux_slack) rep.pass = false;
  if (have_plane && rep.worst_excess > 1e-10) rep.pass = false;
  return rep;
}

}  // namespace stefan
