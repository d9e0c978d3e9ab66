#pragma once

#include <functional>
#include <vector>

#include "stefan/grid.hpp"

namespace stefan {

/// Parameters for the heated-interval profile solve on [1, R]:
/// w(x,0)=0, w(1,t)=1, w(R,t)=0, evolved by implicit Euler.
struct BarrierParams {
  double R = 10.0;   // outer radius, > 1
  double T = 1.0;    // time horizon
  int cells = 1800;  // spatial intervals on [1, R]
  double dt = 1e-3;
};

/// Numeric profile w. Returned on a grid whose cell centers are the nodes
/// 1, 1+h, ..., R; slice 0 is the zero initial state.
SpaceTimeField solve_profile(const BarrierParams& p);

/// Closed-form supersolution on (-inf, R]: value 4 on {x <= 1} at t = 0,
/// absorbing boundary at x = R, evaluated through the error function.
double closed_form_barrier(double x, double t, double R);
double closed_form_barrier_dx(double x, double t, double R);
double closed_form_barrier_dt(double x, double t, double R);
double closed_form_barrier_dxx(double x, double t, double R);

/// |d/dx of the closed form at x = R| = (4/sqrt(pi t)) exp(-(R-1)^2/(4t)).
double closed_form_flux_at_outer(double t, double R);

/// The Gaussian flux envelope (4/sqrt(pi)) exp(-R^2/(8t)).
double flux_envelope(double t, double R);

/// True if closed_form_flux_at_outer <= flux_envelope for all t in (0, T]
/// (scanned on a log-spaced time lattice) and the closed form stays above 1
/// at the inner edge for t < T.
bool envelope_admissible(double R, double T, int scan_points = 400);

/// Smallest admissible radius for the horizon T, located by scan + bisection.
double admissible_radius(double T);

struct FluxBoundReport {
  bool pass = true;
  double slack = 0.0;
  double worst_margin = 0.0;   // max over times of (|flux| - envelope); <= slack passes
  double first_fail_time = -1.0;
  std::vector<double> times;
  std::vector<double> numeric_flux;
  std::vector<double> envelope;
  std::vector<double> closed_form_flux;
};

/// Per-time one-sided flux of the numeric profile at x = R against the
/// envelope, with O(h^2) discretization slack (10 * h^2 * max|w| / h).
FluxBoundReport check_flux_bound(const SpaceTimeField& w, const BarrierParams& p);

/// Variable-coefficient heat problem on a ball with Dirichlet-0 shell:
/// d(x,t) * lap(h) = dh/dt, h(.,0) = f with 0 <= f <= 1 supported in B(1).
struct CoefficientProblem {
  const BallDomain* ball = nullptr;
  std::function<double(std::array<double, 2> x, double t)> d;  // kappa <= d <= 1
  Field initial;                                               // f sampled on the grid
  double T = 1.0;
  double dt = 1.0 / 64.0;
};

/// Solves the problem, storing every step.
SpaceTimeField solve_coefficient_problem(const CoefficientProblem& prob);

struct ComparisonReport {
  bool pass = true;
  double domination_slack = 0.0;   // allowed h(x,t) - W(x,t) excess
  double worst_excess = 0.0;       // max over D x times of h - W
  double flux_slack = 0.0;
  double worst_flux_margin = 0.0;  // max over shell x times of |dh/dn| - C exp(-R^2/8t)
  double envelope_constant = 0.0;  // the constant C used (4/sqrt(pi))
};

/// Checks h <= W on D = ball * {x1 > 1} against the 1D profile solved on the
/// grid columns (index-aligned, matched dt), and the shell flux against the
/// envelope. `h` must come from solve_coefficient_problem on `ball`.
ComparisonReport check_comparison(const SpaceTimeField& h, const BallDomain& ball);

struct RestartReport {
  bool pass = true;
  double flux_slack = 0.0;
  double worst_flux_margin = 0.0;
  double worst_excess = 0.0;  // r - W on D, when a profile comparison is requested
};

/// Continues h_at_T1 with the constant-coefficient heat flow on (T1, T] and
/// checks the shell flux against C exp(-R^2/(8t)) on the original clock.
RestartReport check_restart(const Field& h_at_T1, const BallDomain& ball, double T1, double T,
                            double dt);

}  // namespace stefan
