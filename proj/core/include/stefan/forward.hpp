#pragma once

#include <vector>

#include "stefan/calculus.hpp"
#include "stefan/grid.hpp"
#include "stefan/measure.hpp"
#include "stefan/nonlinearity.hpp"
#include "stefan/test_functions.hpp"

namespace stefan {

struct SolveConfig {
  Grid grid;
  double T = 1.0;
  double dt = 1e-3;
  Boundary bc = Boundary::zero_flux;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  int store_every = 1;
};

struct StepStats {
  int newton_iters = 0;
  double final_residual = 0.0;
  bool used_fallback = false;
};

/// One implicit Euler step of u_t = lap(alpha(u)): returns u_new solving
/// u_new - dt * L(alpha(u_new)) = u_old, by damped Newton on the monotone
/// system with a nonlinear Gauss-Seidel fallback. Throws on non-convergence.
Field step(const Field& u_old, const Nonlinearity& nl, double dt, Boundary bc,
           double newton_tol = 1e-12, int newton_max_iter = 50, StepStats* stats = nullptr);

struct RunResult {
  SpaceTimeField history;           // stored every store_every steps, slice 0 = initial data
  std::vector<double> mass_ledger;  // total enthalpy * cellvolume after every step (0 = initial)
  int total_steps = 0;
  int newton_iter_total = 0;
  int fallback_steps = 0;
};

/// Projects the measure, then advances to T. round(T/dt) must be a multiple
/// of store_every so stored slices sit on a uniform lattice.
RunResult run(const SignedMeasure& mu, const SolveConfig& cfg, const Nonlinearity& nl);

/// Same but starting from an explicit initial field.
RunResult run_from(const Field& u0, const SolveConfig& cfg, const Nonlinearity& nl);

/// Midpoint-rule evaluation of the weak-form pairing
/// int int alpha(u) lap(phi) + u dphi/dt dx dt with exact derivatives of phi.
/// phi must be supported strictly inside the space-time box.
double distributional_residual(const SpaceTimeField& u, const Nonlinearity& nl,
                               const SpaceTimeTestFunction& phi);

/// int u(.,t) psi dx at each requested stored time.
std::vector<double> initial_trace(const SpaceTimeField& u, const SpatialBump& psi,
                                  const std::vector<double>& times);

/// max |u| over slices with time >= eps.
double sup_after(const SpaceTimeField& u, double eps);

}  // namespace stefan
