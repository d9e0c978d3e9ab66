#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <functional>

#include "oracles.hpp"
#include "stefan/barriers.hpp"
#include "stefan/calculus.hpp"
#include "stefan/forward.hpp"
#include "stefan/measure.hpp"

using namespace stefan;

namespace {

Field random_field(const Grid& g, oracle::Rng& rng, double lo, double hi) {
  Field f(g);
  for (int i = 0; i < g.size(); ++i) f[i] = rng.uniform(lo, hi);
  return f;
}

// Melted-fraction front position: walk the mushy run starting at the first
// cell below the liquidus; each mushy cell contributes (u + 1)/2 of a cell.
double oracle_front(const Field& u) {
  const Grid& g = u.grid;
  for (int i = 0; i + 1 < g.size(); ++i) {
    if (u[i] >= 1.0 && u[i + 1] < 1.0) {
      int j = i + 1;
      double x = g.center(i, 0) + 0.5 * g.h;
      while (j < g.size() && u[j] > -1.0 && j - i <= 8) {
        x += (u[j] + 1.0) / 2.0 * g.h;
        ++j;
      }
      return x;
    }
  }
  return g.box_lo(0);
}

}  // namespace

// ---------------------------------------------------------------------------
// forward solver
// ---------------------------------------------------------------------------

TEST_CASE("step: mushy and constant states are exactly stationary") {
  Grid g = Grid::make_1d(-1.0, 1.0, 50);
  auto nl = Nonlinearity::two_phase();

  Field mushy(g, 0.5);
  Field out = step(mushy, nl, 0.01, Boundary::zero_flux);
  CHECK(std::memcmp(out.v.data(), mushy.v.data(), sizeof(double) * mushy.v.size()) == 0);

  Field liquid(g, 3.0);
  Field out2 = step(liquid, nl, 0.01, Boundary::zero_flux);
  for (int i = 0; i < g.size(); ++i) CHECK(out2[i] == 3.0);
}

TEST_CASE("step: mushy stationarity is bitwise for random latent fields") {
  Grid g = Grid::make_1d(-2.0, 2.0, 200);
  auto nl = Nonlinearity::two_phase();
  oracle::Rng rng(99);
  Field u = random_field(g, rng, -1.0, 1.0);
  u[10] = 1.0;   // include exact breakpoints
  u[20] = -1.0;
  Field cur = u;
  for (int k = 0; k < 20; ++k) cur = step(cur, nl, 5e-3, Boundary::zero_flux);
  CHECK(std::memcmp(cur.v.data(), u.v.data(), sizeof(double) * u.v.size()) == 0);
}

TEST_CASE("run: conservation with zero-flux truncation") {
  Grid g = Grid::make_1d(-4.0, 4.0, 400);
  auto nl = Nonlinearity::two_phase();
  SignedMeasure mu;
  mu.dim = 1;
  mu.atoms.push_back({{0.0, 0.0}, 2.0});
  SolveConfig cfg;
  cfg.grid = g;
  cfg.T = 0.5;
  cfg.dt = 2.5e-3;
  cfg.store_every = 20;
  cfg.newton_tol = 1e-13;
  RunResult res = run(mu, cfg, nl);
  const double m0 = res.mass_ledger.front();
  CHECK(m0 == doctest::Approx(2.0).epsilon(1e-13));
  for (double m : res.mass_ledger)
    CHECK(std::abs(m - m0) <= 1e-12 * std::max(1.0, std::abs(m0)));
}

TEST_CASE("run: zero measure gives the zero history") {
  Grid g = Grid::make_1d(-1.0, 1.0, 40);
  SignedMeasure mu;
  mu.dim = 1;
  SolveConfig cfg;
  cfg.grid = g;
  cfg.T = 0.1;
  cfg.dt = 0.01;
  RunResult res = run(mu, cfg, Nonlinearity::two_phase());
  CHECK(res.history.max_abs() == 0.0);
}

TEST_CASE("L1 contraction and order preservation per step") {
  Grid g = Grid::make_1d(-2.0, 2.0, 250);
  auto nl = Nonlinearity::two_phase();
  oracle::Rng rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    Field u = random_field(g, rng, -3.0, 3.0);
    Field v = random_field(g, rng, -3.0, 3.0);
    const bool ordered = trial % 2 == 0;
    if (ordered)
      for (int i = 0; i < g.size(); ++i) v[i] = u[i] - std::abs(v[i]);  // v <= u
    double prev = l1_difference(g, u.v, v.v, {});
    for (int k = 0; k < 25; ++k) {
      u = step(u, nl, 4e-3, Boundary::zero_flux, 1e-13);
      v = step(v, nl, 4e-3, Boundary::zero_flux, 1e-13);
      const double cur = l1_difference(g, u.v, v.v, {});
      CHECK(cur <= prev + 1e-12);
      prev = cur;
      if (ordered)
        for (int i = 0; i < g.size(); ++i) CHECK(u[i] - v[i] >= -1e-12);
    }
  }
}

TEST_CASE("interface tracks the similarity solution") {
  // Cell-averaged step data (liquid u = 7 left of the front, solid -1.5 right
  // of it); the melted-fraction front follows 2 lambda sqrt(t) with lambda
  // from the transcendental oracle.
  auto nl = Nonlinearity::two_phase();
  const double lambda = oracle::similarity_lambda(6.0, 0.5);
  const double x_if = 0.1234;
  const double Tend = 0.25;

  auto interface_error = [&](int n, int steps) {
    Grid g = Grid::make_1d(-4.0, 4.0, n);
    Field u0(g);
    for (int i = 0; i < g.size(); ++i) {
      const double lo = g.box_lo(0) + i * g.h;
      const double frac = std::min(1.0, std::max(0.0, (x_if - lo) / g.h));
      u0[i] = frac * 7.0 + (1.0 - frac) * (-1.5);
    }
    SolveConfig cfg;
    cfg.grid = g;
    cfg.T = Tend;
    cfg.dt = Tend / steps;
    cfg.store_every = steps / 16;
    RunResult res = run_from(u0, cfg, nl);
    double acc = 0.0;
    int cnt = 0;
    for (int k = res.history.steps() / 2; k < res.history.steps(); ++k) {
      const Field uf = res.history.field_at(k);
      const double exact = x_if + 2.0 * lambda * std::sqrt(res.history.time(k));
      acc += std::abs(oracle_front(uf) - exact);
      ++cnt;
    }
    return acc / cnt;
  };

  const double e1 = interface_error(200, 512);
  const double e2 = interface_error(400, 2048);
  CHECK(e2 < e1);
  CHECK(std::log2(e1 / e2) > 0.8);  // first-order front accuracy
}

TEST_CASE("similarity temperature profile agrees in both phases") {
  auto nl = Nonlinearity::two_phase();
  const double thetaL = 2.0, thetaS = 1.0;
  const double lambda = oracle::similarity_lambda(thetaL, thetaS);
  const double x_if = 0.1234, Tend = 0.25;
  Grid g = Grid::make_1d(-4.0, 4.0, 800);
  Field u0(g);
  for (int i = 0; i < g.size(); ++i) u0[i] = g.center(i, 0) < x_if ? 3.0 : -2.0;
  SolveConfig cfg;
  cfg.grid = g;
  cfg.T = Tend;
  cfg.dt = 1e-4;
  cfg.store_every = 2500;
  RunResult res = run_from(u0, cfg, nl);
  const Field uf = res.history.field_at(res.history.steps() - 1);
  double worst = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.center(i, 0);
    if (std::abs(x) > 2.0) continue;  // stay clear of the truncation box
    const double exact = oracle::similarity_temperature(x, Tend, x_if, lambda, thetaL, thetaS);
    worst = std::max(worst, std::abs(nl.eval(uf[i]) - exact));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("liquid-core evolution matches a constant-coefficient heat oracle") {
  // Atom of mass 4: while the core stays liquid, alpha(u) + 1 evolves like
  // the plain heat flow there.
  auto nl = Nonlinearity::two_phase();
  Grid g = Grid::make_1d(-8.0, 8.0, 800);
  SignedMeasure mu;
  mu.dim = 1;
  mu.atoms.push_back({{0.0, 0.0}, 4.0});
  SolveConfig cfg;
  cfg.grid = g;
  cfg.T = 0.4;
  cfg.dt = 1e-3;
  cfg.store_every = 10;
  RunResult res = run(mu, cfg, nl);

  const double t1 = 0.2, t2 = 0.4, edge = 0.6;
  const int k1 = res.history.index_of_time(t1);
  const int k2 = res.history.index_of_time(t2);

  std::vector<int> cells;
  for (int i = 0; i < g.size(); ++i)
    if (std::abs(g.center(i, 0)) < edge) cells.push_back(i);
  for (int k = k1; k <= k2; ++k)
    for (int c : cells) CHECK(res.history.slice(k)[static_cast<size_t>(c)] > 1.0);

  oracle::Heat1D heat;
  heat.h = g.h;
  heat.w.resize(cells.size());
  for (size_t i = 0; i < cells.size(); ++i)
    heat.w[i] = nl.eval(res.history.slice(k1)[static_cast<size_t>(cells[i])]) + 1.0;

  for (int k = k1 + 1; k <= k2; ++k) {
    const auto& sl = res.history.slice(k);
    const double left = nl.eval(sl[static_cast<size_t>(cells.front())]) + 1.0;
    const double right = nl.eval(sl[static_cast<size_t>(cells.back())]) + 1.0;
    heat.step(res.history.dt, left, right);
  }

  double l1_err = 0.0, l1_ref = 0.0;
  const auto& final_slice = res.history.slice(k2);
  for (size_t i = 0; i < cells.size(); ++i) {
    if (std::abs(g.center(cells[i], 0)) > 0.5) continue;  // compare on the inner part
    l1_err += std::abs(final_slice[static_cast<size_t>(cells[i])] - heat.w[i]);
    l1_ref += std::abs(final_slice[static_cast<size_t>(cells[i])]);
  }
  CHECK(l1_err <= 0.05 * l1_ref);
}

TEST_CASE("distributional residual: constants, zero, and support checks") {
  Grid g = Grid::make_1d(-2.0, 2.0, 200);
  auto nl = Nonlinearity::two_phase();
  SpaceTimeField u(g, 0.0, 0.01);
  for (int k = 0; k <= 50; ++k)
    u.push(std::vector<double>(static_cast<size_t>(g.size()), 0.7));  // mushy constant

  SpaceTimeTestFunction phi;
  phi.space = {1, {0.2, 0.0}, 1.2, 1.0};
  phi.time = TimeFactor::bump(0.1, 0.4);
  const double res = std::abs(distributional_residual(u, nl, phi));
  // alpha == 0, so the residual is 0.7 * (midpoint error of int phi_t) = O(dt^2)
  CHECK(res < 1e-4);

  SpaceTimeField uz(g, 0.0, 0.01);
  for (int k = 0; k <= 50; ++k)
    uz.push(std::vector<double>(static_cast<size_t>(g.size()), 0.0));
  CHECK(distributional_residual(uz, nl, phi) == 0.0);

  SpaceTimeTestFunction wide;
  wide.space = {1, {0.0, 0.0}, 5.0, 1.0};
  wide.time = TimeFactor::bump(0.1, 0.4);
  CHECK_THROWS_AS(distributional_residual(u, nl, wide), std::invalid_argument);
}

TEST_CASE("distributional residual shrinks under refinement") {
  auto nl = Nonlinearity::two_phase();
  SignedMeasure mu;
  mu.dim = 1;
  mu.atoms.push_back({{0.0, 0.0}, 3.0});

  auto residual_at = [&](int n, int steps) {
    Grid g = Grid::make_1d(-6.0, 6.0, n);
    SolveConfig cfg;
    cfg.grid = g;
    cfg.T = 0.5;
    cfg.dt = 0.5 / steps;
    cfg.store_every = 1;
    RunResult r = run(mu, cfg, nl);
    SpaceTimeTestFunction phi;
    phi.space = {1, {0.1, 0.0}, 1.5, 1.0};
    phi.time = TimeFactor::bump(0.1, 0.45);
    return std::abs(distributional_residual(r.history, nl, phi));
  };
  const double r1 = residual_at(300, 250);
  const double r2 = residual_at(600, 500);
  CHECK(r2 < r1);
  CHECK(std::log2(r1 / r2) > 0.8);
}

TEST_CASE("initial trace approaches the measure pairing") {
  auto nl = Nonlinearity::two_phase();
  SignedMeasure mu;
  mu.dim = 1;
  mu.atoms.push_back({{0.3, 0.0}, 1.5});
  SignedMeasure::Density d;
  d.dim = 1;
  d.lo = {-1.0, 0.0};
  d.hi = {0.0, 0.0};
  d.cells = {1, 1};
  d.values = {0.8};
  mu.density = d;

  Grid g = Grid::make_1d(-4.0, 4.0, 800);
  SolveConfig cfg;
  cfg.grid = g;
  cfg.T = 0.08;
  cfg.dt = 2.5e-3;
  cfg.store_every = 4;  // stored lattice 0.01
  RunResult res = run(mu, cfg, nl);

  SpatialBump psi{1, {0.0, 0.0}, 1.5, 1.0};
  auto vals = initial_trace(res.history, psi, {0.08, 0.04, 0.02, 0.01});
  const double exact = 1.5 * psi.value({0.3, 0.0}) +
                       0.8 * oracle::integrate([&](double x) { return psi.value({x, 0.0}); },
                                               -1.0, 0.0, 1e-13);
  CHECK(std::abs(vals.back() - exact) < std::abs(vals.front() - exact));
  CHECK(std::abs(vals.back() - exact) <= 0.02 * (1.0 + std::abs(exact)));

  SpatialBump zero{1, {0.0, 0.0}, 1.5, 0.0};
  for (double v : initial_trace(res.history, zero, {0.04, 0.08})) CHECK(v == 0.0);
}

TEST_CASE("sup_after basics") {
  Grid g = Grid::make_1d(-1.0, 1.0, 40);
  SpaceTimeField u(g, 0.0, 0.1);
  for (int k = 0; k < 5; ++k)
    u.push(std::vector<double>(static_cast<size_t>(g.size()), 3.0));
  CHECK(sup_after(u, 0.0) == 3.0);
  CHECK(sup_after(u, 0.35) == 3.0);

  SpaceTimeField w(g, 0.0, 0.1);
  for (int k = 0; k < 5; ++k) {
    std::vector<double> sl(static_cast<size_t>(g.size()), 0.0);
    sl[20] = 5.0 / (1 + k);
    w.push(sl);
  }
  double prev = sup_after(w, 0.0);
  for (double eps : {0.1, 0.2, 0.3, 0.4}) {
    const double cur = sup_after(w, eps);
    CHECK(cur <= prev);
    prev = cur;
  }

  SpaceTimeField z(g, 0.0, 0.1);
  z.push(std::vector<double>(static_cast<size_t>(g.size()), 0.0));
  CHECK(sup_after(z, 0.0) == 0.0);
}

TEST_CASE("dirichlet truncation drains mass") {
  Grid g = Grid::make_1d(-1.0, 1.0, 50);
  Field u(g, 3.0);
  Field out = step(u, Nonlinearity::two_phase(), 0.01, Boundary::dirichlet_zero);
  CHECK(out.sum() < u.sum());
}

// ---------------------------------------------------------------------------
// barriers
// ---------------------------------------------------------------------------

TEST_CASE("profile solve: range, monotonicity in t, steady state") {
  BarrierParams p{6.0, 40.0, 250, 0.05};
  SpaceTimeField w = solve_profile(p);
  for (int k = 0; k < w.steps(); ++k)
    for (double x : w.slice(k)) {
      CHECK(x >= -1e-14);
      CHECK(x <= 1.0 + 1e-14);
    }
  for (int k = 1; k < w.steps(); ++k) {
    const auto& a = w.slice(k - 1);
    const auto& b = w.slice(k);
    for (size_t i = 0; i < a.size(); ++i) CHECK(b[i] >= a[i] - 1e-13);
  }
  const auto& last = w.slice(w.steps() - 1);
  const Grid& g = w.grid;
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.center(i, 0);
    CHECK(last[static_cast<size_t>(i)] ==
          doctest::Approx((p.R - x) / (p.R - 1.0)).epsilon(0.02));
  }
}

TEST_CASE("closed-form barrier: boundary zero, quadrature match, inner edge above 1") {
  const double R = 10.0;
  for (double t : {0.05, 0.3, 1.0}) CHECK(std::abs(closed_form_barrier(R, t, R)) < 1e-13);

  for (double x : {1.0, 2.5, 6.0, 9.5}) {
    for (double t : {0.1, 0.5, 1.0}) {
      const double direct = closed_form_barrier(x, t, R);
      const double pref = 4.0 / std::sqrt(4.0 * M_PI * t);
      const double cut = 2.0 * std::sqrt(4.0 * t * 40.0);
      const double lo = std::min(x, 2.0 * R - x) - cut;
      const double quad = pref * oracle::integrate(
                                     [&](double s) {
                                       const double d1 = (x - s) * (x - s) / (4.0 * t);
                                       const double d2 =
                                           (x + s - 2.0 * R) * (x + s - 2.0 * R) / (4.0 * t);
                                       return std::exp(-d1) - std::exp(-d2);
                                     },
                                     lo, 1.0, 1e-13);
      CHECK(direct == doctest::Approx(quad).epsilon(1e-10));
    }
  }

  CHECK(closed_form_barrier(1.0, 0.5, R) > 1.0);
  CHECK(closed_form_barrier(1.0, 0.5, R) ==
        doctest::Approx(2.0 - 2.0 * std::erfc((R - 1.0) / std::sqrt(0.5))).epsilon(1e-13));
}

TEST_CASE("closed-form flux: decay, finite difference, exact scaling") {
  const double R = 10.0;
  CHECK(closed_form_flux_at_outer(1e-4, R) < 1e-200);

  const double t = 1.0;
  const double h = 1e-4;
  const double fd =
      (closed_form_barrier(R + h, t, R) - closed_form_barrier(R - h, t, R)) / (2.0 * h);
  CHECK(std::abs(fd) == doctest::Approx(closed_form_flux_at_outer(t, R)).epsilon(1e-6));

  CHECK(closed_form_flux_at_outer(4.0 * t, 2.0 * R - 1.0) /
            closed_form_flux_at_outer(t, R) ==
        doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("closed form satisfies the heat equation to 1e-9") {
  const double R = 10.0;
  oracle::Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(1.0, R);
    const double t = rng.uniform(0.01, 1.0);
    const double dt_ = closed_form_barrier_dt(x, t, R);
    const double dxx = closed_form_barrier_dxx(x, t, R);
    CHECK(std::abs(dt_ - dxx) <= 1e-9 * std::max(1.0, std::abs(dt_)));
    const double hh = 1e-5;
    const double fd_xx = (closed_form_barrier(x + hh, t, R) -
                          2.0 * closed_form_barrier(x, t, R) +
                          closed_form_barrier(x - hh, t, R)) /
                         (hh * hh);
    CHECK(dxx == doctest::Approx(fd_xx).epsilon(1e-4));
  }
}

TEST_CASE("envelope monotonicity and admissible radius") {
  CHECK(flux_envelope(0.5, 5.0) > flux_envelope(0.5, 6.0));
  CHECK(flux_envelope(0.6, 5.0) > flux_envelope(0.5, 5.0));

  // smallest admissible radius for T = 1: the flux/envelope comparison needs
  // R^2 - 4R + 2 >= 4/e, i.e. R0 = 2 + sqrt(2 + 4/e)
  const double r0 = admissible_radius(1.0);
  CHECK(r0 == doctest::Approx(2.0 + std::sqrt(2.0 + 4.0 / std::exp(1.0))).epsilon(1e-3));
  CHECK(envelope_admissible(10.0, 1.0));
  CHECK_FALSE(envelope_admissible(2.0, 1.0));

  for (double t = 0.02; t <= 1.0; t += 0.02)
    CHECK(closed_form_flux_at_outer(t, 10.0) <= flux_envelope(t, 10.0));
}

TEST_CASE("numeric profile flux bounded by the envelope at R = 10") {
  BarrierParams p{10.0, 1.0, 900, 2e-3};
  SpaceTimeField w = solve_profile(p);
  FluxBoundReport rep = check_flux_bound(w, p);
  CHECK(rep.pass);
  CHECK(rep.times.size() == 500);

  // Numeric profile dominated by the closed form. The global check carries an
  // O(sqrt(dt)) slack: for t of the order of a few steps, the implicit-Euler
  // kernel has a fatter spatial tail than the Gaussian, so the far-field
  // excess decays only with the time step. Away from the start-up layer the
  // domination is tight.
  const Grid& g = w.grid;
  double worst_global = -1e300, worst_bulk = -1e300;
  for (int k = 1; k < w.steps(); ++k) {
    const double t = w.time(k);
    const auto& sl = w.slice(k);
    for (int i = 0; i < g.size(); ++i) {
      const double excess = sl[static_cast<size_t>(i)] -
                            closed_form_barrier(g.center(i, 0), t, p.R);
      worst_global = std::max(worst_global, excess);
      if (t >= 0.1) worst_bulk = std::max(worst_bulk, excess);
    }
  }
  CHECK(worst_global <= g.h + std::sqrt(w.dt));
  CHECK(worst_bulk <= 10.0 * g.h * g.h);
}

TEST_CASE("closed-form domination excess is confined to the start-up layer") {
  // At t = one step, the one-step implicit kernel mismatches the Gaussian
  // boundary layer by ~1% of the boundary datum regardless of resolution;
  // past a few dozen steps the excess collapses geometrically.
  BarrierParams p{10.0, 0.5, 600, 1e-3};
  SpaceTimeField w = solve_profile(p);
  const Grid& g = w.grid;
  auto worst_from = [&](int kmin) {
    double worst = -1e300;
    for (int k = kmin; k < w.steps(); ++k) {
      const auto& sl = w.slice(k);
      for (int i = 0; i < g.size(); ++i)
        worst = std::max(worst, sl[static_cast<size_t>(i)] -
                                    closed_form_barrier(g.center(i, 0), w.time(k), p.R));
    }
    return worst;
  };
  CHECK(worst_from(1) <= 0.02);             // global cap, ~1% of the datum
  CHECK(worst_from(50) <= 10.0 * g.h * g.h);  // tight once the layer has passed
  CHECK(worst_from(50) <= worst_from(5));
  CHECK(worst_from(5) <= worst_from(1));
}

TEST_CASE("flux bound fails for R barely above 1") {
  BarrierParams p{1.4, 1.0, 200, 2e-3};
  SpaceTimeField w = solve_profile(p);
  FluxBoundReport rep = check_flux_bound(w, p);
  CHECK_FALSE(rep.pass);
  CHECK(rep.first_fail_time > 0.0);
}

TEST_CASE("flux-bound slack shrinks under refinement") {
  BarrierParams p1{10.0, 1.0, 400, 2e-3};
  BarrierParams p2{10.0, 1.0, 800, 2e-3};
  auto r1 = check_flux_bound(solve_profile(p1), p1);
  auto r2 = check_flux_bound(solve_profile(p2), p2);
  CHECK(r2.slack == doctest::Approx(r1.slack / 2.0).epsilon(0.05));
}

TEST_CASE("2D comparison: h stays below the half-space profile for all d") {
  Grid g = Grid::make_2d(-5.0, -5.0, 5.0, 5.0, 96, 96);
  BallDomain ball(g, 4.0);

  Field f(g);
  for (int cell : ball.interior)
    f[cell] = g.dist2(cell, {0.0, 0.0}) <= 1.0 ? 1.0 : 0.0;

  auto run_case = [&](std::function<double(std::array<double, 2>, double)> d) {
    CoefficientProblem prob;
    prob.ball = &ball;
    prob.d = std::move(d);
    prob.initial = f;
    prob.T = 0.5;
    prob.dt = 1.0 / 64.0;
    SpaceTimeField h = solve_coefficient_problem(prob);
    return check_comparison(h, ball);
  };

  auto rep1 = run_case([](std::array<double, 2>, double) { return 1.0; });
  auto rep2 = run_case([](std::array<double, 2>, double) { return 0.3; });
  auto rep3 = run_case([](std::array<double, 2>, double t) {
    return 0.65 + 0.35 * std::sin(6.0 * M_PI * t);
  });

  for (const auto& rep : {rep1, rep2, rep3}) {
    CHECK(rep.pass);
    CHECK(rep.worst_excess <= rep.domination_slack);
    CHECK(rep.worst_flux_margin <= rep.flux_slack);
  }
  CHECK(rep1.envelope_constant == rep2.envelope_constant);
  CHECK(rep2.envelope_constant == rep3.envelope_constant);
  CHECK(rep1.envelope_constant == doctest::Approx(4.0 / std::sqrt(M_PI)).epsilon(1e-12));
}

TEST_CASE("2D comparison: zero data stays at zero") {
  Grid g = Grid::make_2d(-5.0, -5.0, 5.0, 5.0, 64, 64);
  BallDomain ball(g, 4.0);
  CoefficientProblem prob;
  prob.ball = &ball;
  prob.d = [](std::array<double, 2>, double) { return 1.0; };
  prob.initial = Field(g);
  prob.T = 0.25;
  prob.dt = 1.0 / 32.0;
  SpaceTimeField h = solve_coefficient_problem(prob);
  CHECK(h.max_abs() == 0.0);
  CHECK(check_comparison(h, ball).pass);
}

TEST_CASE("rotating the datum leaves shell statistics unchanged") {
  Grid g = Grid::make_2d(-5.0, -5.0, 5.0, 5.0, 80, 80);
  BallDomain ball(g, 4.0);
  auto run_with_center = [&](double cx, double cy) {
    Field f(g);
    SpatialBump b{2, {cx, cy}, 0.5, 1.0};
    for (int cell : ball.interior) f[cell] = b.value(g.center(cell));
    CoefficientProblem prob;
    prob.ball = &ball;
    prob.d = [](std::array<double, 2>, double) { return 1.0; };
    prob.initial = f;
    prob.T = 0.25;
    prob.dt = 1.0 / 32.0;
    SpaceTimeField h = solve_coefficient_problem(prob);
    Field hf = h.field_at(h.steps() - 1);
    auto nd = normal_derivative(hf, ball);
    double m = 0.0;
    for (double x : nd) m = std::max(m, std::abs(x));
    return m;
  };
  const double a = run_with_center(0.4, 0.0);
  const double b = run_with_center(0.0, 0.4);
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("restart continuation keeps the flux bound") {
  Grid g = Grid::make_2d(-5.0, -5.0, 5.0, 5.0, 96, 96);
  BallDomain ball(g, 4.0);
  const double dt = 1.0 / 64.0;

  RestartReport rz = check_restart(Field(g), ball, 0.25, 0.5, dt);
  CHECK(rz.pass);
  CHECK(rz.worst_flux_margin <= 0.0);

  // Restart from the variable-coefficient solution at T1 (the setting the
  // continuation is made for): flux bound and domination both carry over.
  const double T1 = 0.25, T = 0.5;
  Field f(g);
  for (int cell : ball.interior)
    f[cell] = g.dist2(cell, {0.0, 0.0}) <= 1.0 ? 1.0 : 0.0;
  CoefficientProblem prob;
  prob.ball = &ball;
  prob.d = [](std::array<double, 2>, double t) { return 0.65 + 0.35 * std::sin(6.0 * M_PI * t); };
  prob.initial = f;
  prob.T = T1;
  prob.dt = dt;
  SpaceTimeField h = solve_coefficient_problem(prob);
  Field data = h.field_at(h.steps() - 1);

  RestartReport rr = check_restart(data, ball, T1, T, dt);
  CHECK(rr.pass);
  CHECK(rr.worst_excess <= 1e-10);

  // T1 -> 0 recovers the plain comparison: restarting from the initial datum
  // itself reproduces the constant-coefficient bound from scratch.
  RestartReport r0 = check_restart(f, ball, 0.0, T, dt);
  CHECK(r0.pass);
}
