#include <benchmark/benchmark.h>

#include <cmath>

#include "stefan/barriers.hpp"
#include "stefan/calculus.hpp"
#include "stefan/duality.hpp"
#include "stefan/forward.hpp"
#include "stefan/linear.hpp"
#include "stefan/mollify.hpp"

using namespace stefan;

namespace {

Field band_field(const Grid& g) {
  Field u(g);
  for (int i = 0; i < g.size(); ++i) {
    const auto x = g.center(i);
    u[i] = 2.5 * std::exp(-(x[0] * x[0] + x[1] * x[1]));
  }
  return u;
}

// Mesh ratio dt/h^2 held fixed across sizes (how the solver is used: dt is
// refined with h^2 for accuracy; the implicit step only buys stability).
void BM_ForwardStep1D(benchmark::State& state) {
  Grid g = Grid::make_1d(-10.0, 10.0, state.range(0));
  const double dt = state.range(1) * g.h * g.h;
  Field u = band_field(g);
  auto nl = Nonlinearity::two_phase();
  for (auto _ : state) {
    Field out = step(u, nl, dt, Boundary::zero_flux);
    benchmark::DoNotOptimize(out.v.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardStep1D)
    ->Args({1000, 2})
    ->Args({4000, 2})
    ->Args({16000, 2})
    ->Args({4000, 128});

void BM_ForwardStep2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Grid g = Grid::make_2d(-5.0, -5.0, 5.0, 5.0, n, n);
  const double dt = 2.0 * g.h * g.h;
  Field u = band_field(g);
  auto nl = Nonlinearity::two_phase();
  for (auto _ : state) {
    Field out = step(u, nl, dt, Boundary::zero_flux);
    benchmark::DoNotOptimize(out.v.data());
  }
  state.SetItemsProcessed(state.iterations() * g.size());
}
BENCHMARK(BM_ForwardStep2D)->Arg(64)->Arg(128);

void BM_DualStep1D(benchmark::State& state) {
  Grid g = Grid::make_1d(-10.0, 10.0, state.range(0));
  BallDomain ball(g, 8.0);
  BallImplicitSolver solver(ball, 1e-3);
  solver.factor_uniform(0.5);
  std::vector<double> phi(static_cast<size_t>(g.size()), 0.0);
  for (int cell : ball.interior) phi[static_cast<size_t>(cell)] = 1.0;
  for (auto _ : state) {
    solver.step(phi);
    benchmark::DoNotOptimize(phi.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ball.interior.size()));
}
BENCHMARK(BM_DualStep1D)->Arg(1000)->Arg(4000)->Arg(16000);

void BM_DualFactorSolve2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Grid g = Grid::make_2d(-5.0, -5.0, 5.0, 5.0, n, n);
  BallDomain ball(g, 4.0);
  BallImplicitSolver solver(ball, 1e-2);
  std::vector<double> coef(static_cast<size_t>(g.size()), 0.7);
  std::vector<double> phi(static_cast<size_t>(g.size()), 0.0);
  for (int cell : ball.interior) phi[static_cast<size_t>(cell)] = 1.0;
  for (auto _ : state) {
    solver.factor(coef);
    solver.step(phi);
    benchmark::DoNotOptimize(phi.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ball.interior.size()));
}
BENCHMARK(BM_DualFactorSolve2D)->Arg(64)->Arg(128)->Arg(256);

void BM_FloorAndSmooth(benchmark::State& state) {
  Grid g = Grid::make_1d(-10.0, 10.0, 2000);
  SpaceTimeField c(g, 0.0, 0.02);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> sl(static_cast<size_t>(g.size()));
    for (int i = 0; i < g.size(); ++i)
      sl[static_cast<size_t>(i)] = 0.5 + 0.5 * std::sin(0.37 * i + 0.11 * k);
    c.push(sl);
  }
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    DualCoefficient dc = floor_and_smooth(c, m);
    benchmark::DoNotOptimize(dc.j_value);
  }
}
BENCHMARK(BM_FloorAndSmooth)->Arg(4)->Arg(16)->Arg(64);

void BM_BarrierProfile(benchmark::State& state) {
  BarrierParams p{10.0, 0.5, static_cast<int>(state.range(0)), 2e-3};
  for (auto _ : state) {
    SpaceTimeField w = solve_profile(p);
    benchmark::DoNotOptimize(w.slices.data());
  }
}
BENCHMARK(BM_BarrierProfile)->Arg(450)->Arg(1800);

}  // namespace

BENCHMARK_MAIN();
