#include <benchmark/benchmark.h>

#include "gbdmpc/cartpole.hpp"
#include "gbdmpc/freeflyer.hpp"
#include "gbdmpc/gbd.hpp"

namespace {

using namespace gbdmpc;

struct CartPoleFixture {
  CartPoleSystem sys = make_cartpole(CartPoleParams{});
  GbdSettings gs;
  ParameterVector par;
  CutBuffer warm_buf;

  CartPoleFixture() {
    gs.modes = cartpole_modes();
    gs.max_iters = 5;
    Eigen::VectorXd x(4);
    x << 0.3, 0.05, 0.5, 0.0;
    par = cartpole_parameters(sys, x, 0.32, 0.35);
    for (int i = 0; i < 3; ++i) mpc_step(sys.prob, par, warm_buf, gs);
  }
};

const CartPoleFixture& cartpole_fixture() {
  static CartPoleFixture f;
  return f;
}

void BM_gbd_cartpole_cold(benchmark::State& state) {
  const CartPoleFixture& f = cartpole_fixture();
  for (auto _ : state) {
    MpcStepResult res = run_cold(f.sys.prob, f.par, f.gs);
    benchmark::DoNotOptimize(res.gbd.iters);
  }
}
BENCHMARK(BM_gbd_cartpole_cold);

void BM_gbd_cartpole_warm(benchmark::State& state) {
  const CartPoleFixture& f = cartpole_fixture();
  for (auto _ : state) {
    GbdResult res = gbd_solve(f.sys.prob, f.par, f.warm_buf, f.gs);
    benchmark::DoNotOptimize(res.iters);
  }
}
BENCHMARK(BM_gbd_cartpole_warm);

struct FreeFlyerFixture {
  FreeFlyerSystem sys;
  GbdSettings gs;
  ParameterVector par;
  CutBuffer warm_buf;

  FreeFlyerFixture() {
    FreeFlyerParams fpar;
    Rng rng(1);
    sys = make_freeflyer(fpar, rng);
    gs.modes = sys.modes;
    gs.max_iters = 15;
    gs.lookahead = true;
    Eigen::VectorXd x(4);
    x << sys.obstacles[0].cx - 1.0, sys.obstacles[0].cy, 0.5, 0.5;
    par = freeflyer_parameters(sys, x);
    for (int i = 0; i < 3; ++i) mpc_step(sys.prob, par, warm_buf, gs);
  }
};

const FreeFlyerFixture& freeflyer_fixture() {
  static FreeFlyerFixture f;
  return f;
}

void BM_gbd_freeflyer_cold(benchmark::State& state) {
  const FreeFlyerFixture& f = freeflyer_fixture();
  for (auto _ : state) {
    MpcStepResult res = run_cold(f.sys.prob, f.par, f.gs);
    benchmark::DoNotOptimize(res.gbd.iters);
  }
}
BENCHMARK(BM_gbd_freeflyer_cold);

void BM_gbd_freeflyer_warm(benchmark::State& state) {
  const FreeFlyerFixture& f = freeflyer_fixture();
  for (auto _ : state) {
    GbdResult res = gbd_solve(f.sys.prob, f.par, f.warm_buf, f.gs);
    benchmark::DoNotOptimize(res.iters);
  }
}
BENCHMARK(BM_gbd_freeflyer_warm);

}  // namespace

BENCHMARK_MAIN();
