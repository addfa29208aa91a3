#include <benchmark/benchmark.h>

#include "gbdmpc/cartpole.hpp"
#include "gbdmpc/gbd.hpp"
#include "gbdmpc/master.hpp"

namespace {

using namespace gbdmpc;

// Cut system harvested from a few receding-horizon steps near a wall, so
// the buckets are populated the way a live run populates them.
struct MasterFixture {
  CartPoleSystem sys = make_cartpole(CartPoleParams{});
  CutBuffer buf;
  ParsedCuts parsed;
  ModeList modes = cartpole_modes();

  MasterFixture() {
    GbdSettings gs;
    gs.modes = modes;
    gs.max_iters = 5;
    Eigen::VectorXd x(4);
    x << 0.3, 0.05, 0.5, 0.0;
    ParameterVector par = cartpole_parameters(sys, x, 0.32, 0.35);
    for (int i = 0; i < 8; ++i) mpc_step(sys.prob, par, buf, gs);
    parsed = parse(instantiate(buf, sys.prob, par));
  }
};

const MasterFixture& master_fixture() {
  static MasterFixture f;
  return f;
}

void BM_master_greedy(benchmark::State& state) {
  const MasterFixture& f = master_fixture();
  for (auto _ : state) {
    MasterSolution sol = solve_greedy(f.parsed, f.modes);
    benchmark::DoNotOptimize(sol.m_star);
  }
}
BENCHMARK(BM_master_greedy);

void BM_master_greedy_lookahead(benchmark::State& state) {
  const MasterFixture& f = master_fixture();
  GreedyOptions opts;
  opts.lookahead = true;
  for (auto _ : state) {
    MasterSolution sol = solve_greedy(f.parsed, f.modes, opts);
    benchmark::DoNotOptimize(sol.m_star);
  }
}
BENCHMARK(BM_master_greedy_lookahead);

void BM_master_enumeration(benchmark::State& state) {
  const MasterFixture& f = master_fixture();
  for (auto _ : state) {
    MasterSolution sol = solve_enumeration(f.parsed, f.modes);
    benchmark::DoNotOptimize(sol.m_star);
  }
}
BENCHMARK(BM_master_enumeration);

void BM_master_instantiate(benchmark::State& state) {
  const MasterFixture& f = master_fixture();
  Eigen::VectorXd x(4);
  x << 0.25, 0.0, 0.4, 0.1;
  const ParameterVector par = cartpole_parameters(f.sys, x, 0.33, 0.36);
  for (auto _ : state) {
    InstantiatedCuts inst = instantiate(f.buf, f.sys.prob, par);
    benchmark::DoNotOptimize(inst.feas.size());
  }
}
BENCHMARK(BM_master_instantiate);

}  // namespace
