#include <benchmark/benchmark.h>

#include "gbdmpc/cartpole.hpp"
#include "gbdmpc/dense_qp.hpp"
#include "gbdmpc/random_problems.hpp"

namespace {

using namespace gbdmpc;

// Cart-pole subproblem at a state leaning toward the right wall, binaries
// all zero (no planned contact).
struct QpFixture {
  CartPoleSystem sys = make_cartpole(CartPoleParams{});
  ParameterVector par;
  DeltaTrajectory delta;
  StackedQp qp;
  std::vector<int> active;

  QpFixture() {
    Eigen::VectorXd x(4);
    x << 0.2, 0.1, 0.3, 0.0;
    par = cartpole_parameters(sys, x, 0.35, 0.35);
    delta.delta.assign(static_cast<std::size_t>(sys.prob.N), Eigen::VectorXd::Zero(2));
    qp = stack(sys.prob, par, delta);
    active = solve_qp(qp).sol.active;
  }
};

const QpFixture& qp_fixture() {
  static QpFixture f;
  return f;
}

void BM_qp_cartpole_stack(benchmark::State& state) {
  const QpFixture& f = qp_fixture();
  for (auto _ : state) {
    StackedQp qp = stack(f.sys.prob, f.par, f.delta);
    benchmark::DoNotOptimize(qp.Qbar.data());
  }
}
BENCHMARK(BM_qp_cartpole_stack);

void BM_qp_cartpole_cold(benchmark::State& state) {
  const QpFixture& f = qp_fixture();
  for (auto _ : state) {
    QpResult res = solve_qp(f.qp);
    benchmark::DoNotOptimize(res.sol.v);
  }
}
BENCHMARK(BM_qp_cartpole_cold);

void BM_qp_cartpole_warm(benchmark::State& state) {
  const QpFixture& f = qp_fixture();
  for (auto _ : state) {
    QpResult res = solve_qp(f.qp, &f.active);
    benchmark::DoNotOptimize(res.sol.v);
  }
}
BENCHMARK(BM_qp_cartpole_warm);

void BM_qp_random_small(benchmark::State& state) {
  Rng rng(5);
  const MldProblem p = random_problem(RandomProblemSpec{}, rng);
  const ParameterVector par = random_parameters(p, rng);
  DeltaTrajectory del;
  del.delta.assign(static_cast<std::size_t>(p.N), Eigen::VectorXd::Zero(p.ndelta()));
  const StackedQp qp = stack(p, par, del);
  for (auto _ : state) {
    QpResult res = solve_qp(qp);
    benchmark::DoNotOptimize(res.status);
  }
}
BENCHMARK(BM_qp_random_small);

}  // namespace
