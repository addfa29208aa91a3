#pragma once

#include "gbdmpc/master.hpp"
#include "gbdmpc/mld_model.hpp"

// Random well-posed instances for fuzzing and oracle comparisons. All draws
// come from the caller's generator, so instances are reproducible from a
// seed alone.
namespace gbdmpc {

struct RandomProblemSpec {
  int nx = 2, nu = 1, ndelta = 1, nc = 4, N = 3;
};

// Dynamics with spectral radius at most 0.9, dense weight matrices that are
// symmetric positive definite, and moderate constraint coefficients.
MldProblem random_problem(const RandomProblemSpec& spec, Rng& rng);

// Gaussian initial state and positive constraint headroom scaled by slack.
// Small slack values produce instances whose subproblems are infeasible for
// some (or all) binary choices.
ParameterVector random_parameters(const MldProblem& p, Rng& rng, double slack = 2.0);

// Every binary assignment of one step, in lexicographic order.
ModeList all_modes(int ndelta);

}  // namespace gbdmpc
