#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include "gbdmpc/dense_qp.hpp"
#include "gbdmpc/master.hpp"
#include "gbdmpc/mld_model.hpp"
#include "gbdmpc/random_problems.hpp"

// Shared fixtures for the test binaries: a one-step scalar system small
// enough to solve by hand, dimension-randomized instances for fuzzing, an
// exhaustive reference solve over the binary grid, and the dual-side audit
// reused by several suites.
namespace gbdmpc::testing {

// Scalar system with one state, one input, and one binary over one step:
//
//   x+ = x + u + d,   u <= t0,  -u <= t1,  -u - 3 d <= t2,
//
// unit weights, goal at the origin. With the stage bounds (1, 1, -2) the
// subproblem is infeasible at d = 0 and has optimum 1/2 at d = 1, reached
// by z = (x0, x1, u) = (0, 1/2, -1/2) with equality duals (-1, -1).
inline MldProblem tiny_problem() {
  MldProblem p;
  p.N = 1;
  p.E = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.F = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.G = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.H1 = Eigen::MatrixXd::Zero(3, 1);
  p.H2 = Eigen::MatrixXd::Zero(3, 1);
  p.H2 << 1.0, -1.0, -1.0;
  p.H3 = Eigen::MatrixXd::Zero(3, 1);
  p.H3(2, 0) = -3.0;
  p.Q = Eigen::MatrixXd::Identity(1, 1);
  p.R = Eigen::MatrixXd::Identity(1, 1);
  p.QN = Eigen::MatrixXd::Identity(1, 1);
  p.xg = Eigen::VectorXd::Zero(1);
  return p;
}

inline ParameterVector tiny_parameters(double x_in = 0.0, double t0 = 1.0,
                                       double t1 = 1.0, double t2 = -2.0) {
  ParameterVector pv;
  pv.x_in = Eigen::VectorXd::Constant(1, x_in);
  Eigen::VectorXd th(3);
  th << t0, t1, t2;
  pv.theta.assign(1, th);
  return pv;
}

// Binary trajectory from flat step values, ndelta entries per step.
inline DeltaTrajectory delta_of(const MldProblem& p, std::initializer_list<double> vals) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double v : vals) flat(i++) = v;
  return DeltaTrajectory::unflatten(flat, p.N, p.ndelta());
}

// Instance with dimensions drawn uniformly inside the fuzzing envelope.
inline MldProblem random_instance(Rng& rng, int max_nx = 3, int max_ndelta = 2,
                                  int max_N = 5) {
  RandomProblemSpec spec;
  spec.nx = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_nx)));
  spec.nu = 1 + static_cast<int>(rng.below(2));
  spec.ndelta = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_ndelta)));
  spec.nc = 2 + static_cast<int>(rng.below(3));
  spec.N = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_N)));
  return random_problem(spec, rng);
}

// Re-derivation of the dual-side verification gates, kept separate from the
// solver so a regression in its internal checks still trips the tests.
struct DualAudit {
  long optimal_checked = 0;
  long farkas_checked = 0;
  long violations = 0;
  std::string first_failure;

  void flag(const std::string& what) {
    ++violations;
    if (first_failure.empty()) first_failure = what;
  }

  void check(const StackedQp& qp, const QpResult& res) {
    const double scale = qp_scale(qp.A, qp.b, qp.C, qp.d);
    if (res.status == QpStatus::Optimal) {
      ++optimal_checked;
      const QpSolution& s = res.sol;
      // Multipliers are unbounded on degenerate active sets, so every gate
      // that involves them is relative to the largest participating term.
      const Eigen::VectorXd gq = 2.0 * qp.Qbar * (s.z - qp.zg);
      const Eigen::VectorXd an = qp.A.transpose() * s.nu;
      const Eigen::VectorXd cl = qp.C.transpose() * s.lambda;
      const double stat_ref = scale + gq.lpNorm<Eigen::Infinity>() +
                              an.lpNorm<Eigen::Infinity>() +
                              cl.lpNorm<Eigen::Infinity>();
      if ((gq + an + cl).lpNorm<Eigen::Infinity>() > 1e-6 * stat_ref)
        flag("stationarity");
      const double mu_ref =
          1.0 + std::max(s.nu.size() ? s.nu.lpNorm<Eigen::Infinity>() : 0.0,
                         s.lambda.size() ? s.lambda.lpNorm<Eigen::Infinity>() : 0.0);
      if (s.lambda.size() > 0 && s.lambda.minCoeff() < -1e-9 * mu_ref)
        flag("negative multiplier");
      if (qp.A.rows() > 0 &&
          (qp.A * s.z - qp.b).lpNorm<Eigen::Infinity>() > 1e-6 * scale)
        flag("equality residual");
      if (qp.C.rows() > 0 && (qp.C * s.z - qp.d).maxCoeff() > 1e-6 * scale)
        flag("inequality violation");
      if (qp.C.rows() > 0) {
        const Eigen::VectorXd slack = qp.d - qp.C * s.z;
        if (s.lambda.cwiseProduct(slack).lpNorm<Eigen::Infinity>() >
            1e-6 * scale * mu_ref)
          flag("complementarity");
      }
      const double g = dual_value(qp, s.nu, s.lambda);
      if (std::abs(s.v - g) > 1e-6 * (1.0 + std::abs(s.v))) flag("strong duality");
    } else {
      ++farkas_checked;
      if (!verify_farkas(res.cert, qp.A, qp.b, qp.C, qp.d)) flag("farkas certificate");
    }
  }
};

struct OracleResult {
  bool feasible = false;
  double v = std::numeric_limits<double>::infinity();
  Eigen::VectorXd delta;  // flattened argmin when feasible
};

// Exhaustive reference: solve the subproblem at every mode trajectory and
// keep the best. Every solve is audited when a collector is given.
inline OracleResult miqp_bruteforce(const MldProblem& p, const ParameterVector& pv,
                                    const ModeList& modes, DualAudit* audit = nullptr) {
  OracleResult out;
  const int N = p.N;
  const int nmodes = static_cast<int>(modes.size());
  std::vector<int> digit(N, 0);
  DeltaTrajectory dt;
  dt.delta.resize(N);
  while (true) {
    for (int k = 0; k < N; ++k) dt.delta[k] = modes[digit[k]];
    const StackedQp qp = stack(p, pv, dt);
    const QpResult res = solve_qp(qp);
    if (audit) audit->check(qp, res);
    if (res.status == QpStatus::Optimal && res.sol.v < out.v) {
      out.feasible = true;
      out.v = res.sol.v;
      out.delta = dt.flatten();
    }
    int pos = N - 1;
    while (pos >= 0 && ++digit[pos] == nmodes) digit[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

}  // namespace gbdmpc::testing
