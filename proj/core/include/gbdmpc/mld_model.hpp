#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gbdmpc/common.hpp"

namespace gbdmpc {

/// Mixed logical dynamical model over a horizon of N steps:
///
///   x[k+1] = E x[k] + F u[k] + G d[k]
///   H1 x[k] + H2 u[k] + H3 d[k] <= theta[k],   k = 0..N-1
///
/// with binary d[k] in {0,1}^ndelta, quadratic stage cost
/// (x-xg)'Q(x-xg) + u'Ru and terminal cost (x[N]-xg)'QN(x[N]-xg).
/// Stage matrices are time invariant; everything that varies online
/// (initial state, constraint right-hand sides) lives in ParameterVector.
struct MldProblem {
  Eigen::MatrixXd E, F, G;
  Eigen::MatrixXd H1, H2, H3;
  Eigen::MatrixXd Q, R, QN;
  Eigen::VectorXd xg;
  int N = 0;

  int nx() const { return static_cast<int>(E.rows()); }
  int nu() const { return static_cast<int>(F.cols()); }
  int ndelta() const { return static_cast<int>(G.cols()); }
  int nc() const { return static_cast<int>(H1.rows()); }

  /// Stacked decision length (N+1 states then N inputs).
  int nz() const { return (N + 1) * nx() + N * nu(); }
  /// Parameter length: initial state plus N constraint right-hand sides.
  int ntheta() const { return nx() + N * nc(); }
};

/// Online parameters: Theta = [x_in; theta[0]; ...; theta[N-1]].
struct ParameterVector {
  Eigen::VectorXd x_in;
  std::vector<Eigen::VectorXd> theta;

  Eigen::VectorXd flatten() const;
  static ParameterVector unflatten(const Eigen::VectorXd& v, const MldProblem& p);
};

/// Binary trajectory d[0..N-1]; entries are exactly 0.0 or 1.0.
struct DeltaTrajectory {
  std::vector<Eigen::VectorXd> delta;

  Eigen::VectorXd flatten() const;
  static DeltaTrajectory unflatten(const Eigen::VectorXd& v, int N, int ndelta);
  bool any_nonzero() const;
};

/// Dense subproblem for a fixed binary trajectory:
///   min (z-zg)' Qbar (z-zg)  s.t.  A z = b, C z <= d
/// with z = (x[0..N], u[0..N-1]). Equality rows are the initial-state pin
/// followed by the N dynamics rows; inequality rows are the N stage blocks.
struct StackedQp {
  Eigen::MatrixXd Qbar;
  Eigen::VectorXd zg;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd C;
  Eigen::VectorXd d;
};

/// Validates dimensions and weight-matrix positive definiteness
/// (symmetry to 1e-9 relative, minimum eigenvalue > 1e-10).
void validate(const MldProblem& p);

/// Builds the dense subproblem for (Theta, delta). Pure and deterministic.
StackedQp stack(const MldProblem& p, const ParameterVector& th, const DeltaTrajectory& del);

/// Solves the discrete algebraic Riccati equation
///   P = Q + E'PE - E'PF (R + F'PF)^-1 F'PE
/// by fixed-point iteration from P = Q. Throws if the residual does not
/// reach 1e-9 in Frobenius norm within the iteration cap.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& E, const Eigen::MatrixXd& F,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Reads/writes an MldProblem as JSON with row-major matrix arrays under
/// keys dims{nx,nu,ndelta,nc,N}, E,F,G,H1,H2,H3,Q,R,QN and vector xg.
MldProblem load_problem(const std::string& path);
void save_problem(const MldProblem& p, const std::string& path);

}  // namespace gbdmpc
