#pragma once

#include <vector>

#include "gbdmpc/cuts.hpp"
#include "gbdmpc/mld_model.hpp"

// Condensed-form diagnostics: eliminate the state trajectory from the
// subproblem, complete the square in the inputs, and express the optimal
// cost on a fixed active set as a single quadratic form in the parameters
// and binaries. That form yields a local Lipschitz constant for the optimal
// cost, which in turn bounds how far an optimality cut built at one
// parameter point can drift below the true cost at another.
namespace gbdmpc {

struct CondensedForm {
  // Cost pieces after state elimination, taken in the goal-shifted frame:
  //   v = x'Mx x + x'Mxd d + d'Md d + min_U U'Mu U + (x'Mxu + d'Mdu) U
  Eigen::MatrixXd Mx, Mxd, Md, Mu, Mxu, Mdu;
  // Constraint pieces after completing the square (decision z):
  //   Nu z <= Wtheta Theta_shifted + Wdelta d
  Eigen::MatrixXd Nu, Wtheta, Wdelta;
  // Subtract from a flattened parameter vector to land in the shifted
  // frame where the goal is the origin.
  Eigen::VectorXd shift;
  int N = 0, nx = 0, nu = 0, ndelta = 0, nc = 0;
};

// Builds the condensed form. Requires the goal to be an equilibrium of the
// autonomous dynamics (E xg = xg), otherwise the cost is not a pure
// quadratic in the shifted parameters and this representation is invalid.
CondensedForm condense(const MldProblem& p);

// Quadratic form H with  v(Theta, delta) = y' H y,  y = [Theta_shifted; d],
// valid while the given rows of Nu stay active at the optimum. Throws if
// the active rows are linearly dependent.
Eigen::MatrixXd build_H(const CondensedForm& c, const std::vector<int>& active);

// Evaluates y' H y at unshifted Theta.
double condensed_value(const CondensedForm& c, const Eigen::MatrixXd& H,
                       const Eigen::VectorXd& theta, const Eigen::VectorXd& delta);

// Local Lipschitz constant 2 * || H y ||_2 at unshifted Theta. The optimal
// cost difference between two points in one critical region is bounded by
// this constant (taken at the worst point of the segment) times the
// parameter distance.
double lipschitz_constant(const CondensedForm& c, const Eigen::MatrixXd& H,
                          const Eigen::VectorXd& theta, const Eigen::VectorXd& delta);

struct GapBoundReport {
  double v = 0.0;          // true subproblem optimum at the query point
  double z0 = 0.0;         // cut value at the query point
  double g_q = 0.0;        // v - z0, nonnegative for a valid cut
  double bound = 0.0;      // drift bound with the loose sqrt((N+1)*ndelta)
  double bound_tight = 0.0;  // same with sqrt(N*ndelta)
  bool ok = false;         // 0 <= g_q <= bound_tight up to tolerance
};

// Measures how far below the true optimum the given optimality cut sits at
// (theta, delta) and compares against the Lipschitz drift bound
//   g_q <= L ||dTheta||_2 + Lambda' dTheta + L_delta sqrt((N+1) ndelta) + ||V||_1
// with dTheta measured from the cut's construction point. Throws if the
// subproblem at the query point is infeasible.
GapBoundReport gap_bound_check(const MldProblem& p, const OptimalityCut& cut,
                               const ParameterVector& theta,
                               const DeltaTrajectory& delta, double L,
                               double L_delta);

}  // namespace gbdmpc
