#pragma once

#include <Eigen/Dense>

#include "gbdmpc/common.hpp"

namespace gbdmpc {

/// Outcome of the feasibility search over {z : A z = b, C z <= d}.
/// Exactly one branch is populated: a point when feasible, row
/// multipliers (p_eq, p_in) proving infeasibility otherwise. The
/// multipliers satisfy A'p_eq + C'p_in = 0, p_in >= 0 and
/// b'p_eq + d'p_in < 0 up to simplex tolerances; callers are expected
/// to re-verify before relying on them.
struct LpFeasibility {
  bool feasible = false;
  Eigen::VectorXd point;
  Eigen::VectorXd p_eq;
  Eigen::VectorXd p_in;
  int iterations = 0;
};

/// Phase-1 of a two-phase primal simplex on the split-variable standard
/// form (no big-M). Free variables are split into positive parts, slacks
/// cover the inequalities, and artificials complete the starting basis.
/// Dantzig pricing with a Bland's-rule fallback once the objective stalls.
/// Throws Error on iteration-cap exhaustion or basis breakdown.
LpFeasibility lp_find_point(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const Eigen::MatrixXd& C, const Eigen::VectorXd& d);

}  // namespace gbdmpc
