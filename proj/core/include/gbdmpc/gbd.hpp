#pragma once

#include <cstdint>
#include <vector>

#include "gbdmpc/cuts.hpp"
#include "gbdmpc/dense_qp.hpp"
#include "gbdmpc/master.hpp"
#include "gbdmpc/mld_model.hpp"

// Decomposition engine. Each solve alternates a combinatorial master over the
// binary trajectory with a convex subproblem over the continuous variables,
// feeding certificates back as cuts until the bound gap closes or the
// iteration budget runs out.
namespace gbdmpc {

enum class GbdStatus {
  Optimal,           // relative gap below tolerance
  GapNotClosed,      // budget hit with a feasible control in hand
  NoControl,         // budget hit before any subproblem was feasible
  MasterInfeasible,  // accumulated cuts exclude every mode sequence
};

const char* to_string(GbdStatus s);

struct GbdSettings {
  double gap_tol = 0.1;       // relative UB/LB gap target
  int max_iters = 5;          // subproblem solve budget per step
  bool exact_master = false;  // enumerate mode sequences instead of greedy
  bool lookahead = false;     // one-step relaxation rows in the greedy master
  std::uint64_t enum_cap = std::uint64_t{1} << 20;
  std::uint64_t max_backtracks = UINT64_MAX;
  bool check_restores = false;  // audit incremental master bookkeeping
  ModeList modes;               // admissible per-step binary assignments
};

struct GbdResult {
  GbdStatus status = GbdStatus::NoControl;
  bool control_found = false;
  Eigen::VectorXd u0;                     // first input; zero when none found
  std::vector<Eigen::VectorXd> u_traj;    // incumbent input trajectory
  std::vector<Eigen::VectorXd> x_traj;    // incumbent state trajectory
  DeltaTrajectory delta;                  // incumbent binary trajectory
  double ub = 0.0;                        // best subproblem value seen
  double lb = 0.0;                        // last master value
  double gap = 0.0;                       // relative gap at exit
  bool lb_certified = false;              // lb came from an exact master
  int iters = 0;                          // subproblem solves performed
  int iters_to_first_control = -1;        // 1-based, -1 when none
  std::uint64_t total_backtracks = 0;
  double max_restore_error = 0.0;         // only audited under check_restores
  // Duals generated this solve, already filtered to the ones worth keeping:
  // everything up to the iteration that produced the applied control, or
  // everything when no control was found.
  std::vector<FarkasDual> new_farkas;
  std::vector<OptimalDual> new_optimal;
};

// Relative gap between a primal value (upper bound) and dual value (lower
// bound). Infinite if either bound is infinite, zero if both values are zero,
// infinite if the primal value is zero but the dual is not.
double gap(double z_primal, double z_dual);

// One decomposition solve against a fixed cut store. Does not modify the
// buffer; freshly generated duals are returned in the result.
GbdResult gbd_solve(const MldProblem& p, const ParameterVector& par,
                    const CutBuffer& buf, const GbdSettings& s);

struct MpcStepResult {
  GbdResult gbd;
  Eigen::VectorXd u;  // applied input (zero vector when no control was found)
  std::size_t stored_farkas = 0;   // buffer size after the step
  std::size_t stored_optimal = 0;  // buffer size after the step
};

// One receding-horizon step: rebind the buffer to the problem (flushing it if
// the model or cost changed), solve, store the harvested duals, and report
// the input to apply.
MpcStepResult mpc_step(const MldProblem& p, const ParameterVector& par,
                       CutBuffer& buf, const GbdSettings& s);

// Same step but from an empty buffer, so nothing carries over between calls.
MpcStepResult run_cold(const MldProblem& p, const ParameterVector& par,
                       const GbdSettings& s);

}  // namespace gbdmpc
