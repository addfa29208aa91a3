#pragma once

#include <cstdint>
#include <vector>

#include "gbdmpc/cartpole.hpp"
#include "gbdmpc/freeflyer.hpp"
#include "gbdmpc/gbd.hpp"

// Closed-loop episode runners. The controller plans on the linear model;
// the plant applies physical contact forces (cart-pole) or disturbance
// forces (free-flyer) on top of the commanded inputs. All randomness comes
// from one generator seeded per episode, and the per-step draw order is
// fixed, so traces are bit-identical for a given seed regardless of how
// the controller behaves.
namespace gbdmpc {

struct StepRecord {
  double t = 0.0;
  Eigen::VectorXd x;      // state at the start of the step
  Eigen::VectorXd u;      // input applied to the plant
  Eigen::VectorXd delta;  // planned binaries, flattened; zeros when none found
  GbdStatus status = GbdStatus::NoControl;
  bool control_found = false;
  int iters = 0;
  int iters_to_first_control = -1;
  double ub = 0.0;
  double lb = 0.0;
  double gap = 0.0;
  bool contact_planned = false;  // incumbent binary trajectory is nonzero
  std::size_t n_feas = 0, n_opt = 0;  // buffer occupancy after the step
  std::int64_t solve_ns = 0;
  double stage_cost = 0.0;
  double max_restore_error = 0.0;  // only audited under check_restores
};

struct EpisodeTrace {
  std::vector<StepRecord> steps;
  double total_cost = 0.0;
};

struct SimOptions {
  int steps = 100;
  bool warm = true;          // reuse one buffer across steps
  std::uint64_t seed = 1;
  double dist_scale = 1.0;   // scales the disturbance spread
};

EpisodeTrace simulate_cartpole(const CartPoleSystem& sys, const GbdSettings& gs,
                               CutBuffer& buf, const SimOptions& so);

EpisodeTrace simulate_freeflyer(const FreeFlyerSystem& sys, const GbdSettings& gs,
                                CutBuffer& buf, const SimOptions& so);

}  // namespace gbdmpc
