#pragma once

#include <vector>

#include "gbdmpc/master.hpp"
#include "gbdmpc/mld_model.hpp"

// Planar point-mass robot flying to a goal through square obstacles. Each
// obstacle contributes two binaries selecting one of four exterior
// half-planes (left, right, below, above) the robot must stay in; a row for
// the wrong region is relaxed by a large constant per differing bit. The
// admissible per-step modes are enumerated offline by gridding the
// workspace and recording which region combination covers each free point.
namespace gbdmpc {

struct FreeFlyerParams {
  double mass = 1.0;
  double f_max = 30.0;  // per-axis force limit, N
  double v_max = 5.0;   // per-axis speed limit, m/s
  double dt = 0.02;

  double obs_width_mean = 0.7, obs_width_std = 0.05;
  double obs_jitter_std = 0.15;  // placement noise around the base grid
  double obs_spacing = 2.0;      // base grid pitch, m
  double obs_min_gap = 0.2;      // regenerate layouts tighter than this
  double big_m = 100.0;          // wrong-region relaxation constant

  double target_margin = 1.5;  // goal height above the top obstacle, m
  double grid_step = 0.25;     // workspace grid for mode enumeration
  double dist_std = 10.0;      // per-axis disturbance force, N

  int n_obstacles = 3;
  int N = 9;
};

struct Obstacle {
  double cx = 0.0, cy = 0.0, half = 0.35;
};

struct FreeFlyerSystem {
  FreeFlyerParams par;
  MldProblem prob;
  std::vector<Obstacle> obstacles;
  Eigen::Vector2d target;
  ModeList modes;
};

// Strict interior test.
bool point_in_obstacle(const Obstacle& o, double x, double y);

// Exterior region with the largest clearance: 0 left, 1 right, 2 below,
// 3 above; -1 when the point is inside.
int obstacle_region(const Obstacle& o, double x, double y);

// Randomized instance: obstacles on a jittered grid with a minimum gap,
// target x uniform across the field and y above every obstacle, modes from
// the workspace grid. Deterministic for a given generator state.
FreeFlyerSystem make_freeflyer(const FreeFlyerParams& par, Rng& rng);

// One stage's constraint right-hand side (constant: obstacles are static).
Eigen::VectorXd freeflyer_theta(const FreeFlyerSystem& sys);

// Parameters for a solve at state x.
ParameterVector freeflyer_parameters(const FreeFlyerSystem& sys, const Eigen::VectorXd& x);

}  // namespace gbdmpc
