#pragma once

#include "gbdmpc/master.hpp"
#include "gbdmpc/mld_model.hpp"

// Cart-pole balancing between two moving elastic walls. The pole tip can
// touch a right wall at distance d1 and a left wall at distance d2 from the
// origin; wall contact is a spring force gated by one binary per wall. The
// controller sees the linearized discrete model; the walls move and their
// current positions enter only through the stage parameter vector.
namespace gbdmpc {

struct CartPoleParams {
  double mc = 1.0;    // cart mass, kg
  double mp = 0.4;    // pole tip mass, kg
  double l = 0.6;     // pole length, m
  double grav = 9.81;
  double k1 = 50.0;   // right/left wall spring rates, N/m
  double k2 = 50.0;
  double dt = 0.02;

  double f_max = 20.0;      // cart force limit, N
  double lam_cap = 100.0;   // contact force cap, N (also the gating constant)
  double x1_max = 0.5;      // cart travel, m
  double x2_max = 1.5707963267948966;  // pole angle, rad
  double x3_max = 5.0;      // cart speed, m/s
  double x4_max = 10.0;     // pole rate, rad/s
  double big_gap = 5.0;     // bound on penetration expressions for gating

  double d0 = 0.35;         // nominal wall distance, m
  double d_min = 0.12, d_max = 1.0;
  double wall_amp = 0.03;   // sinusoidal wall sweep amplitude, m
  double wall_freq = 1.0;   // Hz
  double brown_std = 0.005; // random-walk increment per control step, m
  double dist_std = 8.0;    // pole disturbance torque, Nm

  double theta0 = 0.17453292519943295;  // initial pole angle, 10 degrees
  int N = 10;
};

struct CartPoleSystem {
  CartPoleParams par;
  MldProblem prob;        // controller model, terminal weight from Riccati
  Eigen::MatrixXd Ad;     // discrete dynamics (same matrix as prob.E)
  Eigen::MatrixXd Bd;     // discrete input map (same as prob.F)
  Eigen::VectorXd btau;   // discrete disturbance-torque column
};

// Continuous-time linearization about the upright equilibrium, derived in
// closed form: Ac (4x4), Bc (4x3) over u = [f, lam1, lam2], and the
// disturbance-torque column btau. The wall forces cancel out of the cart
// equation, so Bc's contact columns act on the pole rate only.
void cartpole_linearization(const CartPoleParams& par, Eigen::MatrixXd& Ac,
                            Eigen::MatrixXd& Bc, Eigen::VectorXd& btau);

// Nonlinear equations of motion (point-mass pole on a massless rod, wall
// forces applied at the tip). State (x1, x2, x3, x4), inputs (f, lam1,
// lam2) and a disturbance torque on the pole. Used as the linearization
// oracle and for integration cross-checks.
Eigen::VectorXd cartpole_ode(const CartPoleParams& par, const Eigen::VectorXd& x,
                             double f, double lam1, double lam2, double tau);

// Full controller model: zero-order-hold discretization, 20 stage
// constraint rows (per wall: force sign, force gating, no-penetration,
// gated contact equality, force cap; then force and state boxes), weights
// Q = diag(1, 50, 1, 50), R = 0.1 I, terminal weight from the Riccati
// recursion on the discrete model.
CartPoleSystem make_cartpole(const CartPoleParams& par);

// One stage's constraint right-hand side at wall distances (d1, d2).
Eigen::VectorXd cartpole_theta(const CartPoleParams& par, double d1, double d2);

// Parameters for a solve at state x with both walls held at their current
// positions over the whole horizon.
ParameterVector cartpole_parameters(const CartPoleSystem& sys, const Eigen::VectorXd& x,
                                    double d1, double d2);

// Admissible per-step contact modes: none, right wall, left wall.
ModeList cartpole_modes();

// Physical wall forces at state x: spring law on the linearized tip
// coordinate x1 - l*x2, active only under penetration.
Eigen::Vector2d cartpole_contact_forces(const CartPoleParams& par,
                                        const Eigen::VectorXd& x, double d1, double d2);

// Wall distance at time t given the accumulated random-walk offset,
// clamped to the admissible band.
double cartpole_wall_position(const CartPoleParams& par, double t, double walk);

}  // namespace gbdmpc
