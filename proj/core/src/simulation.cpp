#include "gbdmpc/simulation.hpp"

#include <chrono>

namespace gbdmpc {

namespace {

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double stage_cost(const MldProblem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  const Eigen::VectorXd e = x - p.xg;
  return e.dot(p.Q * e) + u.dot(p.R * u);
}

StepRecord record_step(const MpcStepResult& res, const MldProblem& p, double t,
                       const Eigen::VectorXd& x, std::int64_t ns) {
  StepRecord rec;
  rec.t = t;
  rec.x = x;
  rec.status = res.gbd.status;
  rec.control_found = res.gbd.control_found;
  rec.iters = res.gbd.iters;
  rec.iters_to_first_control = res.gbd.iters_to_first_control;
  rec.ub = res.gbd.ub;
  rec.lb = res.gbd.lb;
  rec.gap = res.gbd.gap;
  rec.delta = res.gbd.control_found
                  ? res.gbd.delta.flatten()
                  : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.N) * p.ndelta());
  rec.contact_planned = res.gbd.control_found && res.gbd.delta.any_nonzero();
  rec.n_feas = res.stored_farkas;
  rec.n_opt = res.stored_optimal;
  rec.solve_ns = ns;
  rec.max_restore_error = res.gbd.max_restore_error;
  return rec;
}

}  // namespace

EpisodeTrace simulate_cartpole(const CartPoleSystem& sys, const GbdSettings& gs,
                               CutBuffer& buf, const SimOptions& so) {
  EpisodeTrace trace;
  Rng rng(so.seed);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  x(1) = sys.par.theta0;
  double walk1 = 0.0, walk2 = 0.0;

  for (int k = 0; k < so.steps; ++k) {
    const double t = k * sys.par.dt;
    // Fixed draw order per step: two wall increments, one torque.
    walk1 += rng.normal(0.0, sys.par.brown_std);
    walk2 += rng.normal(0.0, sys.par.brown_std);
    const double tau = rng.normal(0.0, sys.par.dist_std * so.dist_scale);
    const double d1 = cartpole_wall_position(sys.par, t, walk1);
    const double d2 = cartpole_wall_position(sys.par, t, walk2);

    const ParameterVector pv = cartpole_parameters(sys, x, d1, d2);
    const std::int64_t t0 = now_ns();
    const MpcStepResult res = so.warm ? mpc_step(sys.prob, pv, buf, gs)
                                      : run_cold(sys.prob, pv, gs);
    StepRecord rec = record_step(res, sys.prob, t, x, now_ns() - t0);

    // The plant takes the commanded force; wall forces come from the
    // spring law at the current state, not from the plan.
    const Eigen::Vector2d lam = cartpole_contact_forces(sys.par, x, d1, d2);
    Eigen::VectorXd u(3);
    u << res.u(0), lam(0), lam(1);
    rec.u = u;
    rec.stage_cost = stage_cost(sys.prob, x, u);
    trace.total_cost += rec.stage_cost;
    trace.steps.push_back(std::move(rec));

    x = sys.Ad * x + sys.Bd * u + sys.btau * tau;
  }
  return trace;
}

EpisodeTrace simulate_freeflyer(const FreeFlyerSystem& sys, const GbdSettings& gs,
                                CutBuffer& buf, const SimOptions& so) {
  EpisodeTrace trace;
  Rng rng(so.seed);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);

  for (int k = 0; k < so.steps; ++k) {
    const double t = k * sys.par.dt;
    Eigen::Vector2d mu;
    mu << rng.normal(0.0, sys.par.dist_std * so.dist_scale),
        rng.normal(0.0, sys.par.dist_std * so.dist_scale);

    const ParameterVector pv = freeflyer_parameters(sys, x);
    const std::int64_t t0 = now_ns();
    const MpcStepResult res = so.warm ? mpc_step(sys.prob, pv, buf, gs)
                                      : run_cold(sys.prob, pv, gs);
    StepRecord rec = record_step(res, sys.prob, t, x, now_ns() - t0);
    rec.u = res.u;
    rec.stage_cost = stage_cost(sys.prob, x, res.u);
    trace.total_cost += rec.stage_cost;
    trace.steps.push_back(std::move(rec));

    x = sys.prob.E * x + sys.prob.F * (res.u + mu);
  }
  return trace;
}

}  // namespace gbdmpc
