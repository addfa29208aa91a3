#include "gbdmpc/gbd.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <cmath>
#include <limits>
#include <utility>

namespace gbdmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct TaggedFarkas {
  FarkasDual dual;
  int iter;
};
struct TaggedOptimal {
  OptimalDual dual;
  int iter;
};

}  // namespace

const char* to_string(GbdStatus s) {
  switch (s) {
    case GbdStatus::Optimal: return "Optimal";
    case GbdStatus::GapNotClosed: return "GapNotClosed";
    case GbdStatus::NoControl: return "NoControl";
    case GbdStatus::MasterInfeasible: return "MasterInfeasible";
  }
  return "Unknown";
}

double gap(double z_primal, double z_dual) {
  if (std::isinf(z_primal) || std::isinf(z_dual)) return kInf;
  if (z_primal == 0.0) return z_dual == 0.0 ? 0.0 : kInf;
  return std::abs(z_primal - z_dual) / std::abs(z_primal);
}

GbdResult gbd_solve(const MldProblem& p, const ParameterVector& par,
                    const CutBuffer& buf, const GbdSettings& s) {
  require(!s.modes.empty(), "gbd_solve: no admissible modes given");
  require(s.max_iters >= 1, "gbd_solve: max_iters must be positive");

  const Eigen::VectorXd theta = par.flatten();
  InstantiatedCuts inst = instantiate(buf, p, par);

  GreedyOptions gopts;
  gopts.lookahead = s.lookahead;
  gopts.max_backtracks = s.max_backtracks;
  gopts.enum_fallback_cap = s.enum_cap;
  gopts.check_restores = s.check_restores;

  GbdResult out;
  out.ub = kInf;
  out.lb = -kInf;
  out.u0 = Eigen::VectorXd::Zero(p.nu());

  std::vector<TaggedFarkas> pending_farkas;
  std::vector<TaggedOptimal> pending_optimal;
  std::vector<int> warm_active;
  bool have_warm = false;

  while (true) {
    if (gap(out.ub, out.lb) < s.gap_tol) {
      out.status = GbdStatus::Optimal;
      break;
    }

    ParsedCuts parsed = parse(inst);
    MasterSolution msol =
        s.exact_master ? solve_enumeration(parsed, s.modes, s.enum_cap)
                       : solve_greedy(parsed, s.modes, gopts);
    out.total_backtracks += msol.backtracks;
    out.max_restore_error = std::max(out.max_restore_error, msol.max_restore_error);
    if (msol.status == MasterStatus::Infeasible) {
      out.status = GbdStatus::MasterInfeasible;
      break;
    }
    if (msol.status == MasterStatus::BudgetExhausted) {
      out.status = out.control_found ? GbdStatus::GapNotClosed : GbdStatus::NoControl;
      break;
    }
    // The master value is a meaningful bound only once a real optimality cut
    // is in play; an empty objective just scores zero.
    if (!parsed.opt.empty()) {
      out.lb = msol.m_star;
      out.lb_certified = msol.exact;
    }

    if (gap(out.ub, out.lb) < s.gap_tol) {
      out.status = GbdStatus::Optimal;
      break;
    }
    if (out.iters >= s.max_iters) {
      out.status = out.control_found ? GbdStatus::GapNotClosed : GbdStatus::NoControl;
      break;
    }

    StackedQp qp = stack(p, par, msol.delta);
    QpResult res = solve_qp(qp, have_warm ? &warm_active : nullptr);
    ++out.iters;

    if (std::getenv("GBDMPC_TRACE")) {
      std::string ds;
      for (const auto& dk : msol.delta.delta) {
        int code = 0;
        for (int i = 0; i < dk.size(); ++i)
          if (dk(i) > 0.5) code = i + 1;
        ds += static_cast<char>('0' + code);
      }
      std::fprintf(stderr, "  it %d delta=%s m*=%.4g qp=%s v=%.6g nfeas=%zu nopt=%zu\n",
                   out.iters, ds.c_str(), msol.m_star,
                   res.status == QpStatus::Optimal ? "OPT" : "INF",
                   res.status == QpStatus::Optimal ? res.sol.v : 0.0, inst.feas.size(),
                   inst.opt.size());
    }

    if (res.status == QpStatus::Optimal) {
      warm_active = res.sol.active;
      have_warm = true;
      OptimalityCut oc = build_optimality_cut(res.sol, p, par, msol.delta);
      inst.opt.push_back({oc.V, oc.Cq - oc.Lambda.dot(theta)});
      pending_optimal.push_back({{res.sol.nu, res.sol.lambda, std::move(oc)}, out.iters});

      if (res.sol.v < out.ub) {
        out.ub = res.sol.v;
        out.delta = msol.delta;
        const int nx = p.nx(), nu = p.nu(), N = p.N;
        out.x_traj.resize(N + 1);
        for (int k = 0; k <= N; ++k)
          out.x_traj[k] = res.sol.z.segment(static_cast<Eigen::Index>(k) * nx, nx);
        out.u_traj.resize(N);
        const Eigen::Index ubase = static_cast<Eigen::Index>(N + 1) * nx;
        for (int k = 0; k < N; ++k)
          out.u_traj[k] = res.sol.z.segment(ubase + static_cast<Eigen::Index>(k) * nu, nu);
        out.u0 = out.u_traj[0];
        // Every improvement redefines the returned control, so this tracks
        // the iteration where the final incumbent was produced.
        out.control_found = true;
        out.iters_to_first_control = out.iters;
      }
    } else {
      FarkasDual fd{res.cert.nu, res.cert.lambda, build_feasibility_cuts(res.cert, p)};
      for (const auto& cut : fd.family)
        inst.feas.push_back({cut.V, cut.Lambda.dot(theta), cut.last_active_step});
      pending_farkas.push_back({std::move(fd), out.iters});
    }
  }

  out.gap = gap(out.ub, out.lb);

  // Keep the duals that informed the applied control; keep everything when
  // the step produced none, since the next step starts from the same hole.
  const int cutoff = out.control_found ? out.iters_to_first_control
                                       : std::numeric_limits<int>::max();
  for (auto& tf : pending_farkas)
    if (tf.iter <= cutoff) out.new_farkas.push_back(std::move(tf.dual));
  for (auto& to : pending_optimal)
    if (to.iter <= cutoff) out.new_optimal.push_back(std::move(to.dual));
  return out;
}

MpcStepResult mpc_step(const MldProblem& p, const ParameterVector& par,
                       CutBuffer& buf, const GbdSettings& s) {
  bind(buf, p);
  MpcStepResult out;
  out.gbd = gbd_solve(p, par, buf, s);
  store(buf, out.gbd.new_farkas, out.gbd.new_optimal);
  out.stored_farkas = buf.farkas.size();
  out.stored_optimal = buf.optimal.size();
  out.u = out.gbd.control_found ? out.gbd.u0 : Eigen::VectorXd::Zero(p.nu());
  return out;
}

MpcStepResult run_cold(const MldProblem& p, const ParameterVector& par,
                       const GbdSettings& s) {
  CutBuffer buf;
  return mpc_step(p, par, buf, s);
}

}  // namespace gbdmpc
