#include "gbdmpc/diagnostics.hpp"

#include <cmath>

#include "gbdmpc/dense_qp.hpp"

namespace gbdmpc {

namespace {

// Powers of E stacked as [I; E; E^2; ...; E^N].
Eigen::MatrixXd state_rollout(const Eigen::MatrixXd& E, int N) {
  const int nx = static_cast<int>(E.rows());
  Eigen::MatrixXd phi((N + 1) * nx, nx);
  phi.topRows(nx).setIdentity();
  for (int k = 1; k <= N; ++k)
    phi.middleRows(k * nx, nx) = E * phi.middleRows((k - 1) * nx, nx);
  return phi;
}

// Block-lower-triangular input-to-state map: block (k, i) = E^(k-1-i) B
// for i < k, zero otherwise, over k = 0..N rows and i = 0..N-1 columns.
Eigen::MatrixXd rollout_map(const Eigen::MatrixXd& E, const Eigen::MatrixXd& B, int N) {
  const int nx = static_cast<int>(E.rows());
  const int nb = static_cast<int>(B.cols());
  Eigen::MatrixXd gam = Eigen::MatrixXd::Zero((N + 1) * nx, N * nb);
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd blk = B;
    for (int k = i + 1; k <= N; ++k) {
      gam.block(k * nx, i * nb, nx, nb) = blk;
      if (k < N) blk = E * blk;
    }
  }
  return gam;
}

}  // namespace

CondensedForm condense(const MldProblem& p) {
  const int nx = p.nx(), nu = p.nu(), nd = p.ndelta(), nc = p.nc(), N = p.N;
  require(N >= 1, "condense: horizon must be positive");
  const double eq_err = (p.xg - p.E * p.xg).lpNorm<Eigen::Infinity>();
  require(eq_err <= 1e-9 * (1.0 + p.xg.lpNorm<Eigen::Infinity>()),
          "condense: goal state is not an equilibrium of the dynamics");

  CondensedForm c;
  c.N = N;
  c.nx = nx;
  c.nu = nu;
  c.ndelta = nd;
  c.nc = nc;

  // Shift that moves the goal to the origin: states by xg, stage bounds by
  // the goal's constraint load H1 xg.
  c.shift.resize(p.ntheta());
  c.shift.head(nx) = p.xg;
  const Eigen::VectorXd h1xg = p.H1 * p.xg;
  for (int k = 0; k < N; ++k) c.shift.segment(nx + k * nc, nc) = h1xg;

  const Eigen::MatrixXd phi = state_rollout(p.E, N);
  const Eigen::MatrixXd gu = rollout_map(p.E, p.F, N);
  const Eigen::MatrixXd gd = rollout_map(p.E, p.G, N);

  Eigen::MatrixXd qblk = Eigen::MatrixXd::Zero((N + 1) * nx, (N + 1) * nx);
  for (int k = 0; k < N; ++k) qblk.block(k * nx, k * nx, nx, nx) = p.Q;
  qblk.block(N * nx, N * nx, nx, nx) = p.QN;
  Eigen::MatrixXd rblk = Eigen::MatrixXd::Zero(N * nu, N * nu);
  for (int k = 0; k < N; ++k) rblk.block(k * nu, k * nu, nu, nu) = p.R;

  const Eigen::MatrixXd qphi = qblk * phi;
  const Eigen::MatrixXd qgu = qblk * gu;
  const Eigen::MatrixXd qgd = qblk * gd;
  c.Mx = phi.transpose() * qphi;
  c.Mxd = 2.0 * phi.transpose() * qgd;
  c.Md = gd.transpose() * qgd;
  c.Mu = gu.transpose() * qgu + rblk;
  c.Mxu = 2.0 * phi.transpose() * qgu;
  c.Mdu = 2.0 * gd.transpose() * qgu;

  // Stage constraints with states eliminated:
  //   H1 x[k] + H2 u[k] + H3 d[k] <= theta[k]
  // becomes Nu U <= Ntheta Theta + Ndelta d over the stacked inputs.
  c.Nu = Eigen::MatrixXd::Zero(N * nc, N * nu);
  Eigen::MatrixXd ntheta = Eigen::MatrixXd::Zero(N * nc, p.ntheta());
  Eigen::MatrixXd ndel = Eigen::MatrixXd::Zero(N * nc, N * nd);
  for (int k = 0; k < N; ++k) {
    const Eigen::MatrixXd h1xk = p.H1 * phi.middleRows(k * nx, nx);
    ntheta.block(k * nc, 0, nc, nx) = -h1xk;
    ntheta.block(k * nc, nx + k * nc, nc, nc).setIdentity();
    for (int i = 0; i < k; ++i) {
      c.Nu.block(k * nc, i * nu, nc, nu) = p.H1 * gu.block(k * nx, i * nu, nx, nu);
      ndel.block(k * nc, i * nd, nc, nd) = -p.H1 * gd.block(k * nx, i * nd, nx, nd);
    }
    c.Nu.block(k * nc, k * nu, nc, nu) = p.H2;
    ndel.block(k * nc, k * nd, nc, nd) -= p.H3;
  }

  // Completing the square in U shifts the constraint right-hand side by
  // half the input response to the linear cost term.
  Eigen::LLT<Eigen::MatrixXd> llt(c.Mu);
  require(llt.info() == Eigen::Success, "condense: input Hessian not positive definite");
  const Eigen::MatrixXd numi_xu = c.Nu * llt.solve(c.Mxu.transpose());
  const Eigen::MatrixXd numi_du = c.Nu * llt.solve(c.Mdu.transpose());
  c.Wtheta = ntheta;
  c.Wtheta.leftCols(nx) += 0.5 * numi_xu;
  c.Wdelta = ndel + 0.5 * numi_du;
  return c;
}

Eigen::MatrixXd build_H(const CondensedForm& c, const std::vector<int>& active) {
  const int ntheta = c.nx + c.N * c.nc;
  const int ndd = c.N * c.ndelta;
  const int dim = ntheta + ndd;

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  H.topLeftCorner(c.nx, c.nx) += c.Mx;
  H.block(0, ntheta, c.nx, ndd) += 0.5 * c.Mxd;
  H.block(ntheta, 0, ndd, c.nx) += 0.5 * c.Mxd.transpose();
  H.bottomRightCorner(ndd, ndd) += c.Md;

  // Linear input cost term c_u = Mxu' x + Mdu' d, as a map from [Theta; d].
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(c.N * c.nu, dim);
  T.leftCols(c.nx) = c.Mxu.transpose();
  T.rightCols(ndd) = c.Mdu.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(c.Mu);
  require(llt.info() == Eigen::Success, "build_H: input Hessian not positive definite");
  H -= 0.25 * T.transpose() * llt.solve(T);

  if (!active.empty()) {
    const int na = static_cast<int>(active.size());
    Eigen::MatrixXd nact(na, c.N * c.nu);
    Eigen::MatrixXd gact(na, dim);
    for (int i = 0; i < na; ++i) {
      require(active[i] >= 0 && active[i] < c.N * c.nc, "build_H: active row out of range");
      nact.row(i) = c.Nu.row(active[i]);
      gact.row(i).head(ntheta) = c.Wtheta.row(active[i]);
      gact.row(i).tail(ndd) = c.Wdelta.row(active[i]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(nact.transpose());
    require(qr.rank() == na, "build_H: active rows are linearly dependent");
    const Eigen::MatrixXd S = nact * llt.solve(nact.transpose());
    H += gact.transpose() * S.ldlt().solve(gact);
  }
  return 0.5 * (H + H.transpose());
}

double condensed_value(const CondensedForm& c, const Eigen::MatrixXd& H,
                       const Eigen::VectorXd& theta, const Eigen::VectorXd& delta) {
  require(theta.size() == c.shift.size(), "condensed_value: parameter length mismatch");
  require(delta.size() == static_cast<Eigen::Index>(c.N) * c.ndelta,
          "condensed_value: binary length mismatch");
  Eigen::VectorXd y(theta.size() + delta.size());
  y << theta - c.shift, delta;
  return y.dot(H * y);
}

double lipschitz_constant(const CondensedForm& c, const Eigen::MatrixXd& H,
                          const Eigen::VectorXd& theta, const Eigen::VectorXd& delta) {
  Eigen::VectorXd y(theta.size() + delta.size());
  y << theta - c.shift, delta;
  return 2.0 * (H * y).norm();
}

GapBoundReport gap_bound_check(const MldProblem& p, const OptimalityCut& cut,
                               const ParameterVector& theta,
                               const DeltaTrajectory& delta, double L,
                               double L_delta) {
  const Eigen::VectorXd th = theta.flatten();
  const Eigen::VectorXd de = delta.flatten();
  require(cut.Lambda.size() == th.size(), "gap_bound_check: cut/parameter mismatch");
  require(cut.V.size() == de.size(), "gap_bound_check: cut/binary mismatch");

  QpResult res = solve_qp(stack(p, theta, delta));
  require(res.status == QpStatus::Optimal,
          "gap_bound_check: subproblem infeasible at the query point");

  GapBoundReport rep;
  rep.v = res.sol.v;
  rep.z0 = cut.Cq - cut.Lambda.dot(th) - cut.V.dot(de);
  rep.g_q = rep.v - rep.z0;

  const Eigen::VectorXd dtheta = th - cut.theta_q;
  const double nd = static_cast<double>(p.ndelta());
  const double base = L * dtheta.norm() + cut.Lambda.dot(dtheta) + cut.V.lpNorm<1>();
  rep.bound = base + L_delta * std::sqrt((p.N + 1) * nd);
  rep.bound_tight = base + L_delta * std::sqrt(p.N * nd);

  const double tol = 1e-9 * (1.0 + std::abs(rep.v));
  rep.ok = rep.g_q >= -tol && rep.g_q <= rep.bound_tight + tol;
  return rep;
}

}  // namespace gbdmpc
