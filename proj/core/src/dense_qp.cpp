#include "gbdmpc/dense_qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <limits>

#include "gbdmpc/lp_simplex.hpp"

namespace gbdmpc {

double qp_scale(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                const Eigen::MatrixXd& C, const Eigen::VectorXd& d) {
  double s = 0.0;
  if (A.size() > 0) s = std::max(s, A.lpNorm<Eigen::Infinity>());
  if (C.size() > 0) s = std::max(s, C.lpNorm<Eigen::Infinity>());
  if (b.size() > 0) s = std::max(s, b.lpNorm<Eigen::Infinity>());
  if (d.size() > 0) s = std::max(s, d.lpNorm<Eigen::Infinity>());
  return 1.0 + s;
}

namespace {

FarkasCertificate normalized(Eigen::VectorXd nu, Eigen::VectorXd lambda) {
  const double n1 = nu.size() ? nu.lpNorm<Eigen::Infinity>() : 0.0;
  const double n2 = lambda.size() ? lambda.lpNorm<Eigen::Infinity>() : 0.0;
  const double nrm = std::max(n1, n2);
  require(nrm > 0.0 && std::isfinite(nrm), "phase1: degenerate Farkas certificate");
  return FarkasCertificate{nu / nrm, lambda / nrm};
}

}  // namespace

bool verify_farkas(const FarkasCertificate& cert, const Eigen::MatrixXd& A,
                   const Eigen::VectorXd& b, const Eigen::MatrixXd& C,
                   const Eigen::VectorXd& d) {
  if (cert.nu.size() != A.rows() || cert.lambda.size() != C.rows()) return false;
  const double n1 = cert.nu.size() ? cert.nu.lpNorm<Eigen::Infinity>() : 0.0;
  const double n2 = cert.lambda.size() ? cert.lambda.lpNorm<Eigen::Infinity>() : 0.0;
  const double nrm = std::max(n1, n2);
  if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
  Eigen::VectorXd nu = cert.nu / nrm;
  Eigen::VectorXd lam = cert.lambda / nrm;
  if (lam.size() && lam.minCoeff() < -1e-9) return false;
  Eigen::VectorXd resid = A.transpose() * nu + C.transpose() * lam;
  const double scale = qp_scale(A, b, C, d);
  if (resid.lpNorm<Eigen::Infinity>() > 1e-7 * scale) return false;
  return b.dot(nu) + d.dot(lam) <= -1e-8;
}

Phase1Result phase1(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    const Eigen::MatrixXd& C, const Eigen::VectorXd& d) {
  LpFeasibility lp = lp_find_point(A, b, C, d);
  const double scale = qp_scale(A, b, C, d);
  Phase1Result out;
  if (lp.feasible) {
    const double eq_resid =
        A.rows() ? (A * lp.point - b).lpNorm<Eigen::Infinity>() : 0.0;
    const double in_resid =
        C.rows() ? (C * lp.point - d).maxCoeff() : 0.0;
    require(eq_resid <= 1e-7 * scale && in_resid <= 1e-7 * scale,
            "phase1: simplex reported feasible but the point fails verification");
    out.feasible = true;
    out.z0 = lp.point;
  } else {
    out.feasible = false;
    out.cert = normalized(lp.p_eq, lp.p_in);
    require(verify_farkas(out.cert, A, b, C, d),
            "phase1: simplex reported infeasible but the certificate fails verification");
  }
  return out;
}

double dual_value(const StackedQp& qp, const Eigen::VectorXd& nu,
                  const Eigen::VectorXd& lambda) {
  require(nu.size() == qp.A.rows() && lambda.size() == qp.C.rows(),
          "dual_value: multiplier length mismatch");
  Eigen::VectorXd w = qp.A.transpose() * nu + qp.C.transpose() * lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(qp.Qbar);
  require(llt.info() == Eigen::Success, "dual_value: Qbar not positive definite");
  Eigen::VectorXd Kw = llt.solve(w);
  return -0.25 * w.dot(Kw) + qp.zg.dot(w) - qp.b.dot(nu) - qp.d.dot(lambda);
}

QpResult solve_qp(const StackedQp& qp, const std::vector<int>* warm_active) {
  const int n = static_cast<int>(qp.Qbar.rows());
  const int l = static_cast<int>(qp.A.rows());
  const int m = static_cast<int>(qp.C.rows());
  require(qp.zg.size() == n && qp.A.cols() == n && qp.b.size() == l &&
              (m == 0 || qp.C.cols() == n) && qp.d.size() == m,
          "solve_qp: dimension mismatch");

  QpResult out;
  Phase1Result ph = phase1(qp.A, qp.b, qp.C, qp.d);
  if (!ph.feasible) {
    out.status = QpStatus::Infeasible;
    out.cert = ph.cert;
    return out;
  }

  const double scale = qp_scale(qp.A, qp.b, qp.C, qp.d);
  Eigen::LLT<Eigen::MatrixXd> llt(qp.Qbar);
  require(llt.info() == Eigen::Success, "solve_qp: Qbar not positive definite");

  Eigen::VectorXd z = ph.z0;
  std::vector<int> W;

  // Seed the working set from a prior active set: keep rows that are tight
  // at the start point and independent of what is already held.
  if (warm_active) {
    for (int i : *warm_active) {
      if (i < 0 || i >= m) continue;
      if (std::abs(qp.C.row(i).dot(z) - qp.d(i)) > 1e-7 * scale) continue;
      std::vector<int> trial = W;
      trial.push_back(i);
      Eigen::MatrixXd M(l + trial.size(), n);
      M.topRows(l) = qp.A;
      for (size_t t = 0; t < trial.size(); ++t) M.row(l + t) = qp.C.row(trial[t]);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M.transpose());
      if (qr.rank() == static_cast<Eigen::Index>(l + trial.size())) W = trial;
    }
  }

  const int cap = 200 + 6 * (m + n);
  Eigen::VectorXd g(n), p(n), mu;
  for (int it = 0; it < cap; ++it) {
    const int nw = static_cast<int>(W.size());
    Eigen::MatrixXd M(l + nw, n);
    M.topRows(l) = qp.A;
    for (int t = 0; t < nw; ++t) M.row(l + t) = qp.C.row(W[t]);

    g = 2.0 * (qp.Qbar * (z - qp.zg));

    // Direct solve of the unreduced saddle system for the minimizer on the
    // current working set. Two traps are avoided here: the Schur complement
    // M Qbar^-1 M' squares the conditioning of M, and an incremental step
    // formulation inherits noise proportional to the distance of the current
    // iterate, which can dwarf the step when phase 1 returns a far vertex.
    const int dim = n + l + nw;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim, dim);
    K.topLeftCorner(n, n) = 2.0 * qp.Qbar;
    K.block(n, 0, l + nw, n) = M;
    K.block(0, n, n, l + nw) = M.transpose();
    Eigen::VectorXd rhs(dim);
    rhs.head(n) = 2.0 * (qp.Qbar * qp.zg);
    rhs.segment(n, l) = qp.b;
    for (int t = 0; t < nw; ++t) rhs(n + l + t) = qp.d(W[t]);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    Eigen::VectorXd step = lu.solve(rhs);
    // Iterative refinement: on nearly dependent working sets the condition
    // number reaches 1e12 and a single solve leaves the active rows satisfied
    // only to ~1e-6, which the primal feasibility gate rejects.
    for (int pass = 0; pass < 3 && step.allFinite(); ++pass) {
      const Eigen::VectorXd resid = rhs - K * step;
      if (resid.lpNorm<Eigen::Infinity>() <=
          1e-13 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
        break;
      step += lu.solve(resid);
    }
    // A backward-stable solve leaves a residual proportional to |K||step|,
    // which dwarfs |rhs| when the minimizer or its multipliers are large, so
    // the singularity tripwire must reference both.
    const double kkt_ref = 1.0 + rhs.lpNorm<Eigen::Infinity>() +
                           K.cwiseAbs().rowwise().sum().maxCoeff() *
                               step.lpNorm<Eigen::Infinity>();
    require(step.allFinite() && (K * step - rhs).lpNorm<Eigen::Infinity>() <=
                                    1e-6 * kkt_ref,
            "solve_qp: working-set KKT system is singular");
    p = step.head(n) - z;
    mu = step.tail(l + nw);

    if (p.lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + z.lpNorm<Eigen::Infinity>())) {
      // Stationary on the working set; check multiplier signs. Multipliers
      // are unbounded on nearly dependent working sets, so sign tests are
      // relative to their magnitude.
      const double mu_ref = 1.0 + (mu.size() ? mu.lpNorm<Eigen::Infinity>() : 0.0);
      int drop = -1;
      double most_negative = -1e-9 * mu_ref;
      for (int t = 0; t < nw; ++t) {
        if (mu(l + t) < most_negative) {
          most_negative = mu(l + t);
          drop = t;
        }
      }
      if (drop < 0) {
        QpSolution sol;
        sol.z = z;
        sol.v = (z - qp.zg).dot(qp.Qbar * (z - qp.zg));
        sol.nu = mu.head(l);
        sol.lambda = Eigen::VectorXd::Zero(m);
        for (int t = 0; t < nw; ++t) sol.lambda(W[t]) = mu(l + t);
        sol.active = W;
        std::sort(sol.active.begin(), sol.active.end());

        // Hard verification gates; a failure here is a solver bug, never a
        // silently wrong answer. Residual tolerances are relative to the
        // largest term entering each expression.
        const Eigen::VectorXd an = qp.A.transpose() * sol.nu;
        const Eigen::VectorXd cl = qp.C.transpose() * sol.lambda;
        const Eigen::VectorXd stat = g + an + cl;
        const double stat_ref = scale + g.lpNorm<Eigen::Infinity>() +
                                an.lpNorm<Eigen::Infinity>() +
                                cl.lpNorm<Eigen::Infinity>();
        require(stat.lpNorm<Eigen::Infinity>() <= 1e-6 * stat_ref,
                "solve_qp: stationarity check failed");
        require(sol.lambda.size() == 0 || sol.lambda.minCoeff() >= -1e-9 * mu_ref,
                "solve_qp: negative multiplier at optimum");
        for (int i = 0; i < m; ++i) {
          const double slack = qp.C.row(i).dot(z) - qp.d(i);
          require(slack <= 1e-6 * scale, "solve_qp: primal feasibility check failed");
          require(std::abs(sol.lambda(i) * slack) <= 1e-6 * scale * mu_ref,
                  "solve_qp: complementarity check failed");
        }
        const double gd = dual_value(qp, sol.nu, sol.lambda);
        require(std::abs(gd - sol.v) <= 1e-6 * (1.0 + std::abs(sol.v)),
                "solve_qp: strong-duality check failed");
        out.status = QpStatus::Optimal;
        out.sol = std::move(sol);
        return out;
      }
      W.erase(W.begin() + drop);
      continue;
    }

    // Step to the nearest blocking inequality. A blocking row has positive
    // directional derivative, so it is automatically independent of the
    // working set (which annihilates p).
    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < m; ++i) {
      if (std::find(W.begin(), W.end(), i) != W.end()) continue;
      const double dir = qp.C.row(i).dot(p);
      if (dir > 1e-11 * scale) {
        const double slack = std::max(qp.d(i) - qp.C.row(i).dot(z), 0.0);
        const double ratio = slack / dir;
        if (ratio < alpha) {
          alpha = ratio;
          blocking = i;
        }
      }
    }
    z += alpha * p;
    if (blocking >= 0 && alpha < 1.0) W.push_back(blocking);
  }
  fail("solve_qp: active-set iteration cap exhausted");
}

}  // namespace gbdmpc
