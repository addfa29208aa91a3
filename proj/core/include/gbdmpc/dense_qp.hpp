#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gbdmpc/mld_model.hpp"

namespace gbdmpc {

/// Primal-dual solution of min (z-zg)'Qbar(z-zg) s.t. Az = b, Cz <= d.
/// Duals follow the sign convention 2 Qbar (z-zg) + A'nu + C'lambda = 0
/// with lambda >= 0.
struct QpSolution {
  Eigen::VectorXd z;
  double v = 0.0;
  Eigen::VectorXd nu;
  Eigen::VectorXd lambda;
  std::vector<int> active;  // inequality rows held as equalities at the optimum
};

/// Farkas proof of infeasibility of {Az = b, Cz <= d}:
///   lambda >= 0,  A'nu + C'lambda = 0,  b'nu + d'lambda < 0.
/// Stored normalized to unit infinity norm over (nu, lambda).
struct FarkasCertificate {
  Eigen::VectorXd nu;
  Eigen::VectorXd lambda;
};

enum class QpStatus { Optimal, Infeasible };

struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  QpSolution sol;        // valid when status == Optimal
  FarkasCertificate cert;  // valid when status == Infeasible
};

struct Phase1Result {
  bool feasible = false;
  Eigen::VectorXd z0;      // valid when feasible
  FarkasCertificate cert;  // valid otherwise
};

/// Scale factor used by all verification tolerances:
/// 1 + max(|A|_inf, |C|_inf, |b|_inf, |d|_inf).
double qp_scale(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                const Eigen::MatrixXd& C, const Eigen::VectorXd& d);

/// Feasibility search. Exactly one branch is returned; both branches are
/// re-verified against their defining conditions before returning, and a
/// verification failure raises Error rather than reporting a wrong branch.
Phase1Result phase1(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    const Eigen::MatrixXd& C, const Eigen::VectorXd& d);

/// Solves the stacked subproblem by primal active set, starting from a
/// phase-1 point. Returns the optimum with exact KKT duals, or the Farkas
/// certificate when the constraints are inconsistent. `warm_active` seeds
/// the working set (rows violated at the start point are dropped).
QpResult solve_qp(const StackedQp& qp, const std::vector<int>* warm_active = nullptr);

/// Checks Farkas conditions after normalizing (nu, lambda) to unit
/// infinity norm: lambda >= -1e-9, |A'nu + C'lambda|_inf <= 1e-7 * scale,
/// b'nu + d'lambda <= -1e-8.
bool verify_farkas(const FarkasCertificate& cert, const Eigen::MatrixXd& A,
                   const Eigen::VectorXd& b, const Eigen::MatrixXd& C,
                   const Eigen::VectorXd& d);

/// Dual objective of the stacked subproblem at (nu, lambda):
///   g = -1/4 |A'nu + C'lambda|^2_{Qbar^-1} + zg'(A'nu + C'lambda)
///       - b'nu - d'lambda.
/// Weak duality: g <= v for every lambda >= 0.
double dual_value(const StackedQp& qp, const Eigen::VectorXd& nu,
                  const Eigen::VectorXd& lambda);

}  // namespace gbdmpc
