#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "gbdmpc/dense_qp.hpp"
#include "gbdmpc/mld_model.hpp"
#include "support.hpp"

using namespace gbdmpc;
using gbdmpc::testing::DualAudit;
using gbdmpc::testing::delta_of;
using gbdmpc::testing::tiny_parameters;
using gbdmpc::testing::tiny_problem;

namespace {

// Reference solve by enumerating every inequality subset as a candidate
// active set. For each subset the equality KKT system is solved directly;
// candidates must have nonnegative subset multipliers and satisfy all
// inequalities. The best candidate is the global optimum of the QP.
struct SubsetOracle {
  bool feasible = false;
  double v = 0.0;
};

SubsetOracle subset_oracle(const StackedQp& qp) {
  const Eigen::Index nz = qp.Qbar.rows();
  const Eigen::Index l = qp.A.rows();
  const Eigen::Index m = qp.C.rows();
  REQUIRE(m <= 20);
  SubsetOracle out;
  out.v = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < m; ++i)
      if (mask & (1ull << i)) rows.push_back(i);
    const Eigen::Index ns = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nz + l + ns, nz + l + ns);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nz + l + ns);
    K.topLeftCorner(nz, nz) = 2.0 * qp.Qbar;
    K.block(0, nz, nz, l) = qp.A.transpose();
    K.block(nz, 0, l, nz) = qp.A;
    for (Eigen::Index i = 0; i < ns; ++i) {
      K.block(0, nz + l + i, nz, 1) = qp.C.row(rows[i]).transpose();
      K.block(nz + l + i, 0, 1, nz) = qp.C.row(rows[i]);
      rhs(nz + l + i) = qp.d(rows[i]);
    }
    rhs.head(nz) = 2.0 * qp.Qbar * qp.zg;
    rhs.segment(nz, l) = qp.b;

    const Eigen::VectorXd sol = Eigen::FullPivLU<Eigen::MatrixXd>(K).solve(rhs);
    if ((K * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
      continue;  // singular working set, another subset covers this face
    const Eigen::VectorXd z = sol.head(nz);
    const Eigen::VectorXd lam_s = sol.tail(ns);
    if (ns > 0 && lam_s.minCoeff() < -1e-7) continue;
    if (m > 0 && (qp.C * z - qp.d).maxCoeff() > 1e-7) continue;
    const double v = (z - qp.zg).dot(qp.Qbar * (z - qp.zg));
    if (v < out.v) {
      out.feasible = true;
      out.v = v;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("phase one finds a point or a contradiction proof on the worked example") {
  const MldProblem p = tiny_problem();
  const ParameterVector pv = tiny_parameters();

  SUBCASE("binary on admits a feasible point") {
    const StackedQp s = stack(p, pv, delta_of(p, {1.0}));
    const Phase1Result r = phase1(s.A, s.b, s.C, s.d);
    REQUIRE(r.feasible);
    CHECK((s.A * r.z0 - s.b).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK((s.C * r.z0 - s.d).maxCoeff() <= 1e-8);
  }

  SUBCASE("binary off is infeasible with the expected certificate") {
    const StackedQp s = stack(p, pv, delta_of(p, {0.0}));
    const Phase1Result r = phase1(s.A, s.b, s.C, s.d);
    REQUIRE(!r.feasible);
    CHECK(verify_farkas(r.cert, s.A, s.b, s.C, s.d));
    // Combining rows u <= 1 and -u <= -2 with unit weights is the only
    // normalized contradiction: lambda = (1, 0, 1), nu = 0.
    CHECK(r.cert.nu.lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(r.cert.lambda(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.cert.lambda(1) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.cert.lambda(2) == doctest::Approx(1.0).epsilon(1e-9));
    const double pairing = s.b.dot(r.cert.nu) + s.d.dot(r.cert.lambda);
    CHECK(pairing == doctest::Approx(-1.0).epsilon(1e-9));
  }
}

TEST_CASE("phase one handles problems without equality rows") {
  Eigen::MatrixXd A(0, 1);
  Eigen::VectorXd b(0);
  Eigen::MatrixXd C(2, 1);
  C << 1.0, -1.0;
  Eigen::VectorXd d(2);
  d << -1.0, -1.0;  // z <= -1 and z >= 1 cannot both hold
  const Phase1Result r = phase1(A, b, C, d);
  REQUIRE(!r.feasible);
  CHECK(verify_farkas(r.cert, A, b, C, d));
  CHECK(r.cert.lambda(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.cert.lambda(1) == doctest::Approx(1.0).epsilon(1e-9));

  d << 1.0, 1.0;  // now -1 <= z <= 1
  const Phase1Result ok = phase1(A, b, C, d);
  REQUIRE(ok.feasible);
  CHECK((C * ok.z0 - d).maxCoeff() <= 1e-8);
}

TEST_CASE("the worked example solves to the hand-derived optimum") {
  const MldProblem p = tiny_problem();
  const ParameterVector pv = tiny_parameters();
  const StackedQp s = stack(p, pv, delta_of(p, {1.0}));
  const QpResult r = solve_qp(s);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK(r.sol.v == doctest::Approx(0.5).epsilon(1e-9));
  Eigen::VectorXd z(3);
  z << 0.0, 0.5, -0.5;
  CHECK((r.sol.z - z).lpNorm<Eigen::Infinity>() <= 1e-9);
  Eigen::VectorXd nu(2);
  nu << -1.0, -1.0;
  CHECK((r.sol.nu - nu).lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK(r.sol.lambda.lpNorm<Eigen::Infinity>() <= 1e-9);

  DualAudit audit;
  audit.check(s, r);
  CHECK(audit.violations == 0);
}

TEST_CASE("removing every inequality leaves the unconstrained minimum") {
  const MldProblem p = tiny_problem();
  const ParameterVector pv = tiny_parameters();
  StackedQp s = stack(p, pv, delta_of(p, {0.0}));
  s.C.resize(0, s.Qbar.rows());
  s.d.resize(0);
  const QpResult r = solve_qp(s);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK(r.sol.v == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.sol.z.lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK(r.sol.active.empty());
}

TEST_CASE("certificate verification is data-dependent and rejects degenerate input") {
  const MldProblem p = tiny_problem();
  const ParameterVector pv = tiny_parameters();
  const StackedQp off = stack(p, pv, delta_of(p, {0.0}));
  const StackedQp on = stack(p, pv, delta_of(p, {1.0}));
  const QpResult r = solve_qp(off);
  REQUIRE(r.status == QpStatus::Infeasible);

  CHECK(verify_farkas(r.cert, off.A, off.b, off.C, off.d));
  // The same direction pairs to +2 against the feasible right-hand sides.
  CHECK(!verify_farkas(r.cert, on.A, on.b, on.C, on.d));

  FarkasCertificate zero;
  zero.nu = Eigen::VectorXd::Zero(off.A.rows());
  zero.lambda = Eigen::VectorXd::Zero(off.C.rows());
  CHECK(!verify_farkas(zero, off.A, off.b, off.C, off.d));

  SUBCASE("verification is invariant to positive rescaling") {
    for (double a : {1e-6, 1e6}) {
      FarkasCertificate scaled;
      scaled.nu = a * r.cert.nu;
      scaled.lambda = a * r.cert.lambda;
      CHECK(verify_farkas(scaled, off.A, off.b, off.C, off.d));

      FarkasCertificate bad;
      bad.nu = a * r.cert.nu;
      bad.lambda = -a * r.cert.lambda;
      CHECK(!verify_farkas(bad, off.A, off.b, off.C, off.d));
    }
  }
}

TEST_CASE("dual objective matches hand values and respects weak duality") {
  const MldProblem p = tiny_problem();
  const ParameterVector pv = tiny_parameters();
  const StackedQp on = stack(p, pv, delta_of(p, {1.0}));
  const StackedQp off = stack(p, pv, delta_of(p, {0.0}));

  const QpResult opt = solve_qp(on);
  REQUIRE(opt.status == QpStatus::Optimal);
  CHECK(dual_value(on, opt.sol.nu, opt.sol.lambda) == doctest::Approx(0.5).epsilon(1e-9));

  const Eigen::VectorXd nu0 = Eigen::VectorXd::Zero(on.A.rows());
  const Eigen::VectorXd lam0 = Eigen::VectorXd::Zero(on.C.rows());
  CHECK(dual_value(on, nu0, lam0) == doctest::Approx(0.0).epsilon(1e-12));

  // Stepping along an infeasibility direction keeps dual feasibility, and
  // the dual objective moves linearly by -t (b'nu + d'lam) of the step.
  const QpResult inf = solve_qp(off);
  REQUIRE(inf.status == QpStatus::Infeasible);
  const double pairing = on.b.dot(inf.cert.nu) + on.d.dot(inf.cert.lambda);
  CHECK(pairing == doctest::Approx(2.0).epsilon(1e-9));
  for (double t : {0.5, 1.0, 5.0, 25.0}) {
    const double g = dual_value(on, opt.sol.nu + t * inf.cert.nu,
                                opt.sol.lambda + t * inf.cert.lambda);
    CHECK(g == doctest::Approx(0.5 - t * pairing).epsilon(1e-9));
    CHECK(g <= opt.sol.v + 1e-9);
  }
}

TEST_CASE("random subproblems agree with subset enumeration and audit clean") {
  Rng rng(2024);
  DualAudit audit;
  int feasible_seen = 0;
  int infeasible_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    RandomProblemSpec spec;
    spec.nx = 1 + static_cast<int>(rng.below(2));
    spec.nu = 1;
    spec.ndelta = 1;
    spec.nc = 2 + static_cast<int>(rng.below(2));
    spec.N = 1 + static_cast<int>(rng.below(2));
    const MldProblem p = random_problem(spec, rng);
    const double slack = (trial % 3 == 0) ? 2.0 : (trial % 3 == 1) ? 0.3 : -0.4;
    const ParameterVector pv = random_parameters(p, rng, slack);
    DeltaTrajectory dt;
    dt.delta.resize(p.N);
    for (int k = 0; k < p.N; ++k)
      dt.delta[k] = Eigen::VectorXd::Constant(1, static_cast<double>(rng.below(2)));
    const StackedQp qp = stack(p, pv, dt);

    const QpResult r = solve_qp(qp);
    audit.check(qp, r);
    const SubsetOracle oracle = subset_oracle(qp);
    if (oracle.feasible) {
      ++feasible_seen;
      REQUIRE(r.status == QpStatus::Optimal);
      CHECK(std::abs(r.sol.v - oracle.v) <= 1e-6 * (1.0 + std::abs(oracle.v)));

      // Warm-starting from the converged working set must not change the
      // optimum.
      const QpResult rw = solve_qp(qp, &r.sol.active);
      REQUIRE(rw.status == QpStatus::Optimal);
      CHECK(std::abs(rw.sol.v - r.sol.v) <= 1e-9 * (1.0 + std::abs(r.sol.v)));
    } else {
      ++infeasible_seen;
      REQUIRE(r.status == QpStatus::Infeasible);
      CHECK(verify_farkas(r.cert, qp.A, qp.b, qp.C, qp.d));
    }
  }
  CHECK(audit.violations == 0);
  INFO("first failure: ", audit.first_failure);
  CHECK(feasible_seen >= 40);
  CHECK(infeasible_seen >= 40);
}
