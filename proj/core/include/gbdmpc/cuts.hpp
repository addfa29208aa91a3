#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <vector>

#include "gbdmpc/dense_qp.hpp"
#include "gbdmpc/mld_model.hpp"

namespace gbdmpc {

/// Feasibility cut  Lambda' Theta + V' delta >= 0  (delta flattened).
/// Blocks of V beyond last_active_step are zero, so the cut is fully
/// determined once steps 0..last_active_step are chosen.
struct FeasibilityCut {
  Eigen::VectorXd Lambda;  // length nx + N*nc
  Eigen::VectorXd V;       // length N*ndelta
  int last_active_step = 0;
};

/// Optimality cut  v >= Cq - Lambda' Theta - V' delta, built from the
/// subproblem duals at (Theta_q, delta_q) via strong duality. Provenance
/// is kept for diagnostics (gap-bound checks need Theta_q and v_q).
struct OptimalityCut {
  Eigen::VectorXd Lambda;
  Eigen::VectorXd V;
  double Cq = 0.0;
  Eigen::VectorXd theta_q;  // flattened parameter at construction
  Eigen::VectorXd delta_q;  // flattened binaries at construction
  double v_q = 0.0;
};

/// Farkas dual object: the certificate plus its pre-expanded shift family
/// (entry 0 is the unshifted cut). One buffer slot per object.
struct FarkasDual {
  Eigen::VectorXd nu;      // length (N+1)*nx, normalized
  Eigen::VectorXd lambda;  // length N*nc, normalized
  std::vector<FeasibilityCut> family;
};

/// Optimal dual object: subproblem duals plus the cut they generate.
struct OptimalDual {
  Eigen::VectorXd nu;
  Eigen::VectorXd lambda;
  OptimalityCut cut;
};

/// Instantiated cut rows at a fixed Theta', ready for the master solver.
/// Feasibility rows read  V' delta >= -S;  optimality rows give the
/// master objective  max_q (S_q - V_q' delta).
struct InstFeasRow {
  Eigen::VectorXd V;
  double S = 0.0;
  int last_active_step = 0;
};
struct InstOptRow {
  Eigen::VectorXd V;
  double S = 0.0;
};
struct InstantiatedCuts {
  std::vector<InstFeasRow> feas;
  std::vector<InstOptRow> opt;
  int N = 0;
  int ndelta = 0;
};

/// Dual-object store shared across a control run. Farkas entries are
/// deduplicated by cone angle, optimal entries by Euclidean distance on
/// the raw duals; both sides evict oldest-first at their capacity.
struct CutBuffer {
  std::size_t k_feas = 45;
  std::size_t k_opt = SIZE_MAX;  // unlimited by default
  double alpha = 15.0 * 3.14159265358979323846 / 180.0;
  double epsilon = 5000.0;
  std::deque<FarkasDual> farkas;
  std::deque<OptimalDual> optimal;
  std::uint64_t model_tag = 0;
  std::uint64_t cost_tag = 0;
};

/// Angle in radians between two nonzero vectors; throws on zero input.
double angle(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Expands a verified certificate into its shift family. The family has
/// one cut per shift m = 0..M_p, where M_p is the last shift with any
/// nonzero dual block left (capped at N-1). Precondition: cert verifies
/// against the stacked data it came from.
std::vector<FeasibilityCut> build_feasibility_cuts(const FarkasCertificate& cert,
                                                   const MldProblem& p);

/// Builds the strong-duality cut from an optimal subproblem solution.
OptimalityCut build_optimality_cut(const QpSolution& sol, const MldProblem& p,
                                   const ParameterVector& theta_q,
                                   const DeltaTrajectory& delta_q);

/// Evaluates every stored cut at Theta': S_p = Lambda_p' Theta' for
/// feasibility rows, S_q = Cq - Lambda_q' Theta' for optimality rows.
InstantiatedCuts instantiate(const CutBuffer& buf, const MldProblem& p,
                             const ParameterVector& theta);

/// Inserts new dual objects, skipping near-duplicates (angle < alpha for
/// Farkas rays, distance < epsilon for optimal duals) and evicting
/// oldest-first past capacity. Candidates are processed in order, so a
/// batch deduplicates against itself as it lands.
void store(CutBuffer& buf, const std::vector<FarkasDual>& new_farkas,
           const std::vector<OptimalDual>& new_optimal);

/// Binds the buffer to a problem. A change in dynamics or constraint
/// matrices flushes everything; a change in weights or goal flushes only
/// the optimality side.
void bind(CutBuffer& buf, const MldProblem& p);

}  // namespace gbdmpc
