#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gbdmpc/cuts.hpp"

namespace gbdmpc {

/// Ordered list of admissible binary vectors for one step; the same list
/// is reused at every step of the horizon.
using ModeList = std::vector<Eigen::VectorXd>;

/// Instantiated feasibility cuts bucketed by their last active step, so
/// step k of the greedy search consults exactly bucket k.
struct ParsedCuts {
  int N = 0;
  int ndelta = 0;
  std::vector<InstFeasRow> feas;
  std::vector<std::vector<int>> buckets;  // per step, indices into feas
  std::vector<InstOptRow> opt;
};

enum class MasterStatus { Found, Infeasible, BudgetExhausted };

struct MasterSolution {
  MasterStatus status = MasterStatus::Infeasible;
  DeltaTrajectory delta;
  double m_star = 0.0;
  long backtracks = 0;
  bool exact = false;  // true when produced (or certified) by enumeration
  double max_restore_error = 0.0;  // populated when restore checking is on
};

struct GreedyOptions {
  bool lookahead = false;
  std::uint64_t max_backtracks = UINT64_MAX;
  std::uint64_t enum_fallback_cap = 1ull << 20;  // grid limit for the budget fallback
  bool check_restores = false;  // recompute S terms after each backtrack
};

/// Buckets instantiated cuts by last nonzero step block.
ParsedCuts parse(const InstantiatedCuts& cuts);

/// One-step look-ahead rows for step k: each bucket-(k+1) cut contributes
/// v' w >= rhs with the next step relaxed to its best admissible mode.
struct LookaheadRow {
  Eigen::VectorXd v;
  double rhs = 0.0;
};
std::vector<LookaheadRow> lookahead_rows(const ParsedCuts& cuts, int k,
                                         const ModeList& modes);

/// Per-step greedy master (ascending surrogate cost, lexicographic
/// tie-break) with exhaustive backtracking. Falls back to enumeration if
/// the backtrack budget runs out and the grid fits enum_fallback_cap.
MasterSolution solve_greedy(const ParsedCuts& cuts, const ModeList& modes,
                            const GreedyOptions& opts = {});

/// Exhaustive reference: scans all |modes|^N trajectories (error above
/// cap) and returns the best feasible one, ties broken lexicographically.
MasterSolution solve_enumeration(const ParsedCuts& cuts, const ModeList& modes,
                                 std::uint64_t cap = 1ull << 20);

}  // namespace gbdmpc
