#pragma once

#include "gbdmpc/simulation.hpp"

// Aggregates over episode traces. Contact-phase statistics follow the
// planned-contact flag on each step: steps with an all-zero planned binary
// trajectory are dropped, then fractions are taken over the steps that
// produced a control.
namespace gbdmpc {

struct EpisodeMetrics {
  int steps = 0;
  int contact_steps = 0;   // planned contact
  int solved_steps = 0;    // planned contact and control found
  double frac_solved = 0.0;   // solved / contact
  double frac_1iter = 0.0;    // first control on iteration 1, among solved
  double frac_le5 = 0.0;      // first control within 5 iterations, among solved
  double median_iters_to_first = 0.0;    // over solved contact steps
  double median_solve_ns = 0.0;          // all steps
  double median_solve_ns_contact = 0.0;  // contact steps only
  double total_cost = 0.0;
  std::size_t max_feas = 0, max_opt = 0;  // peak buffer occupancy
};

double median(std::vector<double> v);

EpisodeMetrics aggregate(const EpisodeTrace& trace);

// Median solve time over steps at or after t_min, for comparing runs with
// the start-up transient excluded.
double median_solve_ns_after(const EpisodeTrace& trace, double t_min);

}  // namespace gbdmpc
