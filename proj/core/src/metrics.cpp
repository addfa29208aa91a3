#include "gbdmpc/metrics.hpp"

#include <algorithm>

namespace gbdmpc {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

EpisodeMetrics aggregate(const EpisodeTrace& trace) {
  EpisodeMetrics m;
  m.steps = static_cast<int>(trace.steps.size());
  m.total_cost = trace.total_cost;

  std::vector<double> ns_all, ns_contact, first_iters;
  int one = 0, le5 = 0;
  for (const auto& s : trace.steps) {
    ns_all.push_back(static_cast<double>(s.solve_ns));
    m.max_feas = std::max(m.max_feas, s.n_feas);
    m.max_opt = std::max(m.max_opt, s.n_opt);
    if (!s.contact_planned) continue;
    ++m.contact_steps;
    ns_contact.push_back(static_cast<double>(s.solve_ns));
    if (!s.control_found) continue;
    ++m.solved_steps;
    first_iters.push_back(static_cast<double>(s.iters_to_first_control));
    if (s.iters_to_first_control == 1) ++one;
    if (s.iters_to_first_control <= 5) ++le5;
  }
  if (m.contact_steps > 0)
    m.frac_solved = static_cast<double>(m.solved_steps) / m.contact_steps;
  if (m.solved_steps > 0) {
    m.frac_1iter = static_cast<double>(one) / m.solved_steps;
    m.frac_le5 = static_cast<double>(le5) / m.solved_steps;
  }
  m.median_iters_to_first = median(std::move(first_iters));
  m.median_solve_ns = median(std::move(ns_all));
  m.median_solve_ns_contact = median(std::move(ns_contact));
  return m;
}

double median_solve_ns_after(const EpisodeTrace& trace, double t_min) {
  std::vector<double> ns;
  for (const auto& s : trace.steps)
    if (s.t >= t_min) ns.push_back(static_cast<double>(s.solve_ns));
  return median(std::move(ns));
}

}  // namespace gbdmpc
