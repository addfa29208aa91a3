#pragma once

#include <string>
#include <vector>

#include "gbdmpc/metrics.hpp"
#include "gbdmpc/simulation.hpp"

// CSV and JSON writers for episode traces and their aggregates, plus a
// small CSV reader for checking outputs. Numeric fields use %.17g so a
// written trace is exact to the bit on re-read.
namespace gbdmpc {

// Columns: t, x0..x{nx-1}, u0..u{nu-1}, d0..d{W-1} (planned binaries),
// iters, iters_to_first, UB, LB, gap, n_feas, n_opt, solve_ns, status.
void write_trace_csv(const EpisodeTrace& trace, const std::string& path);

// Cells of a CSV file, header row included.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

void write_metrics_json(const EpisodeMetrics& m, const std::string& path);

}  // namespace gbdmpc
