#include "gbdmpc/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gbdmpc {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(const EpisodeTrace& trace, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "write_trace_csv: cannot open '" + path + "'");

  const int nx = trace.steps.empty() ? 0 : static_cast<int>(trace.steps[0].x.size());
  const int nu = trace.steps.empty() ? 0 : static_cast<int>(trace.steps[0].u.size());
  const int nd = trace.steps.empty() ? 0 : static_cast<int>(trace.steps[0].delta.size());
  out << "t";
  for (int i = 0; i < nx; ++i) out << ",x" << i;
  for (int i = 0; i < nu; ++i) out << ",u" << i;
  for (int i = 0; i < nd; ++i) out << ",d" << i;
  out << ",iters,iters_to_first,UB,LB,gap,n_feas,n_opt,solve_ns,status\n";

  for (const auto& s : trace.steps) {
    out << num(s.t);
    for (int i = 0; i < nx; ++i) out << ',' << num(s.x(i));
    for (int i = 0; i < nu; ++i) out << ',' << num(s.u(i));
    for (int i = 0; i < nd; ++i) out << ',' << static_cast<int>(s.delta(i));
    out << ',' << s.iters << ',' << s.iters_to_first_control << ',' << num(s.ub)
        << ',' << num(s.lb) << ',' << num(s.gap) << ',' << s.n_feas << ','
        << s.n_opt << ',' << s.solve_ns << ',' << to_string(s.status) << "\n";
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_csv: cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

void write_metrics_json(const EpisodeMetrics& m, const std::string& path) {
  nlohmann::json j{{"steps", m.steps},
                   {"contact_steps", m.contact_steps},
                   {"solved_steps", m.solved_steps},
                   {"fraction_solved", m.frac_solved},
                   {"fraction_1iter", m.frac_1iter},
                   {"fraction_le5", m.frac_le5},
                   {"median_iters_to_first", m.median_iters_to_first},
                   {"median_solve_ns", m.median_solve_ns},
                   {"median_solve_ns_contact", m.median_solve_ns_contact},
                   {"total_cost", m.total_cost},
                   {"max_feas", m.max_feas},
                   {"max_opt", m.max_opt}};
  std::ofstream out(path);
  require(out.good(), "write_metrics_json: cannot open '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace gbdmpc
