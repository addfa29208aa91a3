// Command-line driver: runs the benchmark experiments, checks random
// instances against an enumeration oracle, re-plots recorded traces, and
// dumps problem matrices for external consumption.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "gbdmpc/cartpole.hpp"
#include "gbdmpc/freeflyer.hpp"
#include "gbdmpc/metrics.hpp"
#include "gbdmpc/plotting.hpp"
#include "gbdmpc/random_problems.hpp"
#include "gbdmpc/run_config.hpp"
#include "gbdmpc/simulation.hpp"
#include "gbdmpc/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gbdmpc;

namespace {

json metrics_to_json(const EpisodeMetrics& m) {
  json j;
  j["steps"] = m.steps;
  j["contact_steps"] = m.contact_steps;
  j["solved_steps"] = m.solved_steps;
  j["fraction_solved"] = m.frac_solved;
  j["fraction_1iter"] = m.frac_1iter;
  j["fraction_le5"] = m.frac_le5;
  j["median_iters_to_first"] = m.median_iters_to_first;
  j["median_solve_ns"] = m.median_solve_ns;
  j["median_solve_ns_contact"] = m.median_solve_ns_contact;
  j["total_cost"] = m.total_cost;
  j["max_feas"] = m.max_feas;
  j["max_opt"] = m.max_opt;
  return j;
}

void emit_episode_plots(const EpisodeTrace& pooled, const EpisodeTrace& first,
                        const std::string& out_dir, const std::string& stem) {
  Series feas{"n_feas", {}, {}}, opt{"n_opt", {}, {}};
  for (const StepRecord& r : first.steps) {
    feas.x.push_back(r.t);
    feas.y.push_back(static_cast<double>(r.n_feas));
    opt.x.push_back(r.t);
    opt.y.push_back(static_cast<double>(r.n_opt));
  }
  write_svg_lines({feas, opt}, "stored cuts", "t [s]", "count",
                  out_dir + "/" + stem + "_cuts.svg");

  Series ms{"solve time", {}, {}};
  for (const StepRecord& r : first.steps) {
    ms.x.push_back(r.t);
    ms.y.push_back(static_cast<double>(r.solve_ns) * 1e-6);
  }
  write_svg_lines({ms}, "solve time", "t [s]", "ms", out_dir + "/" + stem + "_solvetime.svg");

  std::vector<double> iters;
  for (const StepRecord& r : pooled.steps) iters.push_back(static_cast<double>(r.iters));
  write_svg_hist(iters, 10, "iterations per solve", "iterations",
                 out_dir + "/" + stem + "_iters_hist.svg");
}

int run_episodes(const RunConfig& c, bool diagnostics) {
  const std::string out_dir = resolve_out_dir(c);
  fs::create_directories(out_dir);

  ModeList modes;
  CartPoleSystem cp;
  FreeFlyerSystem ff;
  if (c.system == "cartpole") {
    CartPoleParams par;
    par.N = c.horizon;
    cp = make_cartpole(par);
    modes = cartpole_modes();
  } else {
    FreeFlyerParams par;
    par.N = c.horizon;
    par.n_obstacles = c.n_obstacles;
    Rng layout_rng(c.seed);
    ff = make_freeflyer(par, layout_rng);
    modes = ff.modes;
  }
  GbdSettings gs = to_settings(c, modes);
  if (diagnostics) gs.check_restores = true;

  EpisodeTrace pooled, first;
  double max_restore = 0.0;
  for (int e = 0; e < c.episodes; ++e) {
    CutBuffer buf = to_buffer(c);
    SimOptions so;
    so.steps = c.steps;
    so.warm = c.warm;
    so.seed = c.seed + static_cast<std::uint64_t>(e);
    so.dist_scale = c.dist_scale;
    const EpisodeTrace trace = c.system == "cartpole" ? simulate_cartpole(cp, gs, buf, so)
                                                      : simulate_freeflyer(ff, gs, buf, so);
    write_trace_csv(trace, out_dir + "/" + c.system + "_ep" + std::to_string(e) +
                               "_trace.csv");
    if (e == 0) first = trace;
    for (const StepRecord& r : trace.steps)
      max_restore = std::max(max_restore, r.max_restore_error);
    pooled.steps.insert(pooled.steps.end(), trace.steps.begin(), trace.steps.end());
    pooled.total_cost += trace.total_cost;
  }

  const EpisodeMetrics m = aggregate(pooled);
  write_metrics_json(m, out_dir + "/" + c.system + "_metrics.json");
  emit_episode_plots(pooled, first, out_dir, c.system);

  if (diagnostics) {
    json d;
    d["check_restores"] = true;
    d["max_restore_error"] = max_restore;
    d["steps"] = pooled.steps.size();
    std::ofstream out(out_dir + "/diagnostics.json");
    out << d.dump(2) << "\n";
  }

  json summary;
  summary["experiment"] = c.system;
  summary["horizon"] = c.horizon;
  summary["episodes"] = c.episodes;
  summary["steps_per_episode"] = c.steps;
  summary["seed"] = c.seed;
  summary["warm"] = c.warm;
  summary["exact_master"] = c.exact_master;
  summary["out_dir"] = out_dir;
  summary["metrics"] = metrics_to_json(m);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// Enumerates every binary trajectory, solving the subproblem for each, and
// keeps the best value. Independent of the decomposition path.
bool miqp_enumerate(const MldProblem& p, const ParameterVector& pv, const ModeList& modes,
                    double& best) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(p.N), 0);
  bool feasible = false;
  best = std::numeric_limits<double>::infinity();
  while (true) {
    DeltaTrajectory del;
    del.delta.reserve(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) del.delta.push_back(modes[idx[k]]);
    const QpResult res = solve_qp(stack(p, pv, del));
    if (res.status == QpStatus::Optimal && res.sol.v < best) {
      best = res.sol.v;
      feasible = true;
    }
    std::size_t k = idx.size();
    while (k > 0 && ++idx[k - 1] == modes.size()) idx[--k] = 0;
    if (k == 0) break;
  }
  return feasible;
}

int run_random_miqp(std::uint64_t seed, int count, bool check_oracle,
                    const std::string& out_dir_flag) {
  RandomProblemSpec spec;
  GbdSettings gs;
  gs.exact_master = true;
  gs.gap_tol = 1e-6;
  gs.max_iters = 2000;
  gs.modes = all_modes(spec.ndelta);

  int optimal = 0, infeasible = 0, other = 0, mismatches = 0;
  double max_rel_dev = 0.0;
  for (int i = 0; i < count; ++i) {
    Rng rng(seed + static_cast<std::uint64_t>(i));
    const MldProblem p = random_problem(spec, rng);
    const double slack = i % 4 == 0 ? 0.2 : 2.0;
    const ParameterVector pv = random_parameters(p, rng, slack);
    const GbdResult r = run_cold(p, pv, gs).gbd;
    if (r.status == GbdStatus::Optimal)
      ++optimal;
    else if (r.status == GbdStatus::MasterInfeasible)
      ++infeasible;
    else
      ++other;

    if (check_oracle) {
      double best = 0.0;
      const bool feas = miqp_enumerate(p, pv, gs.modes, best);
      if (feas != (r.status == GbdStatus::Optimal)) {
        ++mismatches;
      } else if (feas) {
        max_rel_dev = std::max(max_rel_dev, std::abs(r.ub - best) / (1.0 + std::abs(best)));
      }
    }
  }

  json summary;
  summary["experiment"] = "random-miqp";
  summary["count"] = count;
  summary["seed"] = seed;
  summary["optimal"] = optimal;
  summary["infeasible"] = infeasible;
  summary["budget_exhausted"] = other;
  if (check_oracle) {
    summary["status_mismatches"] = mismatches;
    summary["max_rel_dev"] = max_rel_dev;
  }
  std::cout << summary.dump(2) << "\n";

  if (!out_dir_flag.empty()) {
    fs::create_directories(out_dir_flag);
    std::ofstream out(out_dir_flag + "/random_miqp_summary.json");
    out << summary.dump(2) << "\n";
  }
  if (check_oracle && (mismatches > 0 || max_rel_dev > 1e-5)) return 1;
  return 0;
}

int run_plot(const std::string& trace_path, const std::string& out_dir, int bins) {
  const auto cells = read_csv(trace_path);
  if (cells.empty()) {
    std::cerr << "empty trace file: " << trace_path << "\n";
    return 1;
  }
  const std::vector<std::string>& header = cells[0];
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("missing column: " + name);
  };
  const int ct = col("t"), cub = col("UB"), clb = col("LB");
  const int cfeas = col("n_feas"), copt = col("n_opt"), citers = col("iters");

  Series ub{"UB", {}, {}}, lb{"LB", {}, {}};
  Series feas{"n_feas", {}, {}}, opt{"n_opt", {}, {}};
  std::vector<double> iters;
  for (std::size_t r = 1; r < cells.size(); ++r) {
    const auto& row = cells[r];
    const double t = std::strtod(row[ct].c_str(), nullptr);
    const double u = std::strtod(row[cub].c_str(), nullptr);
    const double l = std::strtod(row[clb].c_str(), nullptr);
    if (std::isfinite(u)) {
      ub.x.push_back(t);
      ub.y.push_back(u);
    }
    if (std::isfinite(l)) {
      lb.x.push_back(t);
      lb.y.push_back(l);
    }
    feas.x.push_back(t);
    feas.y.push_back(std::strtod(row[cfeas].c_str(), nullptr));
    opt.x.push_back(t);
    opt.y.push_back(std::strtod(row[copt].c_str(), nullptr));
    iters.push_back(std::strtod(row[citers].c_str(), nullptr));
  }

  fs::create_directories(out_dir);
  std::string stem = fs::path(trace_path).stem().string();
  write_svg_lines({ub, lb}, "bound evolution", "t [s]", "value",
                  out_dir + "/" + stem + "_bounds.svg");
  write_svg_lines({feas, opt}, "stored cuts", "t [s]", "count",
                  out_dir + "/" + stem + "_cuts.svg");
  write_svg_hist(iters, bins, "iterations per solve", "iterations",
                 out_dir + "/" + stem + "_hist.svg");
  std::cout << out_dir << "/" << stem << "_{bounds,cuts,hist}.svg\n";
  return 0;
}

int run_dump(const std::string& experiment, int horizon, int obstacles, std::uint64_t seed,
             const std::string& out_path) {
  MldProblem p;
  if (experiment == "cartpole") {
    CartPoleParams par;
    par.N = horizon;
    p = make_cartpole(par).prob;
  } else if (experiment == "freeflyer") {
    FreeFlyerParams par;
    par.N = horizon;
    par.n_obstacles = obstacles;
    Rng rng(seed);
    p = make_freeflyer(par, rng).prob;
  } else {
    std::cerr << "dump-problem supports cartpole or freeflyer\n";
    return 1;
  }
  save_problem(p, out_path);
  std::cout << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid-MPC benchmark driver (Benders decomposition solver)"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment and write trace/metrics files");
  std::string experiment;
  run->add_option("experiment", experiment, "cartpole | freeflyer | random-miqp")
      ->check(CLI::IsMember({"cartpole", "freeflyer", "random-miqp"}));
  run->add_option("--experiment", experiment, "same as the positional argument")
      ->check(CLI::IsMember({"cartpole", "freeflyer", "random-miqp"}));
  std::string config_path;
  run->add_option("--config", config_path, "JSON config file (base settings)")
      ->check(CLI::ExistingFile);
  int horizon = 0;
  auto* opt_n = run->add_option("--n", horizon, "prediction horizon");
  std::string mode;
  run->add_option("--mode", mode, "gbd-warm | gbd-cold | enum-miqp")
      ->check(CLI::IsMember({"gbd-warm", "gbd-cold", "enum-miqp"}));
  std::string master;
  run->add_option("--master", master, "greedy | enum")
      ->check(CLI::IsMember({"greedy", "enum"}));
  std::uint64_t seed = 0;
  auto* opt_seed = run->add_option("--seed", seed, "base RNG seed");
  int episodes = 0;
  auto* opt_episodes = run->add_option("--episodes", episodes, "episode count");
  int steps = 0;
  auto* opt_steps = run->add_option("--steps", steps, "steps per episode");
  int obstacles = 3;
  run->add_option("--obstacles", obstacles, "free-flyer obstacle count");
  std::string out_dir;
  auto* opt_out = run->add_option("--out", out_dir, "output directory");
  double dist_scale = -1.0;
  auto* opt_dist = run->add_option("--dist-scale", dist_scale, "disturbance scale factor");
  bool diagnostics = false;
  run->add_flag("--diagnostics", diagnostics, "audit master bookkeeping, write diagnostics.json");
  int count = 100;
  run->add_option("--count", count, "random-miqp instance count");
  bool check_oracle = false;
  run->add_flag("--check-oracle", check_oracle, "compare random-miqp against enumeration");

  // plot
  auto* plot = app.add_subcommand("plot", "Re-plot a recorded trace CSV");
  std::string trace_path;
  plot->add_option("--trace", trace_path, "trace CSV file")
      ->required()
      ->check(CLI::ExistingFile);
  std::string plot_out = ".";
  plot->add_option("--out", plot_out, "output directory");
  int bins = 10;
  plot->add_option("--bins", bins, "histogram bin count");

  // dump-problem
  auto* dump = app.add_subcommand("dump-problem", "Write an experiment's model as JSON");
  std::string dump_exp = "cartpole";
  dump->add_option("experiment", dump_exp, "cartpole | freeflyer")
      ->check(CLI::IsMember({"cartpole", "freeflyer"}));
  dump->add_option("--experiment", dump_exp, "same as the positional argument")
      ->check(CLI::IsMember({"cartpole", "freeflyer"}));
  int dump_n = 0;
  auto* opt_dump_n = dump->add_option("--n", dump_n, "prediction horizon");
  int dump_obs = 3;
  dump->add_option("--obstacles", dump_obs, "free-flyer obstacle count");
  std::uint64_t dump_seed = 1;
  dump->add_option("--seed", dump_seed, "layout seed (free-flyer)");
  std::string dump_out;
  dump->add_option("--out", dump_out, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (experiment.empty() && config_path.empty()) {
        std::cerr << "run: give an experiment name or a --config file\n";
        return 1;
      }
      if (experiment == "random-miqp")
        return run_random_miqp(opt_seed->count() ? seed : 1, count, check_oracle,
                               opt_out->count() ? out_dir : std::string{});

      RunConfig c;
      if (!config_path.empty()) {
        c = load_config(config_path);
        if (!experiment.empty()) c.system = experiment;
        if (opt_n->count()) c.horizon = horizon;
      } else {
        const int n = opt_n->count() ? horizon : (experiment == "cartpole" ? 10 : 9);
        c = defaults_for(experiment, n, obstacles);
      }
      if (opt_seed->count()) c.seed = seed;
      if (opt_episodes->count()) c.episodes = episodes;
      if (opt_steps->count()) c.steps = steps;
      if (opt_out->count()) c.out_dir = out_dir;
      if (opt_dist->count()) c.dist_scale = dist_scale;
      if (mode == "gbd-warm") c.warm = true;
      if (mode == "gbd-cold") c.warm = false;
      if (mode == "enum-miqp") {
        c.warm = false;
        c.exact_master = true;
        c.gap_tol = std::min(c.gap_tol, 1e-6);
        c.max_iters = std::max(c.max_iters, 500);
      }
      if (master == "greedy") c.exact_master = false;
      if (master == "enum") c.exact_master = true;
      return run_episodes(c, diagnostics);
    }
    if (plot->parsed()) return run_plot(trace_path, plot_out, bins);
    if (dump->parsed()) {
      const int n = opt_dump_n->count() ? dump_n : (dump_exp == "cartpole" ? 10 : 9);
      std::string out = dump_out.empty() ? dump_exp + "_problem.json" : dump_out;
      return run_dump(dump_exp, n, dump_obs, dump_seed, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
