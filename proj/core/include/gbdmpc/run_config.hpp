#pragma once

#include <cstdint>
#include <string>

#include "gbdmpc/cuts.hpp"
#include "gbdmpc/gbd.hpp"

// Benchmark run configuration with JSON round-tripping. Loading is strict:
// unknown keys are an error, so a typo in a config file fails loudly
// instead of silently running with defaults.
namespace gbdmpc {

struct RunConfig {
  std::string system = "cartpole";  // cartpole | freeflyer
  int horizon = 10;
  int n_obstacles = 3;  // free-flyer only
  int episodes = 1;
  int steps = 100;
  std::uint64_t seed = 1;
  bool warm = true;
  bool exact_master = false;
  bool lookahead = false;
  double gap_tol = 0.1;
  int max_iters = 5;
  std::size_t k_feas = 45;
  std::size_t k_opt = 0;  // 0 means unlimited
  double alpha_deg = 15.0;
  double epsilon = 5000.0;
  double dist_scale = 1.0;
  std::string out_dir;  // empty: $GBDMPC_OUT_DIR if set, else "."
};

// Per-problem iteration and buffer sizes matched to the horizon, with the
// gap tolerance, dedup thresholds, and free-flyer lookahead applied.
RunConfig defaults_for(const std::string& system, int horizon, int n_obstacles = 3);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& c, const std::string& path);

// Where output files should go for this config.
std::string resolve_out_dir(const RunConfig& c);

GbdSettings to_settings(const RunConfig& c, const ModeList& modes);
CutBuffer to_buffer(const RunConfig& c);

}  // namespace gbdmpc
