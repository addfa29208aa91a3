#include "gbdmpc/run_config.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

namespace gbdmpc {

namespace {

using nlohmann::json;

json to_json(const RunConfig& c) {
  return json{{"system", c.system},
              {"horizon", c.horizon},
              {"n_obstacles", c.n_obstacles},
              {"episodes", c.episodes},
              {"steps", c.steps},
              {"seed", c.seed},
              {"warm", c.warm},
              {"exact_master", c.exact_master},
              {"lookahead", c.lookahead},
              {"gap_tol", c.gap_tol},
              {"max_iters", c.max_iters},
              {"k_feas", c.k_feas},
              {"k_opt", c.k_opt},
              {"alpha_deg", c.alpha_deg},
              {"epsilon", c.epsilon},
              {"dist_scale", c.dist_scale},
              {"out_dir", c.out_dir}};
}

}  // namespace

RunConfig defaults_for(const std::string& system, int horizon, int n_obstacles) {
  RunConfig c;
  c.system = system;
  c.horizon = horizon;
  c.n_obstacles = n_obstacles;
  if (system == "cartpole") {
    c.max_iters = horizon >= 15 ? 10 : 5;
    c.k_feas = horizon >= 15 ? 150 : 45;
  } else if (system == "freeflyer") {
    c.lookahead = true;
    if (horizon >= 15) {
      c.max_iters = 200;
      c.k_feas = 700;
    } else if (horizon >= 12) {
      c.max_iters = 80;
      c.k_feas = 150;
    } else {
      c.max_iters = 15;
      c.k_feas = 50;
    }
  } else {
    fail("defaults_for: unknown system '" + system + "'");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "load_config: cannot open '" + path + "'");
  json j;
  in >> j;
  require(j.is_object(), "load_config: root must be an object");

  const json ref = to_json(RunConfig{});
  for (const auto& [key, value] : j.items())
    require(ref.contains(key), "load_config: unknown key '" + key + "'");

  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("system", c.system);
  get("horizon", c.horizon);
  get("n_obstacles", c.n_obstacles);
  get("episodes", c.episodes);
  get("steps", c.steps);
  get("seed", c.seed);
  get("warm", c.warm);
  get("exact_master", c.exact_master);
  get("lookahead", c.lookahead);
  get("gap_tol", c.gap_tol);
  get("max_iters", c.max_iters);
  get("k_feas", c.k_feas);
  get("k_opt", c.k_opt);
  get("alpha_deg", c.alpha_deg);
  get("epsilon", c.epsilon);
  get("dist_scale", c.dist_scale);
  get("out_dir", c.out_dir);

  require(c.system == "cartpole" || c.system == "freeflyer",
          "load_config: system must be cartpole or freeflyer");
  require(c.horizon >= 1 && c.steps >= 1 && c.episodes >= 1 && c.max_iters >= 1,
          "load_config: counts must be positive");
  require(c.gap_tol > 0.0 && c.epsilon > 0.0 && c.alpha_deg > 0.0,
          "load_config: tolerances must be positive");
  return c;
}

void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "save_config: cannot open '" + path + "'");
  out << to_json(c).dump(2) << "\n";
}

std::string resolve_out_dir(const RunConfig& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv("GBDMPC_OUT_DIR"); env && *env) return env;
  return ".";
}

GbdSettings to_settings(const RunConfig& c, const ModeList& modes) {
  GbdSettings s;
  s.gap_tol = c.gap_tol;
  s.max_iters = c.max_iters;
  s.exact_master = c.exact_master;
  s.lookahead = c.lookahead;
  s.modes = modes;
  return s;
}

CutBuffer to_buffer(const RunConfig& c) {
  CutBuffer b;
  b.k_feas = c.k_feas;
  b.k_opt = c.k_opt == 0 ? SIZE_MAX : c.k_opt;
  b.alpha = c.alpha_deg * 3.14159265358979323846 / 180.0;
  b.epsilon = c.epsilon;
  return b;
}

}  // namespace gbdmpc
