#include "gbdmpc/freeflyer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gbdmpc {

namespace {

// Row order per obstacle follows the two-bit region code.
constexpr int kRegionBits[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};

void region_row(const Obstacle& o, int code, Eigen::RowVector2d& a, double& rhs) {
  switch (code) {
    case 0: a << 1.0, 0.0; rhs = o.cx - o.half; break;   // left
    case 1: a << -1.0, 0.0; rhs = -(o.cx + o.half); break;  // right
    case 2: a << 0.0, 1.0; rhs = o.cy - o.half; break;   // below
    default: a << 0.0, -1.0; rhs = -(o.cy + o.half); break;  // above
  }
}

}  // namespace

bool point_in_obstacle(const Obstacle& o, double x, double y) {
  return std::abs(x - o.cx) < o.half && std::abs(y - o.cy) < o.half;
}

int obstacle_region(const Obstacle& o, double x, double y) {
  const double clear[4] = {o.cx - o.half - x, x - (o.cx + o.half),
                           o.cy - o.half - y, y - (o.cy + o.half)};
  int best = 0;
  for (int c = 1; c < 4; ++c)
    if (clear[c] > clear[best]) best = c;
  return clear[best] > 0.0 ? best : -1;
}

FreeFlyerSystem make_freeflyer(const FreeFlyerParams& par, Rng& rng) {
  require(par.n_obstacles >= 1, "make_freeflyer: need at least one obstacle");
  FreeFlyerSystem sys;
  sys.par = par;

  // Obstacles on a jittered grid, re-drawing the jitter while any pair of
  // squares sits closer than the minimum gap.
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(par.n_obstacles))));
  for (int tries = 0; tries < 50; ++tries) {
    sys.obstacles.clear();
    for (int i = 0; i < par.n_obstacles; ++i) {
      Obstacle o;
      const int c = i % cols, r = i / cols;
      o.cx = (c - 0.5 * (cols - 1)) * par.obs_spacing + rng.normal(0.0, par.obs_jitter_std);
      o.cy = par.obs_spacing * (1.0 + r) + rng.normal(0.0, par.obs_jitter_std);
      o.half = 0.5 * std::max(0.3, rng.normal(par.obs_width_mean, par.obs_width_std));
      sys.obstacles.push_back(o);
    }
    bool ok = true;
    for (std::size_t i = 0; i + 1 < sys.obstacles.size() && ok; ++i)
      for (std::size_t j = i + 1; j < sys.obstacles.size() && ok; ++j) {
        const auto &a = sys.obstacles[i], &b = sys.obstacles[j];
        const double gx = std::abs(a.cx - b.cx) - (a.half + b.half);
        const double gy = std::abs(a.cy - b.cy) - (a.half + b.half);
        if (std::max(gx, gy) < par.obs_min_gap) ok = false;
      }
    if (ok) break;
  }

  double xmin = 0.0, xmax = 0.0, ytop = 0.0;
  for (const auto& o : sys.obstacles) {
    xmin = std::min(xmin, o.cx - o.half);
    xmax = std::max(xmax, o.cx + o.half);
    ytop = std::max(ytop, o.cy + o.half);
  }
  sys.target << rng.uniform(xmin, xmax), ytop + par.target_margin;

  const int mo = par.n_obstacles;
  MldProblem p;
  p.N = par.N;
  p.E = Eigen::MatrixXd::Identity(4, 4);
  p.E(0, 2) = par.dt;
  p.E(1, 3) = par.dt;
  p.F = Eigen::MatrixXd::Zero(4, 2);
  p.F(0, 0) = p.F(1, 1) = 0.5 * par.dt * par.dt / par.mass;
  p.F(2, 0) = p.F(3, 1) = par.dt / par.mass;
  p.G = Eigen::MatrixXd::Zero(4, 2 * mo);

  const int nc = 4 * mo + 8;
  p.H1 = Eigen::MatrixXd::Zero(nc, 4);
  p.H2 = Eigen::MatrixXd::Zero(nc, 2);
  p.H3 = Eigen::MatrixXd::Zero(nc, 2 * mo);
  for (int i = 0; i < mo; ++i)
    for (int code = 0; code < 4; ++code) {
      const int row = 4 * i + code;
      Eigen::RowVector2d a;
      double rhs;
      region_row(sys.obstacles[i], code, a, rhs);
      p.H1.block<1, 2>(row, 0) = a;
      // Relax by big_m per bit that differs from the region's code.
      for (int bit = 0; bit < 2; ++bit)
        p.H3(row, 2 * i + bit) = -par.big_m * (1.0 - 2.0 * kRegionBits[code][bit]);
    }
  for (int j = 0; j < 2; ++j) {
    p.H1(4 * mo + 2 * j, 2 + j) = 1.0;
    p.H1(4 * mo + 2 * j + 1, 2 + j) = -1.0;
    p.H2(4 * mo + 4 + 2 * j, j) = 1.0;
    p.H2(4 * mo + 5 + 2 * j, j) = -1.0;
  }

  p.Q = Eigen::Vector4d(100.0, 100.0, 1.0, 1.0).asDiagonal();
  p.R = Eigen::MatrixXd::Identity(2, 2);
  p.QN = solve_dare(p.E, p.F, p.Q, p.R);
  p.xg = Eigen::VectorXd::Zero(4);
  p.xg.head<2>() = sys.target;
  validate(p);
  sys.prob = std::move(p);

  // Enumerate per-step modes: walk a workspace grid, and at every free
  // point record the max-clearance region code of each obstacle.
  std::set<std::vector<int>> seen;
  const double gx0 = xmin - 1.0, gx1 = xmax + 1.0;
  const double gy0 = -0.5, gy1 = ytop + par.target_margin + 0.5;
  for (double y = gy0; y <= gy1; y += par.grid_step)
    for (double x = gx0; x <= gx1; x += par.grid_step) {
      std::vector<int> code(2 * mo, 0);
      bool free = true;
      for (int i = 0; i < mo && free; ++i) {
        const int r = obstacle_region(sys.obstacles[i], x, y);
        if (r < 0) {
          free = false;
        } else {
          code[2 * i] = kRegionBits[r][0];
          code[2 * i + 1] = kRegionBits[r][1];
        }
      }
      if (free) seen.insert(code);
    }
  for (const auto& code : seen) {
    Eigen::VectorXd m(2 * mo);
    for (int j = 0; j < 2 * mo; ++j) m(j) = static_cast<double>(code[j]);
    sys.modes.push_back(m);
  }
  require(!sys.modes.empty(), "make_freeflyer: no free workspace modes found");
  return sys;
}

Eigen::VectorXd freeflyer_theta(const FreeFlyerSystem& sys) {
  const int mo = sys.par.n_obstacles;
  Eigen::VectorXd th(4 * mo + 8);
  for (int i = 0; i < mo; ++i)
    for (int code = 0; code < 4; ++code) {
      Eigen::RowVector2d a;
      double rhs;
      region_row(sys.obstacles[i], code, a, rhs);
      th(4 * i + code) =
          rhs + sys.par.big_m * (kRegionBits[code][0] + kRegionBits[code][1]);
    }
  for (int j = 0; j < 4; ++j) {
    th(4 * mo + j) = sys.par.v_max;
    th(4 * mo + 4 + j) = sys.par.f_max;
  }
  return th;
}

ParameterVector freeflyer_parameters(const FreeFlyerSystem& sys, const Eigen::VectorXd& x) {
  ParameterVector pv;
  pv.x_in = x;
  pv.theta.assign(sys.prob.N, freeflyer_theta(sys));
  return pv;
}

}  // namespace gbdmpc
