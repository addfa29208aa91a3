#include "gbdmpc/cartpole.hpp"

#include <cmath>
#include <utility>

namespace gbdmpc {

namespace {

// Matrix exponential by scaling and squaring with a truncated series on the
// scaled matrix. Inputs here are small (8x8) with norms around A*dt, so the
// series converges in a handful of terms.
Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
  int s = 0;
  double nrm = m.lpNorm<Eigen::Infinity>();
  while (nrm > 0.5) {
    nrm *= 0.5;
    ++s;
  }
  const Eigen::MatrixXd a = m / std::ldexp(1.0, s);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = (term * a) / static_cast<double>(k);
    sum += term;
    if (term.lpNorm<Eigen::Infinity>() <= 1e-17 * sum.lpNorm<Eigen::Infinity>()) break;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

}  // namespace

void cartpole_linearization(const CartPoleParams& par, Eigen::MatrixXd& Ac,
                            Eigen::MatrixXd& Bc, Eigen::VectorXd& btau) {
  const double mc = par.mc, mp = par.mp, l = par.l, g = par.grav;
  Ac = Eigen::MatrixXd::Zero(4, 4);
  Ac(0, 2) = 1.0;
  Ac(1, 3) = 1.0;
  Ac(2, 1) = g * mp / mc;
  Ac(3, 1) = g * (mc + mp) / (mc * l);

  Bc = Eigen::MatrixXd::Zero(4, 3);
  Bc(2, 0) = 1.0 / mc;
  Bc(3, 0) = 1.0 / (mc * l);
  Bc(3, 1) = 1.0 / (mp * l);
  Bc(3, 2) = -1.0 / (mp * l);

  btau = Eigen::VectorXd::Zero(4);
  btau(2) = 1.0 / (mc * l);
  btau(3) = (mc + mp) / (mc * mp * l * l);
}

Eigen::VectorXd cartpole_ode(const CartPoleParams& par, const Eigen::VectorXd& x,
                             double f, double lam1, double lam2, double tau) {
  require(x.size() == 4, "cartpole_ode: state length mismatch");
  const double mc = par.mc, mp = par.mp, l = par.l, g = par.grav;
  const double phi = x(1), phidot = x(3);
  const double fc = -lam1 + lam2;  // horizontal wall force on the tip

  Eigen::Matrix2d mass;
  mass << mc + mp, -mp * l * std::cos(phi),
          -mp * l * std::cos(phi), mp * l * l;
  Eigen::Vector2d rhs;
  rhs << f + fc - mp * l * std::sin(phi) * phidot * phidot,
         mp * g * l * std::sin(phi) - fc * l * std::cos(phi) + tau;
  const Eigen::Vector2d acc = mass.llt().solve(rhs);

  Eigen::VectorXd dx(4);
  dx << x(2), x(3), acc(0), acc(1);
  return dx;
}

CartPoleSystem make_cartpole(const CartPoleParams& par) {
  CartPoleSystem sys;
  sys.par = par;

  Eigen::MatrixXd ac, bc;
  Eigen::VectorXd btauc;
  cartpole_linearization(par, ac, bc, btauc);

  // Hold both the controls and the disturbance torque over the step.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(8, 8);
  aug.topLeftCorner(4, 4) = ac;
  aug.block(0, 4, 4, 3) = bc;
  aug.block(0, 7, 4, 1) = btauc;
  const Eigen::MatrixXd ead = expm(aug * par.dt);
  sys.Ad = ead.topLeftCorner(4, 4);
  sys.Bd = ead.block(0, 4, 4, 3);
  sys.btau = ead.block(0, 7, 4, 1);

  MldProblem p;
  p.N = par.N;
  p.E = sys.Ad;
  p.F = sys.Bd;
  p.G = Eigen::MatrixXd::Zero(4, 2);

  // Stage rows, per wall i with tip sign a (right +1, left -1):
  //   -lam_i <= 0
  //   lam_i - cap * delta_i <= 0
  //   -a (l x2 - x1) - lam_i / k_i <= d_i
  //   a (l x2 - x1) + lam_i / k_i + gap * delta_i <= gap - d_i
  //   lam_i <= cap
  // then the force box and the four state boxes.
  p.H1 = Eigen::MatrixXd::Zero(20, 4);
  p.H2 = Eigen::MatrixXd::Zero(20, 3);
  p.H3 = Eigen::MatrixXd::Zero(20, 2);
  const double springs[2] = {par.k1, par.k2};
  for (int i = 0; i < 2; ++i) {
    const double a = i == 0 ? 1.0 : -1.0;
    const int r = 5 * i;
    const int lam = 1 + i;
    p.H2(r + 0, lam) = -1.0;
    p.H2(r + 1, lam) = 1.0;
    p.H3(r + 1, i) = -par.lam_cap;
    p.H1(r + 2, 0) = a;
    p.H1(r + 2, 1) = -a * par.l;
    p.H2(r + 2, lam) = -1.0 / springs[i];
    p.H1(r + 3, 0) = -a;
    p.H1(r + 3, 1) = a * par.l;
    p.H2(r + 3, lam) = 1.0 / springs[i];
    p.H3(r + 3, i) = par.big_gap;
    p.H2(r + 4, lam) = 1.0;
  }
  p.H2(10, 0) = 1.0;
  p.H2(11, 0) = -1.0;
  for (int j = 0; j < 4; ++j) {
    p.H1(12 + 2 * j, j) = 1.0;
    p.H1(13 + 2 * j, j) = -1.0;
  }

  p.Q = Eigen::Vector4d(1.0, 50.0, 1.0, 50.0).asDiagonal();
  p.R = 0.1 * Eigen::MatrixXd::Identity(3, 3);
  p.QN = solve_dare(p.E, p.F, p.Q, p.R);
  p.xg = Eigen::VectorXd::Zero(4);

  validate(p);
  sys.prob = std::move(p);
  return sys;
}

Eigen::VectorXd cartpole_theta(const CartPoleParams& par, double d1, double d2) {
  Eigen::VectorXd th(20);
  const double d[2] = {d1, d2};
  for (int i = 0; i < 2; ++i) {
    th(5 * i + 0) = 0.0;
    th(5 * i + 1) = 0.0;
    th(5 * i + 2) = d[i];
    th(5 * i + 3) = par.big_gap - d[i];
    th(5 * i + 4) = par.lam_cap;
  }
  th(10) = par.f_max;
  th(11) = par.f_max;
  const double box[4] = {par.x1_max, par.x2_max, par.x3_max, par.x4_max};
  for (int j = 0; j < 4; ++j) {
    th(12 + 2 * j) = box[j];
    th(13 + 2 * j) = box[j];
  }
  return th;
}

ParameterVector cartpole_parameters(const CartPoleSystem& sys, const Eigen::VectorXd& x,
                                    double d1, double d2) {
  ParameterVector pv;
  pv.x_in = x;
  pv.theta.assign(sys.prob.N, cartpole_theta(sys.par, d1, d2));
  return pv;
}

ModeList cartpole_modes() {
  ModeList modes(3, Eigen::VectorXd::Zero(2));
  modes[1](0) = 1.0;
  modes[2](1) = 1.0;
  return modes;
}

Eigen::Vector2d cartpole_contact_forces(const CartPoleParams& par,
                                        const Eigen::VectorXd& x, double d1, double d2) {
  const double tip = x(0) - par.l * x(1);
  Eigen::Vector2d lam;
  lam(0) = par.k1 * std::max(0.0, tip - d1);
  lam(1) = par.k2 * std::max(0.0, -d2 - tip);
  return lam;
}

double cartpole_wall_position(const CartPoleParams& par, double t, double walk) {
  constexpr double two_pi = 6.283185307179586;
  const double d = par.d0 + par.wall_amp * std::sin(two_pi * par.wall_freq * t) + walk;
  return std::min(par.d_max, std::max(par.d_min, d));
}

}  // namespace gbdmpc
