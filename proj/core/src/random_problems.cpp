#include "gbdmpc/random_problems.hpp"

#include <cmath>

namespace gbdmpc {

namespace {

Eigen::MatrixXd gaussian(Rng& rng, int rows, int cols, double std_dev) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, std_dev);
  return m;
}

Eigen::MatrixXd random_spd(Rng& rng, int n) {
  const Eigen::MatrixXd a = gaussian(rng, n, n, 1.0);
  return a.transpose() * a / n + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

MldProblem random_problem(const RandomProblemSpec& spec, Rng& rng) {
  require(spec.nx >= 1 && spec.nu >= 1 && spec.ndelta >= 1 && spec.nc >= 1 && spec.N >= 1,
          "random_problem: dimensions must be positive");
  MldProblem p;
  p.N = spec.N;
  p.E = gaussian(rng, spec.nx, spec.nx, 1.0);
  const double rho = p.E.eigenvalues().cwiseAbs().maxCoeff();
  if (rho > 0.9) p.E *= 0.9 / rho;
  p.F = gaussian(rng, spec.nx, spec.nu, 1.0);
  p.G = gaussian(rng, spec.nx, spec.ndelta, 0.3);
  p.H1 = gaussian(rng, spec.nc, spec.nx, 1.0);
  p.H2 = gaussian(rng, spec.nc, spec.nu, 1.0);
  p.H3 = gaussian(rng, spec.nc, spec.ndelta, 0.5);
  p.Q = random_spd(rng, spec.nx);
  p.R = random_spd(rng, spec.nu);
  p.QN = random_spd(rng, spec.nx);
  p.xg = Eigen::VectorXd::Zero(spec.nx);
  validate(p);
  return p;
}

ParameterVector random_parameters(const MldProblem& p, Rng& rng, double slack) {
  ParameterVector pv;
  pv.x_in.resize(p.nx());
  for (int i = 0; i < p.nx(); ++i) pv.x_in(i) = rng.normal();
  pv.theta.resize(p.N);
  for (int k = 0; k < p.N; ++k) {
    pv.theta[k].resize(p.nc());
    for (int i = 0; i < p.nc(); ++i)
      pv.theta[k](i) = slack * (0.2 + rng.uniform());
  }
  return pv;
}

ModeList all_modes(int ndelta) {
  require(ndelta >= 1 && ndelta <= 20, "all_modes: unreasonable binary count");
  ModeList modes;
  const int total = 1 << ndelta;
  for (int m = 0; m < total; ++m) {
    Eigen::VectorXd v(ndelta);
    for (int j = 0; j < ndelta; ++j) v(j) = (m >> (ndelta - 1 - j)) & 1 ? 1.0 : 0.0;
    modes.push_back(v);
  }
  return modes;
}

}  // namespace gbdmpc
