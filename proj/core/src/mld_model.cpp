#include "gbdmpc/mld_model.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>

#include <json.hpp>

namespace gbdmpc {

Eigen::VectorXd ParameterVector::flatten() const {
  Eigen::Index n = x_in.size();
  for (const auto& t : theta) n += t.size();
  Eigen::VectorXd out(n);
  out.head(x_in.size()) = x_in;
  Eigen::Index at = x_in.size();
  for (const auto& t : theta) {
    out.segment(at, t.size()) = t;
    at += t.size();
  }
  return out;
}

ParameterVector ParameterVector::unflatten(const Eigen::VectorXd& v, const MldProblem& p) {
  require(v.size() == p.ntheta(), "ParameterVector::unflatten: length mismatch");
  ParameterVector th;
  th.x_in = v.head(p.nx());
  th.theta.resize(p.N);
  for (int k = 0; k < p.N; ++k) th.theta[k] = v.segment(p.nx() + k * p.nc(), p.nc());
  return th;
}

Eigen::VectorXd DeltaTrajectory::flatten() const {
  Eigen::Index n = 0;
  for (const auto& d : delta) n += d.size();
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  for (const auto& d : delta) {
    out.segment(at, d.size()) = d;
    at += d.size();
  }
  return out;
}

DeltaTrajectory DeltaTrajectory::unflatten(const Eigen::VectorXd& v, int N, int ndelta) {
  require(v.size() == static_cast<Eigen::Index>(N) * ndelta,
          "DeltaTrajectory::unflatten: length mismatch");
  DeltaTrajectory d;
  d.delta.resize(N);
  for (int k = 0; k < N; ++k) d.delta[k] = v.segment(k * ndelta, ndelta);
  return d;
}

bool DeltaTrajectory::any_nonzero() const {
  for (const auto& d : delta)
    if (d.lpNorm<Eigen::Infinity>() > 0.5) return true;
  return false;
}

namespace {

void check_spd(const Eigen::MatrixXd& M, const std::string& name) {
  require(M.rows() == M.cols(), name + " must be square");
  const double scale = 1.0 + M.lpNorm<Eigen::Infinity>();
  require((M - M.transpose()).lpNorm<Eigen::Infinity>() <= 1e-9 * scale,
          name + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  require(es.info() == Eigen::Success, name + ": eigensolver failed");
  require(es.eigenvalues().minCoeff() > 1e-10,
          name + " must be positive definite (min eigenvalue > 1e-10)");
}

}  // namespace

void validate(const MldProblem& p) {
  require(p.N >= 1, "MldProblem: N must be >= 1");
  const int nx = p.nx(), nu = p.nu(), nd = p.ndelta(), nc = p.nc();
  require(nx >= 1, "MldProblem: nx must be >= 1");
  require(nu >= 1, "MldProblem: nu must be >= 1");
  require(nd >= 1, "MldProblem: ndelta must be >= 1");
  require(nc >= 1, "MldProblem: nc must be >= 1");
  require(p.E.rows() == nx && p.E.cols() == nx, "MldProblem: E must be nx x nx");
  require(p.F.rows() == nx, "MldProblem: F must have nx rows");
  require(p.G.rows() == nx, "MldProblem: G must have nx rows");
  require(p.H1.rows() == nc && p.H1.cols() == nx, "MldProblem: H1 must be nc x nx");
  require(p.H2.rows() == nc && p.H2.cols() == nu, "MldProblem: H2 must be nc x nu");
  require(p.H3.rows() == nc && p.H3.cols() == nd, "MldProblem: H3 must be nc x ndelta");
  require(p.xg.size() == nx, "MldProblem: xg must have length nx");
  check_spd(p.Q, "Q");
  check_spd(p.R, "R");
  check_spd(p.QN, "QN");
}

StackedQp stack(const MldProblem& p, const ParameterVector& th, const DeltaTrajectory& del) {
  const int nx = p.nx(), nu = p.nu(), nd = p.ndelta(), nc = p.nc(), N = p.N;
  require(th.x_in.size() == nx, "stack: x_in length mismatch");
  require(static_cast<int>(th.theta.size()) == N, "stack: theta must have N blocks");
  require(static_cast<int>(del.delta.size()) == N, "stack: delta must have N blocks");
  for (int k = 0; k < N; ++k) {
    require(th.theta[k].size() == nc, "stack: theta block length mismatch");
    require(del.delta[k].size() == nd, "stack: delta block length mismatch");
    for (Eigen::Index j = 0; j < nd; ++j) {
      const double v = del.delta[k](j);
      require(v == 0.0 || v == 1.0, "stack: delta entries must be exactly 0 or 1");
    }
  }

  const int nz = p.nz();
  const int neq = (N + 1) * nx;
  const int nin = N * nc;
  const int ux0 = (N + 1) * nx;  // column offset of u[0]

  StackedQp s;
  s.Qbar = Eigen::MatrixXd::Zero(nz, nz);
  for (int k = 0; k < N; ++k) s.Qbar.block(k * nx, k * nx, nx, nx) = p.Q;
  s.Qbar.block(N * nx, N * nx, nx, nx) = p.QN;
  for (int k = 0; k < N; ++k) s.Qbar.block(ux0 + k * nu, ux0 + k * nu, nu, nu) = p.R;

  s.zg = Eigen::VectorXd::Zero(nz);
  for (int k = 0; k <= N; ++k) s.zg.segment(k * nx, nx) = p.xg;

  s.A = Eigen::MatrixXd::Zero(neq, nz);
  s.b = Eigen::VectorXd::Zero(neq);
  // Row block 0 pins the initial state; block k+1 is the step-k dynamics row
  // x[k+1] - E x[k] - F u[k] = G d[k].
  s.A.block(0, 0, nx, nx).setIdentity();
  s.b.head(nx) = th.x_in;
  for (int k = 0; k < N; ++k) {
    s.A.block((k + 1) * nx, (k + 1) * nx, nx, nx).setIdentity();
    s.A.block((k + 1) * nx, k * nx, nx, nx) = -p.E;
    s.A.block((k + 1) * nx, ux0 + k * nu, nx, nu) = -p.F;
    s.b.segment((k + 1) * nx, nx) = p.G * del.delta[k];
  }

  s.C = Eigen::MatrixXd::Zero(nin, nz);
  s.d = Eigen::VectorXd::Zero(nin);
  for (int k = 0; k < N; ++k) {
    s.C.block(k * nc, k * nx, nc, nx) = p.H1;
    s.C.block(k * nc, ux0 + k * nu, nc, nu) = p.H2;
    s.d.segment(k * nc, nc) = th.theta[k] - p.H3 * del.delta[k];
  }
  return s;
}

Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& E, const Eigen::MatrixXd& F,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const int nx = static_cast<int>(E.rows());
  require(E.cols() == nx, "solve_dare: E must be square");
  require(F.rows() == nx, "solve_dare: F row count mismatch");
  require(Q.rows() == nx && Q.cols() == nx, "solve_dare: Q dimension mismatch");
  require(R.rows() == F.cols() && R.cols() == F.cols(), "solve_dare: R dimension mismatch");

  auto residual = [&](const Eigen::MatrixXd& P) {
    Eigen::MatrixXd S = R + F.transpose() * P * F;
    Eigen::MatrixXd K = S.ldlt().solve(F.transpose() * P * E);
    Eigen::MatrixXd next = Q + E.transpose() * P * E - E.transpose() * P * F * K;
    return std::make_pair(next, (next - P).norm());
  };

  Eigen::MatrixXd P = Q;
  const int cap = 200000;
  for (int it = 0; it < cap; ++it) {
    auto [next, res] = residual(P);
    P = 0.5 * (next + next.transpose().eval());
    if (res <= 1e-9) return P;
  }
  fail("solve_dare: no convergence to 1e-9 residual within iteration cap");
}

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& M) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) arr.push_back(M(i, j));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& arr, int rows, int cols, const std::string& name) {
  require(arr.is_array() && static_cast<int>(arr.size()) == rows * cols,
          "load_problem: field " + name + " has wrong length");
  Eigen::MatrixXd M(rows, cols);
  int at = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = arr[at++].get<double>();
  return M;
}

}  // namespace

MldProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "load_problem: cannot open " + path);
  json j = json::parse(in);
  require(j.contains("dims"), "load_problem: missing dims");
  const auto& dims = j["dims"];
  const int nx = dims.at("nx").get<int>();
  const int nu = dims.at("nu").get<int>();
  const int nd = dims.at("ndelta").get<int>();
  const int nc = dims.at("nc").get<int>();
  MldProblem p;
  p.N = dims.at("N").get<int>();
  p.E = matrix_from_json(j.at("E"), nx, nx, "E");
  p.F = matrix_from_json(j.at("F"), nx, nu, "F");
  p.G = matrix_from_json(j.at("G"), nx, nd, "G");
  p.H1 = matrix_from_json(j.at("H1"), nc, nx, "H1");
  p.H2 = matrix_from_json(j.at("H2"), nc, nu, "H2");
  p.H3 = matrix_from_json(j.at("H3"), nc, nd, "H3");
  p.Q = matrix_from_json(j.at("Q"), nx, nx, "Q");
  p.R = matrix_from_json(j.at("R"), nu, nu, "R");
  p.QN = matrix_from_json(j.at("QN"), nx, nx, "QN");
  p.xg = matrix_from_json(j.at("xg"), nx, 1, "xg");
  validate(p);
  return p;
}

void save_problem(const MldProblem& p, const std::string& path) {
  json j;
  j["dims"] = {{"nx", p.nx()}, {"nu", p.nu()}, {"ndelta", p.ndelta()}, {"nc", p.nc()}, {"N", p.N}};
  j["E"] = matrix_to_json(p.E);
  j["F"] = matrix_to_json(p.F);
  j["G"] = matrix_to_json(p.G);
  j["H1"] = matrix_to_json(p.H1);
  j["H2"] = matrix_to_json(p.H2);
  j["H3"] = matrix_to_json(p.H3);
  j["Q"] = matrix_to_json(p.Q);
  j["R"] = matrix_to_json(p.R);
  j["QN"] = matrix_to_json(p.QN);
  j["xg"] = matrix_to_json(p.xg);
  std::ofstream out(path);
  require(out.good(), "save_problem: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace gbdmpc
