#include "gbdmpc/cuts.hpp"

#include <algorithm>
#include <cmath>

namespace gbdmpc {

double angle(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  require(u.size() == v.size(), "angle: length mismatch");
  const double nu = u.norm(), nv = v.norm();
  require(nu > 0.0 && nv > 0.0, "angle: zero vector");
  const double c = u.dot(v) / (nu * nv);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

namespace {

constexpr double kZeroBlockTol = 1e-11;

// Last step index whose nu block (indices 0..N) or lambda block
// (0..N-1) is nonzero; -1 when the whole vector is zero.
int last_nonzero_block(const Eigen::VectorXd& v, int nblocks, int blocklen) {
  for (int k = nblocks - 1; k >= 0; --k)
    if (v.segment(static_cast<Eigen::Index>(k) * blocklen, blocklen)
            .lpNorm<Eigen::Infinity>() > kZeroBlockTol)
      return k;
  return -1;
}

FeasibilityCut make_cut(const Eigen::VectorXd& nu, const Eigen::VectorXd& lam,
                        const MldProblem& p) {
  const int nx = p.nx(), nc = p.nc(), nd = p.ndelta(), N = p.N;
  FeasibilityCut cut;
  cut.Lambda.resize(nx + static_cast<Eigen::Index>(N) * nc);
  cut.Lambda.head(nx) = nu.head(nx);
  cut.Lambda.tail(static_cast<Eigen::Index>(N) * nc) = lam;
  cut.V.resize(static_cast<Eigen::Index>(N) * nd);
  for (int k = 0; k < N; ++k)
    cut.V.segment(static_cast<Eigen::Index>(k) * nd, nd) =
        p.G.transpose() * nu.segment(static_cast<Eigen::Index>(k + 1) * nx, nx) -
        p.H3.transpose() * lam.segment(static_cast<Eigen::Index>(k) * nc, nc);
  const int knu = last_nonzero_block(nu, N + 1, nx);
  const int klam = last_nonzero_block(lam, N, nc);
  cut.last_active_step = std::clamp(std::max(knu - 1, klam), 0, N - 1);
  return cut;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t hash_matrix(std::uint64_t h, const Eigen::MatrixXd& M) {
  const Eigen::Index r = M.rows(), c = M.cols();
  h = fnv1a(h, &r, sizeof(r));
  h = fnv1a(h, &c, sizeof(c));
  return fnv1a(h, M.data(), sizeof(double) * M.size());
}

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

std::vector<FeasibilityCut> build_feasibility_cuts(const FarkasCertificate& cert,
                                                   const MldProblem& p) {
  const int nx = p.nx(), nc = p.nc(), N = p.N;
  require(cert.nu.size() == static_cast<Eigen::Index>(N + 1) * nx,
          "build_feasibility_cuts: nu length mismatch");
  require(cert.lambda.size() == static_cast<Eigen::Index>(N) * nc,
          "build_feasibility_cuts: lambda length mismatch");

  const int knu = last_nonzero_block(cert.nu, N + 1, nx);
  const int klam = last_nonzero_block(cert.lambda, N, nc);
  require(std::max(knu, klam) >= 0, "build_feasibility_cuts: certificate is all zero");
  const int mp = std::min(N - 1, std::max(knu, klam));

  std::vector<FeasibilityCut> family;
  family.reserve(static_cast<std::size_t>(std::max(mp, 0)) + 1);
  Eigen::VectorXd nu_s(cert.nu.size()), lam_s(cert.lambda.size());
  for (int m = 0; m <= mp; ++m) {
    nu_s.setZero();
    lam_s.setZero();
    for (int k = 0; k + m <= N; ++k)
      nu_s.segment(static_cast<Eigen::Index>(k) * nx, nx) =
          cert.nu.segment(static_cast<Eigen::Index>(k + m) * nx, nx);
    for (int k = 0; k + m <= N - 1; ++k)
      lam_s.segment(static_cast<Eigen::Index>(k) * nc, nc) =
          cert.lambda.segment(static_cast<Eigen::Index>(k + m) * nc, nc);
    family.push_back(make_cut(nu_s, lam_s, p));
  }
  return family;
}

OptimalityCut build_optimality_cut(const QpSolution& sol, const MldProblem& p,
                                   const ParameterVector& theta_q,
                                   const DeltaTrajectory& delta_q) {
  const int nx = p.nx(), nc = p.nc(), nd = p.ndelta(), N = p.N;
  require(sol.nu.size() == static_cast<Eigen::Index>(N + 1) * nx,
          "build_optimality_cut: nu length mismatch");
  require(sol.lambda.size() == static_cast<Eigen::Index>(N) * nc,
          "build_optimality_cut: lambda length mismatch");

  OptimalityCut cut;
  cut.Lambda.resize(nx + static_cast<Eigen::Index>(N) * nc);
  cut.Lambda.head(nx) = sol.nu.head(nx);
  cut.Lambda.tail(static_cast<Eigen::Index>(N) * nc) = sol.lambda;
  cut.V.resize(static_cast<Eigen::Index>(N) * nd);
  for (int k = 0; k < N; ++k)
    cut.V.segment(static_cast<Eigen::Index>(k) * nd, nd) =
        p.G.transpose() * sol.nu.segment(static_cast<Eigen::Index>(k + 1) * nx, nx) -
        p.H3.transpose() * sol.lambda.segment(static_cast<Eigen::Index>(k) * nc, nc);
  cut.theta_q = theta_q.flatten();
  cut.delta_q = delta_q.flatten();
  cut.v_q = sol.v;
  cut.Cq = sol.v + cut.Lambda.dot(cut.theta_q) + cut.V.dot(cut.delta_q);
  return cut;
}

InstantiatedCuts instantiate(const CutBuffer& buf, const MldProblem& p,
                             const ParameterVector& theta) {
  InstantiatedCuts out;
  out.N = p.N;
  out.ndelta = p.ndelta();
  const Eigen::VectorXd th = theta.flatten();
  require(th.size() == p.ntheta(), "instantiate: parameter length mismatch");
  for (const auto& fd : buf.farkas)
    for (const auto& cut : fd.family)
      out.feas.push_back({cut.V, cut.Lambda.dot(th), cut.last_active_step});
  for (const auto& od : buf.optimal)
    out.opt.push_back({od.cut.V, od.cut.Cq - od.cut.Lambda.dot(th)});
  return out;
}

void store(CutBuffer& buf, const std::vector<FarkasDual>& new_farkas,
           const std::vector<OptimalDual>& new_optimal) {
  for (const auto& cand : new_farkas) {
    const Eigen::VectorXd cv = concat(cand.nu, cand.lambda);
    bool dup = false;
    double min_ang = 1e9;
    for (const auto& have : buf.farkas) {
      const double a = angle(cv, concat(have.nu, have.lambda));
      min_ang = std::min(min_ang, a);
      if (a < buf.alpha) {
        dup = true;
        break;
      }
    }
    if (std::getenv("GBDMPC_TRACE")) {
      std::string prof;
      const int N = static_cast<int>(cand.nu.size()) - 1;
      for (int k = 0; k <= N; ++k)
        prof += cand.nu[k].lpNorm<Eigen::Infinity>() > 1e-9 ? 'N' : '.';
      prof += '|';
      for (int k = 0; k < N; ++k)
        prof += cand.lambda[k].lpNorm<Eigen::Infinity>() > 1e-9 ? 'L' : '.';
      std::fprintf(stderr, "  store farkas %s min_angle=%.1f deg %s\n", prof.c_str(),
                   min_ang * 57.2958, dup ? "DUP" : "kept");
    }
    if (dup) continue;
    buf.farkas.push_back(cand);
    while (buf.farkas.size() > buf.k_feas) buf.farkas.pop_front();
  }
  for (const auto& cand : new_optimal) {
    const Eigen::VectorXd cv = concat(cand.nu, cand.lambda);
    bool dup = false;
    for (const auto& have : buf.optimal) {
      if ((cv - concat(have.nu, have.lambda)).norm() < buf.epsilon) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    buf.optimal.push_back(cand);
    while (buf.optimal.size() > buf.k_opt) buf.optimal.pop_front();
  }
}

void bind(CutBuffer& buf, const MldProblem& p) {
  std::uint64_t model = 1469598103934665603ull;
  model = hash_matrix(model, p.E);
  model = hash_matrix(model, p.F);
  model = hash_matrix(model, p.G);
  model = hash_matrix(model, p.H1);
  model = hash_matrix(model, p.H2);
  model = hash_matrix(model, p.H3);
  model = fnv1a(model, &p.N, sizeof(p.N));
  std::uint64_t cost = model;
  cost = hash_matrix(cost, p.Q);
  cost = hash_matrix(cost, p.R);
  cost = hash_matrix(cost, p.QN);
  cost = hash_matrix(cost, p.xg);

  if (buf.model_tag != model) {
    buf.farkas.clear();
    buf.optimal.clear();
  } else if (buf.cost_tag != cost) {
    buf.optimal.clear();
  }
  buf.model_tag = model;
  buf.cost_tag = cost;
}

}  // namespace gbdmpc
