#include "gbdmpc/lp_simplex.hpp"

#include <Eigen/LU>
#include <cstdio>
#include <limits>
#include <vector>

namespace gbdmpc {

namespace {

// Column layout of the standard form:
//   [0, n)        x+ columns, sign-flipped rows of [A; C]
//   [n, 2n)       x- columns, negated
//   [2n, 2n+m)    inequality slacks
//   [2n+m, ...)   artificials, one per row that lacks a usable slack
struct Tableau {
  const Eigen::MatrixXd& A;
  const Eigen::MatrixXd& C;
  Eigen::VectorXd sigma;   // row sign flips making the rhs nonnegative
  Eigen::VectorXd h;       // flipped rhs, h >= 0
  int l, m, n;             // equality rows, inequality rows, free vars
  std::vector<int> art_row;  // artificial column t sits on row art_row[t]

  int r() const { return l + m; }
  int n_struct() const { return 2 * n + m; }
  int n_cols() const { return n_struct() + static_cast<int>(art_row.size()); }

  // Writes column j of the flipped standard form into out.
  void column(int j, Eigen::VectorXd& out) const {
    out.setZero();
    if (j < 2 * n) {
      const int v = j < n ? j : j - n;
      const double s = j < n ? 1.0 : -1.0;
      for (int i = 0; i < l; ++i) out(i) = s * sigma(i) * A(i, v);
      for (int i = 0; i < m; ++i) out(l + i) = s * sigma(l + i) * C(i, v);
    } else if (j < 2 * n + m) {
      const int i = j - 2 * n;
      out(l + i) = sigma(l + i);
    } else {
      out(art_row[j - n_struct()]) = 1.0;
    }
  }

  bool is_artificial(int j) const { return j >= n_struct(); }
};

}  // namespace

LpFeasibility lp_find_point(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const Eigen::MatrixXd& C, const Eigen::VectorXd& d) {
  const int l = static_cast<int>(A.rows());
  const int m = static_cast<int>(C.rows());
  const int n = static_cast<int>(l > 0 ? A.cols() : C.cols());
  require(l == 0 || m == 0 || A.cols() == C.cols(), "lp_find_point: column mismatch");
  require(b.size() == l && d.size() == m, "lp_find_point: rhs length mismatch");

  LpFeasibility out;
  if (l + m == 0) {
    out.feasible = true;
    out.point = Eigen::VectorXd::Zero(n);
    return out;
  }

  Tableau tab{A, C, Eigen::VectorXd(), Eigen::VectorXd(), l, m, n, {}};
  const int r = l + m;
  tab.sigma.resize(r);
  tab.h.resize(r);
  for (int i = 0; i < r; ++i) {
    const double hi = i < l ? b(i) : d(i - l);
    tab.sigma(i) = hi >= 0.0 ? 1.0 : -1.0;
    tab.h(i) = std::abs(hi);
  }

  // Starting basis: unflipped inequality rows keep their slack, every other
  // row gets an artificial.
  std::vector<int> basis(r, -1);
  for (int i = 0; i < m; ++i)
    if (tab.sigma(l + i) > 0.0) basis[l + i] = 2 * n + i;
  for (int i = 0; i < r; ++i)
    if (basis[i] < 0) {
      basis[i] = tab.n_struct() + static_cast<int>(tab.art_row.size());
      tab.art_row.push_back(i);
    }

  Eigen::MatrixXd Binv = Eigen::MatrixXd::Identity(r, r);
  auto refactor = [&]() {
    Eigen::MatrixXd B(r, r);
    Eigen::VectorXd col(r);
    for (int i = 0; i < r; ++i) {
      tab.column(basis[i], col);
      B.col(i) = col;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Eigen::MatrixXd inv = lu.inverse();
    require(inv.allFinite(), "lp_find_point: singular basis during refactor");
    Binv = inv;
  };
  refactor();

  Eigen::VectorXd xb = Binv * tab.h;
  Eigen::VectorXd cb = Eigen::VectorXd::Zero(r);
  auto rebuild_cb = [&]() {
    for (int i = 0; i < r; ++i) cb(i) = tab.is_artificial(basis[i]) ? 1.0 : 0.0;
  };
  rebuild_cb();

  const double rc_tol = 1e-9;
  const double feas_tol = 1e-9 * (1.0 + tab.h.lpNorm<Eigen::Infinity>());
  const double delta_feas = 1e-7 * (1.0 + tab.h.lpNorm<Eigen::Infinity>());
  int since_refactor = 0;

  Eigen::VectorXd col(r), y(r), p(r), q(r), w(n);

  auto pivot = [&](int enter, int leave) {
    const double piv = y(leave);
    Binv.row(leave) /= piv;
    for (int i = 0; i < r; ++i) {
      if (i == leave) continue;
      const double f = y(i);
      if (f != 0.0) Binv.row(i) -= f * Binv.row(leave);
    }
    basis[leave] = enter;
    if (++since_refactor >= 64) {
      refactor();
      since_refactor = 0;
    }
    xb.noalias() = Binv * tab.h;
  };

  // Shared phase driver. Phase 1 (cx = 0) minimizes the artificial sum so a
  // nonzero optimum certifies infeasibility; phase 2 (cx = 1) continues from
  // the feasible basis and shrinks the 1-norm of the split variables, which
  // pulls the returned vertex toward the origin instead of leaving it at an
  // arbitrary and possibly enormous corner of the polyhedron.
  auto run_phase = [&](double cx, double c_art) -> int {
    for (int i = 0; i < r; ++i)
      cb(i) = tab.is_artificial(basis[i]) ? c_art
              : basis[i] < 2 * n         ? cx
                                         : 0.0;
    const int max_iters = 2000 + 60 * r;
    const int stall_limit = 4 * (r + n);
    int stall = 0;
    bool bland = false;
    double last_obj = std::numeric_limits<double>::infinity();

    int it = 0;
    for (; it < max_iters; ++it) {
      const double obj = cb.dot(xb);
      if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
        stall = 0;
        last_obj = obj;
      } else if (++stall > stall_limit && !bland) {
        bland = true;
      }

      // Simplex multipliers and pricing. w = [A' C'] (sigma .* p) prices
      // every structural column in O(r n) instead of touching each column.
      p.noalias() = Binv.transpose() * cb;
      q = tab.sigma.cwiseProduct(p);
      w.setZero();
      if (l > 0) w.noalias() += A.transpose() * q.head(l);
      if (m > 0) w.noalias() += C.transpose() * q.tail(m);

      int enter = -1;
      double best = -rc_tol;
      auto consider = [&](int j, double rc) {
        if (rc >= -rc_tol) return;
        if (bland) {
          if (enter < 0 || j < enter) {
            enter = j;
            best = rc;
          }
        } else if (rc < best) {
          enter = j;
          best = rc;
        }
      };
      for (int v = 0; v < n; ++v) {
        consider(v, cx - w(v));
        consider(n + v, cx + w(v));
      }
      for (int i = 0; i < m; ++i) consider(2 * n + i, -tab.sigma(l + i) * p(l + i));
      // Artificial columns are never priced back in.

      if (enter < 0) break;  // phase optimum reached

      tab.column(enter, col);
      y.noalias() = Binv * col;

      // Harris-style two-pass ratio test. Pass 1 relaxes each row by the
      // feasibility tolerance to get a step bound; pass 2 picks the largest
      // pivot among rows whose exact ratio fits under that bound. Admitting
      // only pivots that are large relative to the transformed column keeps
      // the basis away from singularity on degenerate vertices, and the
      // relaxed bound lets a near-degenerate row with a healthy pivot beat a
      // tiny-pivot row with a marginally smaller ratio.
      const double ymax = y.cwiseAbs().maxCoeff();
      double piv_min = std::max(1e-9, 1e-7 * ymax);
      int leave = -1;
      for (int attempt = 0; attempt < 2 && leave < 0; ++attempt) {
        double bound = std::numeric_limits<double>::infinity();
        for (int i = 0; i < r; ++i)
          if (y(i) > piv_min)
            bound = std::min(bound, (std::max(xb(i), 0.0) + delta_feas) / y(i));
        double best_piv = 0.0;
        for (int i = 0; i < r; ++i) {
          if (y(i) <= piv_min) continue;
          if (std::max(xb(i), 0.0) / y(i) > bound) continue;
          bool take = leave < 0;
          if (!take) {
            const bool cand_art = tab.is_artificial(basis[i]);
            const bool cur_art = tab.is_artificial(basis[leave]);
            if (cand_art != cur_art)
              take = cand_art;
            else if (bland)
              take = basis[i] < basis[leave];
            else
              take = y(i) > best_piv;
          }
          if (take) {
            leave = i;
            best_piv = y(i);
          }
        }
        piv_min = 1e-9;  // fallback pass when every large pivot is excluded
      }
      require(leave >= 0, "lp_find_point: direction unbounded (numerical breakdown)");

      pivot(enter, leave);
      for (int i = 0; i < r; ++i)
        cb(i) = tab.is_artificial(basis[i]) ? c_art
                : basis[i] < 2 * n         ? cx
                                           : 0.0;
    }
    require(it < max_iters, "lp_find_point: simplex iteration cap exhausted");
    return it;
  };

  out.iterations = run_phase(0.0, 1.0);
  const double obj = cb.dot(xb);
  if (obj > feas_tol) {
    out.feasible = false;
    p.noalias() = Binv.transpose() * cb;
    q = tab.sigma.cwiseProduct(p);
    out.p_eq = -q.head(l);
    out.p_in = -q.tail(m);
    return out;
  }

  // Drive zero-level artificials off the basis where a structural pivot
  // exists. A row where no structural column has a nonzero transformed entry
  // is linearly dependent; its artificial stays pinned at zero because every
  // later pivot leaves that row of Binv untouched.
  for (int i = 0; i < r; ++i) {
    if (!tab.is_artificial(basis[i])) continue;
    for (int j = 0; j < tab.n_struct(); ++j) {
      bool in_basis = false;
      for (int t = 0; t < r; ++t)
        if (basis[t] == j) {
          in_basis = true;
          break;
        }
      if (in_basis) continue;
      tab.column(j, col);
      y.noalias() = Binv * col;
      if (std::abs(y(i)) > 1e-5) {
        pivot(j, i);
        break;
      }
    }
  }

  out.iterations += run_phase(1.0, 0.0);
  out.feasible = true;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < r; ++i) {
    const int j = basis[i];
    const double v = xb(i);
    if (j < n)
      x(j) += v;
    else if (j < 2 * n)
      x(j - n) -= v;
  }
  out.point = x;
  return out;
}

}  // namespace gbdmpc
