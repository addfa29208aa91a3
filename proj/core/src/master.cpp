#include "gbdmpc/master.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gbdmpc {

namespace {

constexpr double kFeasTol = 1e-9;

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return a(i) < b(i);
  return false;
}

// Mode indices in lexicographic order of the binary vectors; this is the
// tie-break order everywhere, independent of how the caller listed modes.
std::vector<int> lex_order(const ModeList& modes) {
  std::vector<int> idx(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) idx[i] = static_cast<int>(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return lex_less(modes[a], modes[b]); });
  return idx;
}

int last_nonzero_vblock(const Eigen::VectorXd& V, int N, int nd) {
  for (int k = N - 1; k >= 0; --k)
    if (V.segment(static_cast<Eigen::Index>(k) * nd, nd).lpNorm<Eigen::Infinity>() > 0.0)
      return k;
  return -1;
}

}  // namespace

ParsedCuts parse(const InstantiatedCuts& cuts) {
  require(cuts.N >= 1 && cuts.ndelta >= 1, "parse: empty horizon");
  ParsedCuts out;
  out.N = cuts.N;
  out.ndelta = cuts.ndelta;
  out.feas = cuts.feas;
  out.opt = cuts.opt;
  out.buckets.assign(cuts.N, {});
  for (std::size_t i = 0; i < out.feas.size(); ++i) {
    const auto& row = out.feas[i];
    require(row.V.size() == static_cast<Eigen::Index>(cuts.N) * cuts.ndelta,
            "parse: feasibility row length mismatch");
    // The recorded last active step must cover every nonzero block; widen
    // if a degenerate coefficient pattern says otherwise.
    const int lastv = last_nonzero_vblock(row.V, cuts.N, cuts.ndelta);
    const int bucket = std::clamp(std::max(row.last_active_step, lastv), 0, cuts.N - 1);
    out.buckets[bucket].push_back(static_cast<int>(i));
  }
  for (const auto& row : out.opt)
    require(row.V.size() == static_cast<Eigen::Index>(cuts.N) * cuts.ndelta,
            "parse: optimality row length mismatch");
  return out;
}

std::vector<LookaheadRow> lookahead_rows(const ParsedCuts& cuts, int k,
                                         const ModeList& modes) {
  require(k >= 0 && k < cuts.N, "lookahead_rows: step out of range");
  require(!modes.empty(), "lookahead_rows: empty mode list");
  std::vector<LookaheadRow> rows;
  if (k + 1 >= cuts.N) return rows;
  const int nd = cuts.ndelta;
  for (int i : cuts.buckets[k + 1]) {
    const auto& row = cuts.feas[i];
    const Eigen::VectorXd vk = row.V.segment(static_cast<Eigen::Index>(k) * nd, nd);
    const Eigen::VectorXd vnext =
        row.V.segment(static_cast<Eigen::Index>(k + 1) * nd, nd);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& w : modes) best = std::max(best, vnext.dot(w));
    rows.push_back({vk, -row.S - best});
  }
  return rows;
}

MasterSolution solve_greedy(const ParsedCuts& cuts, const ModeList& modes,
                            const GreedyOptions& opts) {
  const int N = cuts.N, nd = cuts.ndelta;
  require(!modes.empty(), "solve_greedy: empty mode list");
  for (const auto& w : modes)
    require(w.size() == nd, "solve_greedy: mode length mismatch");

  const std::vector<int> order0 = lex_order(modes);
  const int nmodes = static_cast<int>(modes.size());
  const int nfeas = static_cast<int>(cuts.feas.size());
  const int nopt = static_cast<int>(cuts.opt.size());

  // Bucket index per cut (as parsed) and the look-ahead relaxation of each
  // cut's final block, both fixed for the whole search.
  std::vector<int> bucket_of(nfeas, 0);
  for (int k = 0; k < N; ++k)
    for (int i : cuts.buckets[k]) bucket_of[i] = k;
  std::vector<double> maxlast(nfeas, 0.0);
  if (opts.lookahead) {
    for (int i = 0; i < nfeas; ++i) {
      const int bk = bucket_of[i];
      const Eigen::VectorXd vb =
          cuts.feas[i].V.segment(static_cast<Eigen::Index>(bk) * nd, nd);
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& w : modes) best = std::max(best, vb.dot(w));
      maxlast[i] = best;
    }
  }

  std::vector<double> s_feas(nfeas), s_opt(nopt);
  for (int i = 0; i < nfeas; ++i) s_feas[i] = cuts.feas[i].S;
  for (int q = 0; q < nopt; ++q) s_opt[q] = cuts.opt[q].S;

  auto vblock = [&](const Eigen::VectorXd& V, int k) {
    return V.segment(static_cast<Eigen::Index>(k) * nd, nd);
  };

  auto admissible = [&](int k, const Eigen::VectorXd& w) {
    for (int i : cuts.buckets[k])
      if (vblock(cuts.feas[i].V, k).dot(w) + s_feas[i] < -kFeasTol) return false;
    if (opts.lookahead && k + 1 < N) {
      for (int i : cuts.buckets[k + 1])
        if (vblock(cuts.feas[i].V, k).dot(w) + maxlast[i] + s_feas[i] < -kFeasTol)
          return false;
    }
    return true;
  };
  auto surrogate = [&](int k, const Eigen::VectorXd& w) {
    double c = 0.0;
    bool first = true;
    for (int q = 0; q < nopt; ++q) {
      const double val = s_opt[q] - vblock(cuts.opt[q].V, k).dot(w);
      if (first || val > c) c = val;
      first = false;
    }
    return nopt ? c : 0.0;
  };
  auto apply = [&](int k, const Eigen::VectorXd& w) {
    for (int q = 0; q < nopt; ++q) s_opt[q] -= vblock(cuts.opt[q].V, k).dot(w);
    for (int i = 0; i < nfeas; ++i)
      if (bucket_of[i] > k) s_feas[i] += vblock(cuts.feas[i].V, k).dot(w);
  };
  auto undo = [&](int k, const Eigen::VectorXd& w) {
    for (int q = 0; q < nopt; ++q) s_opt[q] += vblock(cuts.opt[q].V, k).dot(w);
    for (int i = 0; i < nfeas; ++i)
      if (bucket_of[i] > k) s_feas[i] -= vblock(cuts.feas[i].V, k).dot(w);
  };

  struct Frame {
    std::vector<int> cand;  // mode indices ordered by (surrogate, lex rank)
    std::size_t cursor = 0;
  };
  std::vector<Frame> frames;
  std::vector<int> chosen(N, -1);

  MasterSolution out;
  out.exact = false;

  auto scratch_check = [&](int upto) {
    // Recompute every S term from the chosen prefix and compare with the
    // incrementally maintained values.
    double worst = 0.0;
    for (int q = 0; q < nopt; ++q) {
      double s = cuts.opt[q].S;
      for (int j = 0; j < upto; ++j)
        s -= vblock(cuts.opt[q].V, j).dot(modes[chosen[j]]);
      worst = std::max(worst, std::abs(s - s_opt[q]));
    }
    for (int i = 0; i < nfeas; ++i) {
      double s = cuts.feas[i].S;
      for (int j = 0; j < std::min(upto, bucket_of[i]); ++j)
        s += vblock(cuts.feas[i].V, j).dot(modes[chosen[j]]);
      worst = std::max(worst, std::abs(s - s_feas[i]));
    }
    out.max_restore_error = std::max(out.max_restore_error, worst);
  };

  int k = 0;
  while (k < N) {
    // Collect and order admissible modes for this step.
    Frame f;
    std::vector<std::pair<double, int>> scored;
    for (int rank = 0; rank < nmodes; ++rank) {
      const int widx = order0[rank];
      if (admissible(k, modes[widx]))
        scored.emplace_back(surrogate(k, modes[widx]), widx);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [c, widx] : scored) f.cand.push_back(widx);

    if (!f.cand.empty()) {
      chosen[k] = f.cand[0];
      apply(k, modes[chosen[k]]);
      frames.push_back(std::move(f));
      ++k;
      continue;
    }

    // Backtrack: walk down until some earlier step has an untried mode.
    bool resumed = false;
    while (!frames.empty()) {
      ++out.backtracks;
      if (static_cast<std::uint64_t>(out.backtracks) > opts.max_backtracks) {
        // Budget exhausted: fall back to enumeration when the grid is small
        // enough to scan, otherwise report the budget failure.
        long double grid = 1.0L;
        bool fits = true;
        for (int j = 0; j < N; ++j) {
          grid *= static_cast<long double>(nmodes);
          if (grid > static_cast<long double>(opts.enum_fallback_cap)) {
            fits = false;
            break;
          }
        }
        if (fits) {
          MasterSolution enumed = solve_enumeration(cuts, modes, opts.enum_fallback_cap);
          enumed.backtracks = out.backtracks;
          enumed.max_restore_error = out.max_restore_error;
          return enumed;
        }
        out.status = MasterStatus::BudgetExhausted;
        return out;
      }
      --k;
      undo(k, modes[chosen[k]]);
      if (opts.check_restores) scratch_check(k);
      Frame& prev = frames.back();
      if (++prev.cursor < prev.cand.size()) {
        chosen[k] = prev.cand[prev.cursor];
        apply(k, modes[chosen[k]]);
        ++k;
        resumed = true;
        break;
      }
      frames.pop_back();
    }
    if (!resumed && frames.empty()) {
      out.status = MasterStatus::Infeasible;
      return out;
    }
  }

  out.status = MasterStatus::Found;
  out.delta.delta.resize(N);
  for (int j = 0; j < N; ++j) out.delta.delta[j] = modes[chosen[j]];
  double m = 0.0;
  for (int q = 0; q < nopt; ++q) m = q == 0 ? s_opt[q] : std::max(m, s_opt[q]);
  out.m_star = m;
  return out;
}

MasterSolution solve_enumeration(const ParsedCuts& cuts, const ModeList& modes,
                                 std::uint64_t cap) {
  const int N = cuts.N, nd = cuts.ndelta;
  require(!modes.empty(), "solve_enumeration: empty mode list");
  for (const auto& w : modes)
    require(w.size() == nd, "solve_enumeration: mode length mismatch");

  long double grid = 1.0L;
  for (int j = 0; j < N; ++j) {
    grid *= static_cast<long double>(modes.size());
    require(grid <= static_cast<long double>(cap),
            "solve_enumeration: mode grid exceeds cap");
  }

  const std::vector<int> order0 = lex_order(modes);
  const int nmodes = static_cast<int>(modes.size());
  const int nfeas = static_cast<int>(cuts.feas.size());
  const int nopt = static_cast<int>(cuts.opt.size());

  std::vector<int> digit(N, 0);
  MasterSolution out;
  out.exact = true;
  out.status = MasterStatus::Infeasible;
  double best = std::numeric_limits<double>::infinity();

  auto vblock = [&](const Eigen::VectorXd& V, int k) {
    return V.segment(static_cast<Eigen::Index>(k) * nd, nd);
  };

  while (true) {
    bool feasible = true;
    for (int i = 0; i < nfeas && feasible; ++i) {
      double s = cuts.feas[i].S;
      for (int j = 0; j < N; ++j)
        s += vblock(cuts.feas[i].V, j).dot(modes[order0[digit[j]]]);
      if (s < -kFeasTol) feasible = false;
    }
    if (feasible) {
      double m = 0.0;
      for (int q = 0; q < nopt; ++q) {
        double s = cuts.opt[q].S;
        for (int j = 0; j < N; ++j)
          s -= vblock(cuts.opt[q].V, j).dot(modes[order0[digit[j]]]);
        m = q == 0 ? s : std::max(m, s);
      }
      if (nopt == 0) m = 0.0;
      if (out.status == MasterStatus::Infeasible || m < best) {
        best = m;
        out.status = MasterStatus::Found;
        out.delta.delta.resize(N);
        for (int j = 0; j < N; ++j) out.delta.delta[j] = modes[order0[digit[j]]];
        out.m_star = m;
      }
    }
    // Advance the odometer (digit 0 most significant = lexicographic scan).
    int pos = N - 1;
    while (pos >= 0 && ++digit[pos] == nmodes) digit[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

}  // namespace gbdmpc
