#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "gbdmpc/master.hpp"
#include "gbdmpc/random_problems.hpp"
#include "support.hpp"

using namespace gbdmpc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

InstantiatedCuts cuts_of(int N, int ndelta, std::vector<InstFeasRow> feas,
                         std::vector<InstOptRow> opt = {}) {
  InstantiatedCuts c;
  c.N = N;
  c.ndelta = ndelta;
  c.feas = std::move(feas);
  c.opt = std::move(opt);
  return c;
}

// The greedy search must agree with enumeration on feasibility, and its
// solution must satisfy every instantiated row.
void check_against_enumeration(const ParsedCuts& parsed, const ModeList& modes) {
  GreedyOptions plain;
  GreedyOptions look;
  look.lookahead = true;
  look.check_restores = true;
  const MasterSolution enumd = solve_enumeration(parsed, modes);
  for (const GreedyOptions& opts : {plain, look}) {
    const MasterSolution greedy = solve_greedy(parsed, modes, opts);
    REQUIRE(greedy.status == enumd.status);
    if (greedy.status != MasterStatus::Found) continue;
    const Eigen::VectorXd flat = greedy.delta.flatten();
    for (const auto& row : parsed.feas) CHECK(row.V.dot(flat) + row.S >= -1e-9);
    double m = 0.0;
    bool first = true;
    for (const auto& row : parsed.opt) {
      const double val = row.S - row.V.dot(flat);
      m = first ? val : std::max(m, val);
      first = false;
    }
    CHECK(greedy.m_star == doctest::Approx(m).epsilon(1e-9));
    CHECK(greedy.m_star >= enumd.m_star - 1e-9);
    CHECK(greedy.max_restore_error <= 1e-12);
  }
}

}  // namespace

TEST_CASE("parse buckets rows by their deepest dependence") {
  SUBCASE("one-step row lands in bucket zero") {
    const ParsedCuts parsed = parse(cuts_of(1, 1, {{vec({3.0}), -1.0, 0}}));
    REQUIRE(parsed.buckets.size() == 1);
    REQUIRE(parsed.buckets[0].size() == 1);
    CHECK(parsed.buckets[0][0] == 0);
  }
  SUBCASE("a nonzero middle block widens the declared step") {
    const ParsedCuts parsed = parse(cuts_of(3, 1, {{vec({0.0, 1.0, 0.0}), 0.0, 0}}));
    REQUIRE(parsed.buckets.size() == 3);
    CHECK(parsed.buckets[0].empty());
    REQUIRE(parsed.buckets[1].size() == 1);
    CHECK(parsed.buckets[2].empty());
  }
  SUBCASE("no cuts parse to empty buckets") {
    const ParsedCuts parsed = parse(cuts_of(2, 1, {}));
    CHECK(parsed.feas.empty());
    CHECK(parsed.opt.empty());
    REQUIRE(parsed.buckets.size() == 2);
    CHECK(parsed.buckets[0].empty());
    CHECK(parsed.buckets[1].empty());
  }
}

TEST_CASE("greedy and enumeration solve the worked example cuts") {
  const ModeList modes = all_modes(1);
  const InstantiatedCuts cuts =
      cuts_of(1, 1, {{vec({3.0}), -1.0, 0}}, {{vec({-1.0}), -0.5}});
  const ParsedCuts parsed = parse(cuts);

  const MasterSolution greedy = solve_greedy(parsed, modes);
  REQUIRE(greedy.status == MasterStatus::Found);
  CHECK(greedy.delta.delta[0](0) == 1.0);
  CHECK(greedy.m_star == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(greedy.backtracks == 0);

  const MasterSolution enumd = solve_enumeration(parsed, modes);
  REQUIRE(enumd.status == MasterStatus::Found);
  CHECK(enumd.delta.delta[0](0) == 1.0);
  CHECK(enumd.m_star == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(enumd.exact);
}

TEST_CASE("contradictory rows kill every mode") {
  const ModeList modes = all_modes(1);
  const InstantiatedCuts cuts = cuts_of(
      1, 1, {{vec({3.0}), -1.0, 0}, {vec({-3.0}), 1.0, 0}}, {{vec({-1.0}), -0.5}});
  const ParsedCuts parsed = parse(cuts);
  CHECK(solve_greedy(parsed, modes).status == MasterStatus::Infeasible);
  CHECK(solve_enumeration(parsed, modes).status == MasterStatus::Infeasible);
}

TEST_CASE("without cuts the lexicographically first trajectory wins") {
  const ModeList modes = all_modes(1);
  const ParsedCuts parsed = parse(cuts_of(2, 1, {}));
  for (const MasterSolution& m :
       {solve_greedy(parsed, modes), solve_enumeration(parsed, modes)}) {
    REQUIRE(m.status == MasterStatus::Found);
    CHECK(m.delta.delta[0](0) == 0.0);
    CHECK(m.delta.delta[1](0) == 0.0);
    CHECK(m.m_star == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("a binary-independent bound keeps the tie-break lexicographic") {
  const ModeList modes = all_modes(1);
  const ParsedCuts parsed = parse(cuts_of(2, 1, {}, {{vec({0.0, 0.0}), 3.0}}));
  for (const MasterSolution& m :
       {solve_greedy(parsed, modes), solve_enumeration(parsed, modes)}) {
    REQUIRE(m.status == MasterStatus::Found);
    CHECK(m.delta.delta[0](0) == 0.0);
    CHECK(m.delta.delta[1](0) == 0.0);
    CHECK(m.m_star == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("look-ahead rows relax the next step to its best mode") {
  const ModeList modes = all_modes(1);

  SUBCASE("a positive next-step coefficient discounts fully") {
    const ParsedCuts parsed = parse(cuts_of(2, 1, {{vec({1.0, 1.0}), -1.0, 1}}));
    const auto rows = lookahead_rows(parsed, 0, modes);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].v(0) == doctest::Approx(1.0));
    CHECK(rows[0].rhs == doctest::Approx(0.0));
    CHECK(lookahead_rows(parsed, 1, modes).empty());
  }
  SUBCASE("a negative next-step coefficient cannot help") {
    const ParsedCuts parsed = parse(cuts_of(2, 1, {{vec({2.0, -1.0}), -1.0, 1}}));
    const auto rows = lookahead_rows(parsed, 0, modes);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].v(0) == doctest::Approx(2.0));
    CHECK(rows[0].rhs == doctest::Approx(1.0));
  }
}

TEST_CASE("backtracking recovers from a dead-end prefix") {
  const ModeList modes = all_modes(1);
  // Only (1, 1) satisfies d0 + d1 >= 1.5; the row sits in bucket 1, so the
  // greedy pass discovers the conflict one step late unless look-ahead is on.
  const ParsedCuts parsed = parse(cuts_of(2, 1, {{vec({1.0, 1.0}), -1.5, 1}}));

  GreedyOptions plain;
  const MasterSolution g = solve_greedy(parsed, modes, plain);
  REQUIRE(g.status == MasterStatus::Found);
  CHECK(g.delta.delta[0](0) == 1.0);
  CHECK(g.delta.delta[1](0) == 1.0);
  CHECK(g.backtracks > 0);
  CHECK(!g.exact);

  GreedyOptions look;
  look.lookahead = true;
  const MasterSolution gl = solve_greedy(parsed, modes, look);
  REQUIRE(gl.status == MasterStatus::Found);
  CHECK(gl.delta.delta[0](0) == 1.0);
  CHECK(gl.backtracks == 0);

  SUBCASE("exhausted budget falls back to enumeration when the grid fits") {
    GreedyOptions tight;
    tight.max_backtracks = 0;
    const MasterSolution f = solve_greedy(parsed, modes, tight);
    REQUIRE(f.status == MasterStatus::Found);
    CHECK(f.exact);
    CHECK(f.delta.delta[0](0) == 1.0);
    CHECK(f.delta.delta[1](0) == 1.0);
  }
  SUBCASE("exhausted budget with an oversized grid reports itself") {
    GreedyOptions tight;
    tight.max_backtracks = 0;
    tight.enum_fallback_cap = 1;
    const MasterSolution f = solve_greedy(parsed, modes, tight);
    CHECK(f.status == MasterStatus::BudgetExhausted);
  }
}

TEST_CASE("enumeration refuses oversized grids") {
  const ParsedCuts parsed = parse(cuts_of(6, 2, {}));
  CHECK_THROWS_AS(solve_enumeration(parsed, all_modes(2), 16), Error);
}

TEST_CASE("random cut systems: verdicts, bounds, and bookkeeping") {
  Rng rng(777);
  long with_backtracks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int ndelta = 1 + static_cast<int>(rng.below(2));
    const int N = 1 + static_cast<int>(rng.below(6));
    const ModeList modes = all_modes(ndelta);

    InstantiatedCuts cuts;
    cuts.N = N;
    cuts.ndelta = ndelta;
    const int nfeas = static_cast<int>(rng.below(6));
    for (int i = 0; i < nfeas; ++i) {
      InstFeasRow row;
      row.last_active_step = static_cast<int>(rng.below(static_cast<std::uint64_t>(N)));
      row.V = Eigen::VectorXd::Zero(N * ndelta);
      for (int k = 0; k <= row.last_active_step; ++k)
        for (int j = 0; j < ndelta; ++j) row.V(k * ndelta + j) = rng.normal();
      row.S = rng.normal(0.0, 0.8);
      cuts.feas.push_back(row);
    }
    const int nopt = static_cast<int>(rng.below(3));
    for (int i = 0; i < nopt; ++i) {
      InstOptRow row;
      row.V = Eigen::VectorXd::Zero(N * ndelta);
      for (Eigen::Index j = 0; j < row.V.size(); ++j) row.V(j) = rng.normal();
      row.S = rng.normal();
      cuts.opt.push_back(row);
    }

    const ParsedCuts parsed = parse(cuts);
    check_against_enumeration(parsed, modes);

    GreedyOptions opts;
    opts.check_restores = true;
    const MasterSolution g = solve_greedy(parsed, modes, opts);
    if (g.backtracks > 0) ++with_backtracks;
  }
  CHECK(with_backtracks >= 1);
}
