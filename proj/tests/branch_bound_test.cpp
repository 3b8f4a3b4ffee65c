// Copyright 2026 The nodemix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nodemix/branch_bound.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "nodemix/errors.hpp"
#include "test_support.hpp"

namespace nodemix {
namespace {

using testing::ab_catalog;
using testing::ab_problem;
using testing::vec;

// Small random problem whose default bounds stay within 0..6.
AllocationProblem small_problem(std::uint64_t seed, bool consolidation) {
  std::mt19937_64 gen(seed * 7919 + 1);
  std::uniform_int_distribution<int> n_dist(2, 4);
  std::uniform_int_distribution<int> m_dist(1, 3);
  const int n = n_dist(gen);
  const int m = m_dist(gen);
  auto cat = testing::random_catalog(seed, n, m, 2);
  std::uniform_int_distribution<int> dem(2, 12);
  Eigen::VectorXd d(m);
  for (int r = 0; r < m; ++r) d(r) = dem(gen);
  PenaltyParams params;
  if (consolidation) {
    params.alpha = 0.3;
    params.beta1 = 0.7;
  }
  AllocationProblem p = make_problem(cat, d, params);
  p.waste = 0.6 * d;
  std::uniform_real_distribution<double> u(0, 1);
  if (u(gen) < 0.3) p.uncertainty = 0.2 * d;
  p.upper_bounds = Eigen::VectorXd::Constant(n, 6);
  return p;
}

TEST(SolveInteger, AbPicksFourSmall) {
  IntegerSolution sol = solve_integer(ab_problem());
  EXPECT_EQ(sol.x_hat.counts, vec({4, 0}));
  EXPECT_NEAR(sol.breakdown.total, 0.40, 1e-12);
  EXPECT_TRUE(sol.completed);
  ASSERT_TRUE(sol.bound_gap.has_value());
  EXPECT_EQ(*sol.bound_gap, 0.0);
  EXPECT_EQ(sol.method, IntegerMethod::kBranchAndBound);

  Eigen::VectorXd best;
  AllocationProblem p = ab_problem();
  p.upper_bounds = vec({10, 10});
  EXPECT_NEAR(testing::enumerate_optimum(p, &best), 0.40, 1e-12);
  EXPECT_EQ(best, vec({4, 0}));
}

TEST(SolveInteger, ZeroDemandGivesOrigin) {
  AllocationProblem p = make_problem(ab_catalog(), vec({0, 0}));
  IntegerSolution sol = solve_integer(p);
  EXPECT_EQ(sol.x_hat.counts, vec({0, 0}));
  EXPECT_EQ(sol.breakdown.total, 0.0);
}

TEST(SolveInteger, MatchesEnumeration) {
  int feasible = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (bool consolidation : {false, true}) {
      AllocationProblem p = small_problem(seed, consolidation);
      const double oracle = testing::enumerate_optimum(p);
      if (!std::isfinite(oracle)) {
        EXPECT_THROW(solve_integer(p), InfeasibleError) << seed;
        continue;
      }
      ++feasible;
      IntegerSolution sol = solve_integer(p);
      EXPECT_NEAR(sol.breakdown.total, oracle, 1e-6)
          << "seed " << seed << " alpha " << p.params.alpha;
      EXPECT_TRUE(sol.completed);
      EXPECT_TRUE(testing::satisfies_constraints(p, sol.x_hat.counts));
      EXPECT_TRUE((sol.x_hat.counts.array() <= 6).all());
    }
  }
  std::printf("feasible cases: %d\n", feasible);
  EXPECT_GE(feasible, 30);
}

TEST(SolveInteger, IncumbentTraceIsNonincreasing) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    AllocationProblem p = small_problem(seed, true);
    if (!std::isfinite(testing::enumerate_optimum(p))) continue;
    IntegerSolution sol = solve_integer(p);
    ASSERT_FALSE(sol.incumbent_trace.empty());
    for (std::size_t k = 1; k < sol.incumbent_trace.size(); ++k)
      EXPECT_LT(sol.incumbent_trace[k], sol.incumbent_trace[k - 1]);
    EXPECT_DOUBLE_EQ(sol.incumbent_trace.back(), sol.breakdown.total);
  }
}

TEST(SolveInteger, Deterministic) {
  std::uint64_t seed = 0;
  while (!std::isfinite(testing::enumerate_optimum(small_problem(seed, true)))) ++seed;
  AllocationProblem p = small_problem(seed, true);
  IntegerSolution a = solve_integer(p);
  IntegerSolution b = solve_integer(p);
  EXPECT_EQ(a.x_hat.counts, b.x_hat.counts);
  EXPECT_EQ(a.nodes_explored, b.nodes_explored);
  EXPECT_EQ(a.incumbent_trace, b.incumbent_trace);
}

TEST(SolveInteger, InfeasibleIsReported) {
  AllocationProblem p = ab_problem();
  p.upper_bounds = vec({1, 1});
  EXPECT_THROW(solve_integer(p), InfeasibleError);
}

TEST(SolveInteger, TinyBudgetStillReturnsSomething) {
  auto cat = testing::random_catalog(17, 8, 3, 3);
  AllocationProblem p = make_problem(cat, vec({40, 35, 50}));
  BnbBudget budget;
  budget.node_limit = 1;
  IntegerSolution sol = solve_integer(p, {}, budget);
  EXPECT_FALSE(sol.completed);
  EXPECT_TRUE((sol.x_hat.counts.array() >= 0).all());
  if (sol.method == IntegerMethod::kBranchAndBound) {
    ASSERT_TRUE(sol.bound_gap.has_value());
    EXPECT_GE(*sol.bound_gap, 0.0);
  }
}

TEST(NodeBound, NeverExceedsBoxOptimum) {
  std::mt19937_64 gen(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    AllocationProblem p = small_problem(seed, true);
    const auto n = static_cast<Eigen::Index>(p.num_instances());
    for (int trial = 0; trial < 4; ++trial) {
      std::uniform_int_distribution<int> lo(0, 3);
      Eigen::VectorXd l(n), u(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        l(i) = lo(gen);
        u(i) = std::min(6.0, l(i) + lo(gen));
      }
      double best = std::numeric_limits<double>::infinity();
      testing::enumerate_box(l, u, [&](const Eigen::VectorXd& x) {
        if (testing::satisfies_constraints(p, x))
          best = std::min(best, objective(p, x).total);
      });
      std::optional<double> bound = node_lower_bound(p, l, u);
      if (!bound) {
        EXPECT_FALSE(std::isfinite(best)) << "seed " << seed;
        continue;
      }
      EXPECT_LE(*bound, best + 1e-9) << "seed " << seed << " trial " << trial;
    }
  }
}

TEST(GreedyRound, HandTracedExample) {
  AllocationProblem p = make_problem(ab_catalog(), vec({8, 16}));
  IntegerSolution sol = greedy_round(p, Allocation::continuous(vec({3.6, 0.2})));
  EXPECT_EQ(sol.x_hat.counts, vec({3, 1}));
  EXPECT_NEAR(sol.breakdown.base_cost, 0.55, 1e-12);
  EXPECT_EQ(sol.method, IntegerMethod::kRounding);
  EXPECT_FALSE(sol.bound_gap.has_value());
  // Kx = (10, 28) overshoots the memory cap 16 + 4 by 8.
  EXPECT_NEAR(sol.max_violation, 8.0, 1e-12);
}

TEST(GreedyRound, FeasibleIntegralInputIsUnchanged) {
  AllocationProblem p = ab_problem();
  IntegerSolution sol = greedy_round(p, Allocation::continuous(vec({4, 1})));
  EXPECT_EQ(sol.x_hat.counts, vec({4, 1}));
}

TEST(GreedyRound, FromOriginTerminatesWithinBound) {
  AllocationProblem p = ab_problem();
  IntegerSolution sol = greedy_round(p, Allocation::continuous(vec({0, 0})));
  Eigen::VectorXd kx = p.composition() * sol.x_hat.counts;
  EXPECT_TRUE((kx.array() >= p.demand.array()).all());
  // ceil(8 / 2) + ceil(16 / 4) increments at most.
  EXPECT_LE(sol.x_hat.counts.sum(), 8.0);
}

TEST(GreedyRound, AlwaysCoversDemand) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0, 4);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto cat = testing::random_catalog(seed, 5, 3, 2);
    AllocationProblem p = make_problem(cat, vec({10 + u(gen), 3 * u(gen), 15}));
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x(i) = u(gen);
    IntegerSolution sol = greedy_round(p, Allocation::continuous(x));
    Eigen::VectorXd kx = p.composition() * sol.x_hat.counts;
    EXPECT_TRUE((kx.array() >= p.demand.array() - 1e-12).all()) << seed;
    EXPECT_GE(sol.max_violation, 0.0);
  }
}

TEST(GreedyRound, ZeroCostCoveringTypeWins) {
  auto cat = std::make_shared<const InstanceCatalog>(
      testing::cpu_mem_schema(),
      std::vector<InstanceType>{{"a", "x", {2, 4}, 0.10}, {"a", "free", {1, 1}, 0.0}});
  AllocationProblem p = make_problem(cat, vec({1, 1}));
  IntegerSolution sol = greedy_round(p, Allocation::continuous(vec({0, 0})));
  EXPECT_EQ(sol.x_hat.counts, vec({0, 1}));
}

TEST(GreedyRound, UncoverableResource) {
  auto cat = std::make_shared<const InstanceCatalog>(
      testing::cpu_mem_schema(), std::vector<InstanceType>{{"a", "x", {2, 0}, 0.10}});
  AllocationProblem p = make_problem(cat, vec({4, 0}));
  p.demand = vec({4, 3});
  p.waste = vec({1, 1});
  try {
    greedy_round(p, Allocation::continuous(vec({0})));
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("uncoverable resource"), std::string::npos);
  }
}

TEST(GreedyRound, RejectsNegativeInput) {
  EXPECT_THROW(greedy_round(ab_problem(), Allocation::continuous(vec({-1, 0}))),
               ValidationError);
}

TEST(Incremental, ZeroBudgetReturnsCurrent) {
  AllocationProblem p = ab_problem();
  p.current = vec({3, 1});
  p.max_deviation = 0.0;
  IntegerSolution sol = solve_integer(apply_incremental(p));
  EXPECT_EQ(sol.x_hat.counts, vec({3, 1}));

  p.current = vec({1, 0});  // violates the demand floor
  EXPECT_THROW(solve_integer(apply_incremental(p)), InfeasibleError);
}

TEST(Incremental, UnitBudget) {
  AllocationProblem p = ab_problem();
  p.current = vec({4, 0});
  p.max_deviation = 1.0;
  AllocationProblem q = apply_incremental(p);
  EXPECT_TRUE(testing::satisfies_constraints(q, vec({4, 1})));
  EXPECT_FALSE(testing::satisfies_constraints(q, vec({3, 1})));
  EXPECT_EQ(*q.upper_bounds, vec({5, 1}));
  IntegerSolution sol = solve_integer(q);
  EXPECT_LE((sol.x_hat.counts - *p.current).lpNorm<1>(), 1.0);
  EXPECT_NEAR(sol.breakdown.total, testing::enumerate_optimum(q), 1e-6);
}

TEST(Incremental, BudgetRespectedAgainstEnumeration) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    AllocationProblem p = small_problem(seed, true);
    const auto n = static_cast<Eigen::Index>(p.num_instances());
    p.current = Eigen::VectorXd::Constant(n, 2);
    p.max_deviation = 3.0;
    AllocationProblem q = apply_incremental(p);
    const double oracle = testing::enumerate_optimum(q);
    if (!std::isfinite(oracle)) {
      EXPECT_THROW(solve_integer(q), InfeasibleError);
      continue;
    }
    IntegerSolution sol = solve_integer(q);
    EXPECT_NEAR(sol.breakdown.total, oracle, 1e-6) << seed;
    EXPECT_LE((sol.x_hat.counts - *p.current).lpNorm<1>(), 3.0 + 1e-12);
  }
}

TEST(Incremental, Validation) {
  AllocationProblem p = ab_problem();
  EXPECT_THROW(apply_incremental(p), ValidationError);
  p.current = vec({4, 0});
  p.max_deviation = -1.0;
  EXPECT_THROW(apply_incremental(p), ValidationError);
}

TEST(IntegerMethodName, Strings) {
  EXPECT_STREQ(to_string(IntegerMethod::kBranchAndBound), "branch_and_bound");
  EXPECT_STREQ(to_string(IntegerMethod::kRounding), "rounding");
}

}  // namespace
}  // namespace nodemix
