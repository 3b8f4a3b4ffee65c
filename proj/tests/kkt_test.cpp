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

#include "nodemix/kkt.hpp"

#include <random>

#include <gtest/gtest.h>

#include "nodemix/barrier.hpp"
#include "nodemix/errors.hpp"
#include "test_support.hpp"

namespace nodemix {
namespace {

using testing::ab_catalog;
using testing::ab_problem;
using testing::vec;

TEST(Lagrangian, ZeroMultipliersGiveObjective) {
  AllocationProblem p = make_problem(ab_catalog(), vec({8, 16}));
  Eigen::VectorXd x = vec({1.5, 2.0});
  EXPECT_EQ(lagrangian(p, x, Multipliers::zero(p)), objective(p, x).total);
}

TEST(Lagrangian, OriginWithLambdaOnly) {
  AllocationProblem p = make_problem(ab_catalog(), vec({8, 16}));
  p.waste = vec({0, 0});
  Multipliers mult = Multipliers::zero(p);
  mult.lambda = vec({0.5, 2.0});
  EXPECT_DOUBLE_EQ(lagrangian(p, Eigen::VectorXd::Zero(2), mult),
                   objective(p, Eigen::VectorXd::Zero(2)).total + 0.5 * 8 + 2.0 * 16);
}

TEST(Lagrangian, RearrangedFormAgrees) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0, 3);
  for (int k = 0; k < 100; ++k) {
    auto cat = testing::random_catalog(static_cast<std::uint64_t>(k), 5, 3, 2);
    AllocationProblem p = make_problem(cat, vec({7 + u(gen), 3 * u(gen), 10}));
    p.uncertainty = vec({u(gen), 0, 1});
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x(i) = u(gen);
    Multipliers mult = Multipliers::zero(p);
    for (int r = 0; r < 3; ++r) {
      mult.lambda(r) = u(gen);
      mult.nu(r) = u(gen);
    }
    for (int i = 0; i < 5; ++i) {
      mult.omega(i) = u(gen);
      mult.upper(i) = u(gen);
    }
    double a = lagrangian(p, x, mult);
    double b = lagrangian_rearranged(p, x, mult);
    EXPECT_LE(std::abs(a - b), 1e-12 * std::max(1.0, std::abs(a))) << k;
  }
}

TEST(Lagrangian, DimensionMismatch) {
  AllocationProblem p = ab_problem();
  EXPECT_THROW(lagrangian(p, vec({1, 2, 3}), Multipliers::zero(p)), DimensionError);
  EXPECT_THROW(lagrangian(p, vec({1, 2}), Multipliers::zero(3, 2)), DimensionError);
}

TEST(KktReport, InteriorOptimumWithZeroMultipliers) {
  // Shortage-only objective with a single type: minimum where c = 2 beta3 K'(d - Kx).
  auto cat = std::make_shared<const InstanceCatalog>(
      ResourceSchema(std::vector<ResourceSpec>{{"cpu", "cores"}}), std::vector<InstanceType>{{"a", "x", {1}, 2.0}});
  PenaltyParams params;
  params.alpha = 0;
  params.gamma = 0;
  params.beta3 = 1;
  AllocationProblem p = make_problem(cat, vec({10}), params);
  p.uncertainty = vec({5});
  Eigen::VectorXd x = vec({9});  // 2 = 2 * 1 * (10 - 9)
  KktReport rep = kkt_report(p, x, Multipliers::zero(p));
  EXPECT_NEAR(rep.stationarity_norm, 0.0, 1e-12);
  EXPECT_EQ(rep.comp_slack_max, 0.0);
  EXPECT_EQ(rep.primal_violation, 0.0);
}

TEST(KktReport, WrongLambdaShowsUpAsComplementarity) {
  AllocationProblem p = ab_problem();
  Eigen::VectorXd x = vec({5, 0});  // Kx = (10, 20): slack (2, 4)
  Multipliers mult = Multipliers::zero(p);
  mult.lambda(0) = 1.0;
  KktReport rep = kkt_report(p, x, mult);
  EXPECT_DOUBLE_EQ(rep.comp_slack_max, 2.0);
  EXPECT_DOUBLE_EQ(rep.scaled().comp_slack_max, 2.0 / 16.0);
}

TEST(KktReport, NegativeMultiplierIsDualViolation) {
  AllocationProblem p = ab_problem();
  Multipliers mult = Multipliers::zero(p);
  mult.nu(1) = -0.25;
  EXPECT_DOUBLE_EQ(kkt_report(p, vec({4, 0}), mult).dual_violation, 0.25);
}

TEST(KktReport, PrimalViolation) {
  AllocationProblem p = ab_problem();
  KktReport rep = kkt_report(p, vec({1, 0}), Multipliers::zero(p));
  EXPECT_DOUBLE_EQ(rep.primal_violation, 12.0);  // 16 - 4 on memory
}

TEST(KktReport, BarrierSolutionOfAbIsCertified) {
  AllocationProblem p = ab_problem();
  ContinuousSolution sol = solve_relaxed(p);
  ASSERT_TRUE(sol.converged);
  KktReport rep = kkt_report(p, sol.x_star.counts, sol.multipliers).scaled();
  EXPECT_LE(rep.stationarity_norm, 1e-4);
  EXPECT_LE(rep.primal_violation, 1e-8);
  EXPECT_LE(rep.comp_slack_max, 1e-4);
  EXPECT_LE(rep.dual_violation, 1e-12);
}

TEST(DualityGap, ZeroMultipliers) {
  AllocationProblem p = ab_problem();
  GapEstimate g = duality_gap_estimate(p, vec({4, 0}), Multipliers::zero(p));
  EXPECT_EQ(g.gap, 0.0);
  EXPECT_FALSE(g.nonconvex);
  EXPECT_FALSE(g.infeasible);
}

TEST(DualityGap, ConvexBarrierSolution) {
  AllocationProblem p = ab_problem();
  ContinuousSolution sol = solve_relaxed(p);
  GapEstimate g = duality_gap_estimate(p, sol.x_star.counts, sol.multipliers);
  EXPECT_LE(std::abs(g.gap), 1e-4);
}

TEST(DualityGap, InfeasiblePointIsFlaggedNotClamped) {
  AllocationProblem p = ab_problem();
  Multipliers mult = Multipliers::zero(p);
  mult.lambda = vec({1, 1});
  GapEstimate g = duality_gap_estimate(p, vec({1, 0}), mult);
  EXPECT_TRUE(g.infeasible);
  EXPECT_LT(g.gap, 0.0);
  p.params.alpha = 0.1;
  EXPECT_TRUE(duality_gap_estimate(p, vec({4, 0}), mult).nonconvex);
}

}  // namespace
}  // namespace nodemix
