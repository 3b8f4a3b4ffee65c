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

#include "nodemix/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "nodemix/errors.hpp"
#include "test_support.hpp"

namespace nodemix {
namespace {

using testing::vec;

// One type with capacities (1, 1) per unit lets Kx be set directly.
CatalogPtr unit_catalog() {
  return std::make_shared<const InstanceCatalog>(
      testing::cpu_mem_schema(),
      std::vector<InstanceType>{{"azure", "cpu", {1, 0}, 0.01},
                                {"linode", "mem", {0, 1}, 0.02}});
}

TEST(Evaluate, HandExample) {
  EvaluationMetrics m = evaluate(*unit_catalog(), vec({8, 16}), vec({10, 28}));
  EXPECT_NEAR(m.total_cost, 0.10 + 0.56, 1e-12);
  EXPECT_NEAR(*m.per_resource_utilization[0], 0.8, 1e-12);
  EXPECT_NEAR(*m.per_resource_utilization[1], 16.0 / 28.0, 1e-12);
  EXPECT_NEAR(*m.mean_utilization, 0.6857, 1e-4);
  EXPECT_NEAR(*m.per_resource_overprovision_pct[0], 25.0, 1e-12);
  EXPECT_NEAR(*m.per_resource_overprovision_pct[1], 75.0, 1e-12);
  EXPECT_NEAR(*m.mean_overprovision_pct, 50.0, 1e-12);
  EXPECT_FALSE(m.shortage);
  EXPECT_EQ(m.instance_diversity, 2u);
  EXPECT_EQ(m.provider_fragmentation, 2u);
  EXPECT_EQ(m.resources, (std::vector<std::string>{"cpu_cores", "memory_gb"}));
}

TEST(Evaluate, Origin) {
  EvaluationMetrics m = evaluate(*unit_catalog(), vec({0, 0}), vec({0, 0}));
  EXPECT_EQ(m.total_cost, 0.0);
  EXPECT_EQ(m.instance_diversity, 0u);
  EXPECT_EQ(m.provider_fragmentation, 0u);
  EXPECT_EQ(*m.per_resource_utilization[0], 0.0);
  EXPECT_FALSE(m.per_resource_overprovision_pct[0].has_value());
  EXPECT_FALSE(m.mean_overprovision_pct.has_value());
  EXPECT_FALSE(m.shortage);
}

TEST(Evaluate, ShortageIsFlagged) {
  EvaluationMetrics m = evaluate(*unit_catalog(), vec({8, 16}), vec({10, 0}));
  EXPECT_TRUE(m.shortage);
  EXPECT_FALSE(m.per_resource_utilization[1].has_value());
  EXPECT_NEAR(*m.mean_utilization, 0.8, 1e-12);
  EXPECT_NEAR(*m.per_resource_overprovision_pct[1], -100.0, 1e-12);

  EvaluationMetrics partial = evaluate(*unit_catalog(), vec({8, 16}), vec({4, 16}));
  EXPECT_TRUE(partial.shortage);
  EXPECT_EQ(*partial.per_resource_utilization[0], 1.0);  // capped
}

TEST(Evaluate, SingleProvider) {
  EvaluationMetrics m = evaluate(*testing::ab_catalog(), vec({8, 16}), vec({4, 1}));
  EXPECT_EQ(m.provider_fragmentation, 1u);
  EXPECT_EQ(m.instance_diversity, 2u);
}

TEST(Evaluate, DimensionMismatch) {
  EXPECT_THROW(evaluate(*unit_catalog(), vec({8}), vec({1, 1})), DimensionError);
  EXPECT_THROW(evaluate(*unit_catalog(), vec({8, 1}), vec({1})), DimensionError);
}

TEST(Evaluate, ScaleConsistent) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> count(0, 5), dem(1, 20);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto catalog = testing::random_catalog(seed, 4, 3, 2);
    Eigen::VectorXd x(4), d(3);
    for (int i = 0; i < 4; ++i) x(i) = count(gen);
    for (int r = 0; r < 3; ++r) d(r) = dem(gen);
    EvaluationMetrics a = evaluate(*catalog, d, x);
    EvaluationMetrics b = evaluate(*catalog, 2 * d, 2 * x);
    EXPECT_NEAR(b.total_cost, 2 * a.total_cost, 1e-12);
    for (int r = 0; r < 3; ++r) {
      EXPECT_EQ(a.per_resource_utilization[r].has_value(),
                b.per_resource_utilization[r].has_value());
      if (a.per_resource_utilization[r])
        EXPECT_NEAR(*a.per_resource_utilization[r], *b.per_resource_utilization[r], 1e-12);
      EXPECT_NEAR(*a.per_resource_overprovision_pct[r],
                  *b.per_resource_overprovision_pct[r], 1e-9);
    }
    EXPECT_EQ(a.instance_diversity, b.instance_diversity);
    EXPECT_EQ(a.provider_fragmentation, b.provider_fragmentation);
  }
}

TEST(Evaluate, PermutationInvariantCounts) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto catalog = testing::random_catalog(seed, 5, 2, 3);
    std::vector<InstanceType> types = catalog->instances();
    Eigen::VectorXd x = vec({0, 2, 0, 1, 3});
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
    std::vector<InstanceType> shuffled;
    Eigen::VectorXd y(5);
    for (int k = 0; k < 5; ++k) {
      shuffled.push_back(types[perm[k]]);
      y(k) = x(perm[k]);
    }
    InstanceCatalog other(catalog->schema(), shuffled);
    EvaluationMetrics a = evaluate(*catalog, vec({3, 3}), x);
    EvaluationMetrics b = evaluate(other, vec({3, 3}), y);
    EXPECT_EQ(a.instance_diversity, b.instance_diversity);
    EXPECT_EQ(a.provider_fragmentation, b.provider_fragmentation);
    EXPECT_NEAR(a.total_cost, b.total_cost, 1e-12);
  }
}

TEST(Compare, PaperPairs) {
  EvaluationMetrics base, opt;
  base.total_cost = 0.12;
  opt.total_cost = 0.07;
  ComparisonRow row = compare(base, opt);
  EXPECT_NEAR(*row.cost_savings_pct, 41.6667, 1e-4);
  EXPECT_NEAR(row.cost_delta, -0.05, 1e-12);

  base.total_cost = 1.08;
  opt.total_cost = 0.14;
  EXPECT_NEAR(*compare(base, opt).cost_savings_pct, 87.037, 1e-3);
}

TEST(Compare, SelfIsZero) {
  EvaluationMetrics m = evaluate(*unit_catalog(), vec({8, 16}), vec({10, 28}));
  ComparisonRow row = compare(m, m);
  EXPECT_EQ(*row.cost_savings_pct, 0.0);
  EXPECT_EQ(row.cost_delta, 0.0);
  EXPECT_EQ(*row.mean_utilization_delta, 0.0);
  EXPECT_EQ(row.diversity_delta, 0);
  EXPECT_EQ(row.fragmentation_delta, 0);
  EXPECT_EQ(*row.mean_overprovision_delta, 0.0);
}

TEST(Compare, FreeBaselineHasNoSavings) {
  EvaluationMetrics base, opt;
  opt.total_cost = 0.5;
  EXPECT_FALSE(compare(base, opt).cost_savings_pct.has_value());
}

TEST(Radar, ExactMatch) {
  RadarSeries s = radar_data(evaluate(*unit_catalog(), vec({8, 16}), vec({8, 16})));
  ASSERT_EQ(s.points.size(), 2u);
  for (const RadarPoint& p : s.points) {
    EXPECT_EQ(p.normalized_provided, 1.0);
    EXPECT_EQ(p.utilization, 1.0);
  }
  EXPECT_TRUE(s.notes.empty());
}

TEST(Radar, Overprovisioned) {
  RadarSeries s = radar_data(evaluate(*unit_catalog(), vec({8, 16}), vec({10, 28})));
  EXPECT_NEAR(s.points[0].normalized_provided, 1.25, 1e-12);
  EXPECT_NEAR(s.points[1].normalized_provided, 1.75, 1e-12);
  EXPECT_EQ(s.points[1].resource, "memory_gb");
}

TEST(Radar, ZeroDemandOmitted) {
  RadarSeries s = radar_data(evaluate(*unit_catalog(), vec({8, 0}), vec({10, 28})));
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_EQ(s.points[0].resource, "cpu_cores");
  ASSERT_EQ(s.notes.size(), 1u);
  EXPECT_NE(s.notes[0].find("memory_gb"), std::string::npos);
}

}  // namespace
}  // namespace nodemix
