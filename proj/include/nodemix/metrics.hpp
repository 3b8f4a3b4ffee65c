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

#ifndef NODEMIX_METRICS_HPP_
#define NODEMIX_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nodemix/catalog.hpp"
#include "nodemix/model.hpp"

namespace nodemix {

// Per-resource entries are empty where the ratio is undefined: utilization
// when nothing is provided but something is demanded, over-provisioning
// when nothing is demanded.
struct EvaluationMetrics {
  std::vector<std::string> resources;
  Eigen::VectorXd demand;
  Eigen::VectorXd provided;  // Kx
  double total_cost = 0.0;   // c'x
  std::vector<std::optional<double>> per_resource_utilization;  // capped at 1
  std::optional<double> mean_utilization;  // over defined entries
  bool shortage = false;                   // some (Kx)_r < d_r
  std::size_t instance_diversity = 0;      // |{i : x_i > 0}|
  std::size_t provider_fragmentation = 0;  // |{j : (Ex)_j > 0}|
  std::vector<std::optional<double>> per_resource_overprovision_pct;
  std::optional<double> mean_overprovision_pct;
};

EvaluationMetrics evaluate(const InstanceCatalog& catalog,
                           const Eigen::VectorXd& demand,
                           const Eigen::VectorXd& x);

inline EvaluationMetrics evaluate(const AllocationProblem& problem,
                                  const Allocation& x) {
  return evaluate(*problem.catalog, problem.demand, x.counts);
}

// Deltas are optimized minus baseline.
struct ComparisonRow {
  std::optional<double> cost_savings_pct;  // empty when the baseline is free
  double cost_delta = 0.0;
  std::optional<double> mean_utilization_delta;
  long long diversity_delta = 0;
  long long fragmentation_delta = 0;
  std::optional<double> mean_overprovision_delta;
};

ComparisonRow compare(const EvaluationMetrics& baseline,
                      const EvaluationMetrics& optimized);

struct RadarPoint {
  std::string resource;
  double demand = 0.0;
  double provided = 0.0;
  double utilization = 0.0;           // demand / provided, capped at 1
  double normalized_provided = 0.0;   // provided / demand
};

struct RadarSeries {
  std::vector<RadarPoint> points;
  std::vector<std::string> notes;  // resources left out, with the reason
};

RadarSeries radar_data(const EvaluationMetrics& metrics);

}  // namespace nodemix

#endif  // NODEMIX_METRICS_HPP_
