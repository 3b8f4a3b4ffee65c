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

// Evaluation scenarios and the optimizer-versus-autoscaler pipeline.

#ifndef NODEMIX_SCENARIOS_HPP_
#define NODEMIX_SCENARIOS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nodemix/barrier.hpp"
#include "nodemix/branch_bound.hpp"
#include "nodemix/ca_sim.hpp"
#include "nodemix/catalog.hpp"
#include "nodemix/kkt.hpp"
#include "nodemix/metrics.hpp"
#include "nodemix/model.hpp"

namespace nodemix {

// Admits instance types whose capacity on `resource` is at most `max_value`.
struct InstanceFilter {
  std::string resource;
  double max_value = 0.0;

  bool admits(const InstanceCatalog& catalog, std::size_t instance) const;
};

// Which instance types the optimizer may use.
enum class OptimizerScope {
  kCatalog,  // every type that passes the filter
  kPools,    // only the autoscaler's pool types
};

const char* to_string(OptimizerScope scope);

struct Scenario {
  std::string name;
  std::string description;
  Eigen::VectorXd demand;
  double waste_fraction = 0.5;  // g = waste_fraction * d
  std::vector<NodePool> pools;
  std::optional<Eigen::VectorXd> existing;  // nodes already running
  std::optional<InstanceFilter> filter;
  OptimizerScope scope = OptimizerScope::kCatalog;
  std::optional<double> max_deviation;  // around `existing`
  std::size_t repetitions = 5;

  // Throws ValidationError / DimensionError against `catalog`.
  void validate(const InstanceCatalog& catalog) const;
};

// S1..S5. `small_per_provider` (1 or 2) sets how many small nodes S2 starts
// with. Throws ValidationError when the catalog has no type for a pool or
// pre-existing role.
std::vector<Scenario> builtin_scenarios(const CatalogPtr& catalog,
                                        int small_per_provider = 1);

// The optimizer's problem for a scenario: waste cap, filter and scope as
// upper bounds of 0, existing nodes as lower bounds and, with a deviation
// budget, as the current allocation.
AllocationProblem scenario_problem(const Scenario& scenario,
                                   const CatalogPtr& catalog,
                                   const PenaltyParams& params);

Scenario parse_scenario(std::string_view text, const InstanceCatalog& catalog);
Scenario load_scenario(const std::filesystem::path& path,
                       const InstanceCatalog& catalog);
std::string serialize_scenario(const Scenario& scenario,
                               const InstanceCatalog& catalog);

struct RunOptions {
  BarrierSettings barrier;
  int starts = 1;  // multi-start count for the relaxation
  BnbBudget budget;
  Expander expander;
  double utilization_threshold = 0.5;
};

struct ComparisonReport {
  std::string scenario;
  Eigen::VectorXd demand;
  std::uint64_t seed = 0;
  std::size_t repetitions = 1;
  std::size_t median_repetition = 0;  // index of the reported repetition
  bool median_of_repetitions = false;

  CaResult baseline_run;
  EvaluationMetrics baseline;

  ContinuousSolution relaxed;
  KktReport relaxed_kkt;  // scaled residuals
  IntegerSolution integer;
  EvaluationMetrics optimized;

  ComparisonRow comparison;

  double elapsed_secs = 0.0;  // wall time of all repetitions; metadata only
};

// Each repetition r uses seed + r for the random expander and the
// multi-start points. The reported repetition is the lower median by
// optimized cost (ties: baseline cost, then repetition index).
ComparisonReport run_comparison(const Scenario& scenario,
                                const CatalogPtr& catalog,
                                const PenaltyParams& params,
                                std::uint64_t seed,
                                const RunOptions& options = {});

struct ParameterGrid {
  std::vector<double> alpha{PenaltyParams{}.alpha};
  std::vector<double> beta1{PenaltyParams{}.beta1};
  std::vector<double> beta2{PenaltyParams{}.beta2};
  std::vector<double> beta3{PenaltyParams{}.beta3};
  std::vector<double> gamma{PenaltyParams{}.gamma};
};

struct GridRow {
  PenaltyParams params;
  bool feasible = false;
  std::string error;  // set when infeasible
  EvaluationMetrics baseline;
  EvaluationMetrics optimized;
  double objective = 0.0;  // optimizer's f at its allocation
};

// Cartesian product in alpha-major order; each cell is one repetition of
// run_comparison. Infeasible cells are recorded and the sweep continues.
std::vector<GridRow> grid_search(const Scenario& scenario,
                                 const CatalogPtr& catalog,
                                 const ParameterGrid& grid, std::uint64_t seed,
                                 const RunOptions& options = {});

// Metric names for the frontier: cost, fragmentation, diversity,
// overprovision (all minimized) and utilization (maximized).
double metric_value(const EvaluationMetrics& metrics, std::string_view name);

// Feasible rows not dominated under the two metrics, stably sorted by the
// first.
std::vector<GridRow> pareto_frontier(const std::vector<GridRow>& rows,
                                     std::string_view first,
                                     std::string_view second);

struct SensitivityRow {
  std::string parameter;
  double value = 0.0;
  double cost = 0.0;
  double cost_minus = 0.0;
  double cost_plus = 0.0;
  // (dcost / cost) / (dtheta / theta) from the central difference; when
  // theta = 0 the step is +perturbation (absolute) and the value is
  // (dcost / cost) / dtheta.
  double elasticity = 0.0;
  bool one_sided = false;
  std::string note;
};

// Requires 0 < perturbation < 1.
std::vector<SensitivityRow> sensitivity(const Scenario& scenario,
                                        const CatalogPtr& catalog,
                                        const PenaltyParams& params,
                                        double perturbation, std::uint64_t seed,
                                        const RunOptions& options = {});

}  // namespace nodemix

#endif  // NODEMIX_SCENARIOS_HPP_
