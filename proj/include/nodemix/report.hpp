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

// JSON and CSV renderings of solver, simulator and scenario results.
//
// Every JSON report is an object with a "kind" field and a "metadata" object
// holding the timestamp and wall time. Everything outside "metadata" is a
// pure function of the inputs and the seed, so two runs can be compared
// byte for byte once "metadata" is dropped. The schemas/ directory holds a
// JSON Schema per kind.

#ifndef NODEMIX_REPORT_HPP_
#define NODEMIX_REPORT_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nodemix/barrier.hpp"
#include "nodemix/branch_bound.hpp"
#include "nodemix/ca_sim.hpp"
#include "nodemix/kkt.hpp"
#include "nodemix/metrics.hpp"
#include "nodemix/model.hpp"
#include "nodemix/scenarios.hpp"

namespace nodemix {

inline constexpr const char* kVersion = "0.1.0";

struct ReportMetadata {
  std::string timestamp;  // ISO 8601, UTC
  double elapsed_secs = 0.0;

  // Stamped with the current UTC time.
  static ReportMetadata now(double elapsed_secs);
};

struct SolveReport {
  IntegerSolution integer;
  ContinuousSolution relaxed;
  KktReport kkt;  // raw residuals of the relaxed solution
  GapEstimate gap;
};

// Relaxation, KKT certificate and integer solution for one problem.
SolveReport solve_problem(const AllocationProblem& problem,
                          const BarrierSettings& settings = {}, int starts = 1,
                          std::uint64_t seed = 0, const BnbBudget& budget = {});

std::string solve_report_json(const AllocationProblem& problem,
                              const SolveReport& report,
                              const ReportMetadata& metadata);

// The relaxation and its certificate only; `tolerances` are the pass marks
// for the scaled stationarity, primal violation and complementary slackness.
struct KktTolerances {
  double stationarity = 1e-4;
  double primal = 1e-8;
  double complementary = 1e-4;
};

std::string kkt_report_json(const AllocationProblem& problem,
                            const ContinuousSolution& relaxed,
                            const KktReport& kkt, const GapEstimate& gap,
                            const KktTolerances& tolerances,
                            const ReportMetadata& metadata);

std::string ca_report_json(const InstanceCatalog& catalog,
                           const Eigen::VectorXd& demand, const CaResult& result,
                           const Expander& expander,
                           const ReportMetadata& metadata);

std::string comparison_report_json(const InstanceCatalog& catalog,
                                   const ComparisonReport& report,
                                   const ReportMetadata& metadata);

// Two rows per report: the autoscaler baseline, then the optimizer.
std::string summary_csv(const std::vector<ComparisonReport>& reports);

// Radar-chart series per report and strategy.
std::string radar_csv(const std::vector<ComparisonReport>& reports);

std::string grid_csv(const std::vector<GridRow>& rows);
// `kind` is "sweep" or "pareto"; `objectives` is empty for a sweep.
std::string grid_json(std::string_view kind, std::string_view scenario,
                      const std::vector<GridRow>& rows,
                      const std::vector<std::string>& objectives,
                      const ReportMetadata& metadata);

std::string sensitivity_csv(const std::vector<SensitivityRow>& rows);
std::string sensitivity_json(std::string_view scenario,
                             const std::vector<SensitivityRow>& rows,
                             double perturbation,
                             const ReportMetadata& metadata);

// Drops the top-level "metadata" field and re-serializes; used to compare
// reports across runs.
std::string strip_metadata(std::string_view report_json);

}  // namespace nodemix

#endif  // NODEMIX_REPORT_HPP_
