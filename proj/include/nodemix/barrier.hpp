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

// Continuous relaxation solver.
//
// solve_relaxed() minimizes f over the relaxed feasible set with a log-barrier
// method: for an increasing sequence of t it minimizes t f(x) - sum log(slack)
// by damped Newton steps with backtracking (Armijo) line search. Every
// iterate is strictly feasible. When the Hessian of f is indefinite (alpha > 0
// makes the consolidation term concave) the step falls back to the convex
// part of the Hessian, which keeps the direction a descent direction.
//
// Variables fixed by their bounds (lower == upper) are eliminated before the
// barrier starts. The l1 deviation constraint is carried as an epigraph:
// |x_i - x_current_i| <= e_i, sum e_i <= max_deviation.

#ifndef NODEMIX_BARRIER_HPP_
#define NODEMIX_BARRIER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nodemix/kkt.hpp"
#include "nodemix/model.hpp"

namespace nodemix {

struct BarrierSettings {
  double t_initial = 1.0;
  double t_growth = 10.0;
  double inner_tolerance = 1e-8;  // on ||grad||_inf / t, i.e. stationarity
  double outer_tolerance = 1e-6;  // on the barrier gap m_ineq / t
  int max_inner_iters = 200;
  int max_outer_iters = 12;
  double armijo_c = 0.01;
  double backtrack_factor = 0.5;

  void validate() const;
};

enum class SolveMode {
  kBarrier,  // all constraints enforced through the barrier
  kPenalty,  // Kx <= d + g moved into the objective (empty strict interior)
};

const char* to_string(SolveMode mode);

struct IterationCounts {
  int phase_one = 0;
  int inner = 0;
  int outer = 0;
  int convexified_steps = 0;  // Newton steps that used the convex Hessian part
};

struct ContinuousSolution {
  Allocation x_star;
  ObjectiveBreakdown breakdown;
  Multipliers multipliers;
  IterationCounts iterations;
  bool converged = false;
  SolveMode mode = SolveMode::kBarrier;
  double t_final = 0.0;
  double barrier_gap = 0.0;  // m_ineq / t_final
  // Objective after every accepted Newton step; in penalty mode this
  // includes the waste penalty.
  std::vector<double> trace;
};

struct PhaseOneResult {
  Allocation x;
  bool strictly_feasible = false;
  // Minimized maximum constraint violation (rows normalized by their largest
  // coefficient). Negative when strictly feasible.
  double max_violation = 0.0;
  // Lower bound on the true minimum of the max violation; > 0 proves
  // infeasibility.
  double violation_lower_bound = 0.0;
  std::string most_violated;  // human-readable constraint name
  int iterations = 0;
};

// Strictly feasible start for the barrier, or infeasibility evidence.
PhaseOneResult phase_one(const AllocationProblem& problem,
                         const BarrierSettings& settings = {});

// Throws InfeasibleError when no feasible point exists. Falls back to
// SolveMode::kPenalty when the feasible set has an empty interior.
ContinuousSolution solve_relaxed(const AllocationProblem& problem,
                                 const BarrierSettings& settings = {},
                                 const std::optional<Allocation>& x0 = {});

// Runs solve_relaxed from `starts` seeded strictly feasible points (start 0 is
// the phase-one point) and keeps the lowest objective; earlier starts win
// ties. Non-converged runs are only used when no run converged.
ContinuousSolution multi_start(const AllocationProblem& problem,
                               const BarrierSettings& settings, int starts,
                               std::uint64_t seed);

}  // namespace nodemix

#endif  // NODEMIX_BARRIER_HPP_
