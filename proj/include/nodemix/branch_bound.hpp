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

// Integer allocations.
//
// solve_integer() is a best-first branch and bound. Each node is a box
// lower <= x <= upper (plus optional bounds on the per-provider totals
// z_j = (Ex)_j). The node bound minimizes a convex underestimator of f over
// the box: the concave consolidation term is replaced by its chord over the
// range of z_j the node allows. Because the barrier iterate is only nearly
// optimal, the bound is taken from the Lagrangian at that iterate, which is
// valid for any strictly feasible point.
//
// Branching prefers the provider total with the largest chord error (its
// range is split at the relaxed z_j), then the most fractional x_i.

#ifndef NODEMIX_BRANCH_BOUND_HPP_
#define NODEMIX_BRANCH_BOUND_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nodemix/barrier.hpp"
#include "nodemix/model.hpp"

namespace nodemix {

enum class IntegerMethod { kBranchAndBound, kRounding };

const char* to_string(IntegerMethod method);

struct IntegerSolution {
  Allocation x_hat;
  ObjectiveBreakdown breakdown;
  // Incumbent minus the smallest open-node bound; 0 once the tree is
  // exhausted. Empty for rounding results, which carry no bound.
  std::optional<double> bound_gap;
  std::size_t nodes_explored = 0;
  IntegerMethod method = IntegerMethod::kBranchAndBound;
  bool completed = false;  // tree exhausted within budget
  // Largest violation of d - mu <= Kx <= d + g and the deviation budget at
  // x_hat (0 when feasible). Rounding may overshoot the waste cap.
  double max_violation = 0.0;
  std::vector<double> incumbent_trace;  // objective at each improvement
};

struct BnbBudget {
  std::size_t node_limit = 2000;
  double time_limit_secs = 10.0;
};

// Throws InfeasibleError when no integer point satisfies the constraints.
// When the budget runs out before any incumbent is found, falls back to
// greedy_round() of the root relaxation (method = kRounding).
IntegerSolution solve_integer(const AllocationProblem& problem,
                              const BarrierSettings& settings = {},
                              const BnbBudget& budget = {});

// x = floor(x_relaxed) clamped to the bounds, then repeatedly increment the
// type with the largest sum_{r: delta_r > 0} K[r][i] delta_r / c_i until
// Kx >= d. Types at their upper bound are skipped; zero-cost types that cover
// a deficit rank first. Throws InfeasibleError("uncoverable resource ...")
// when a deficit cannot be reduced by any type.
IntegerSolution greedy_round(const AllocationProblem& problem,
                             const Allocation& x_relaxed);

// Copy of `problem` with the box intersected with [x_current - delta,
// x_current + delta]; the l1 budget itself stays on the problem and is
// enforced by both solvers. Requires current and max_deviation.
AllocationProblem apply_incremental(const AllocationProblem& problem);

// Bound of the root node over an arbitrary box, or empty when the box
// provably holds no feasible point. Exposed for testing.
std::optional<double> node_lower_bound(const AllocationProblem& problem,
                                       const Eigen::VectorXd& lower,
                                       const Eigen::VectorXd& upper,
                                       const BarrierSettings& settings = {});

}  // namespace nodemix

#endif  // NODEMIX_BRANCH_BOUND_HPP_
