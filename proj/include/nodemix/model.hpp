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

// The allocation problem and its objective
//
//   f(x) = c'x + alpha * sum_j (1 - exp(-beta1 (Ex)_j))
//              - gamma * sum_j log(1 + beta2 (Ex)_j)
//              + beta3 * sum_r max(0, d_r - (Kx)_r)^2
//
// subject to d - mu <= Kx <= d + g, lower <= x <= upper and, when configured,
// ||x - x_current||_1 <= max_deviation.
//
// The consolidation term is concave in Ex, so f is a difference of convex
// functions whenever alpha > 0. Nothing here assumes convexity.

#ifndef NODEMIX_MODEL_HPP_
#define NODEMIX_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nodemix/catalog.hpp"

namespace nodemix {

struct PenaltyParams {
  double alpha = 0.05;  // provider consolidation weight
  double beta1 = 1.0;   // consolidation sharpness
  double beta2 = 0.1;   // volume discount curvature
  double beta3 = 10.0;  // shortage weight
  double gamma = 0.01;  // volume discount weight

  // beta1, beta2 > 0; alpha, beta3, gamma >= 0.
  void validate() const;

  bool operator==(const PenaltyParams&) const = default;
};

// Instance counts, continuous or integral.
struct Allocation {
  Eigen::VectorXd counts;
  bool integral = false;

  static Allocation continuous(Eigen::VectorXd counts);
  // Throws ValidationError unless every entry is a nonnegative whole number.
  static Allocation integer(Eigen::VectorXd counts);
};

struct AllocationProblem {
  CatalogPtr catalog;
  Eigen::VectorXd demand;       // d, length m
  Eigen::VectorXd uncertainty;  // mu, length m
  Eigen::VectorXd waste;        // g, length m
  PenaltyParams params;
  std::optional<Eigen::VectorXd> current;  // x_current
  std::optional<double> max_deviation;     // delta_max; requires current
  // Per-type count floor, e.g. pre-existing nodes that must be kept.
  std::optional<Eigen::VectorXd> lower_bounds;
  // Per-type count caps; intersected with default_upper_bounds(). A cap of 0
  // excludes the type.
  std::optional<Eigen::VectorXd> upper_bounds;

  std::size_t num_resources() const { return catalog->num_resources(); }
  std::size_t num_instances() const { return catalog->num_instances(); }
  std::size_t num_providers() const { return catalog->num_providers(); }

  const Eigen::MatrixXd& composition() const { return catalog->composition(); }
  const Eigen::MatrixXd& selector() const { return catalog->selector(); }
  const Eigen::VectorXd& costs() const { return catalog->costs(); }

  // Throws ValidationError / DimensionError on broken invariants.
  void validate() const;

  Eigen::VectorXd effective_lower_bounds() const;
  Eigen::VectorXd effective_upper_bounds() const;
};

// Hard cap on any per-type default bound.
inline constexpr double kMaxCountPerType = 512.0;

// mu = 0 and g = 0.25 d.
AllocationProblem make_problem(CatalogPtr catalog, Eigen::VectorXd demand,
                               PenaltyParams params = {});

// ceil(max_r (d_r + g_r) / K[r][i]) over r with K[r][i] > 0, capped at
// kMaxCountPerType.
Eigen::VectorXd default_upper_bounds(const AllocationProblem& problem);

struct ObjectiveBreakdown {
  double base_cost = 0.0;
  double consolidation_penalty = 0.0;
  double volume_discount = 0.0;  // signed, <= 0
  double shortage_penalty = 0.0;
  double total = 0.0;
};

ObjectiveBreakdown objective(const AllocationProblem& problem,
                             const Eigen::VectorXd& x);
inline ObjectiveBreakdown objective(const AllocationProblem& problem,
                                    const Allocation& x) {
  return objective(problem, x.counts);
}

// Gradient of f (without multiplier terms). At ties d_r == (Kx)_r the
// shortage indicator is 0, so this is the one-sided derivative from the
// covered side.
Eigen::VectorXd gradient(const AllocationProblem& problem,
                         const Eigen::VectorXd& x);

// Hessian of f using the generalized Hessian 2 beta3 K' diag(s) K for the
// shortage hinge. With `convex_part_only`, the (negative semidefinite)
// consolidation curvature is dropped, which leaves a PSD matrix.
Eigen::MatrixXd hessian(const AllocationProblem& problem,
                        const Eigen::VectorXd& x,
                        bool convex_part_only = false);

// s_r = 1 iff d_r > (Kx)_r.
Eigen::VectorXd shortage_indicator(const AllocationProblem& problem,
                                   const Eigen::VectorXd& x);

struct ConstraintResiduals {
  Eigen::VectorXd lower;  // Kx - (d - mu), feasible iff >= 0
  Eigen::VectorXd upper;  // (d + g) - Kx, feasible iff >= 0
  std::optional<double> deviation;  // delta_max - ||x - x_current||_1

  // Largest violation across the three families (0 when feasible).
  double max_violation() const;
};

ConstraintResiduals constraint_residuals(const AllocationProblem& problem,
                                         const Eigen::VectorXd& x);

}  // namespace nodemix

#endif  // NODEMIX_MODEL_HPP_
