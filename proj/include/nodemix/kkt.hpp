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

#ifndef NODEMIX_KKT_HPP_
#define NODEMIX_KKT_HPP_

#include <cstddef>

#include <Eigen/Dense>

#include "nodemix/model.hpp"

namespace nodemix {

// Multipliers for
//   lambda: Kx >= d - mu          nu: Kx <= d + g
//   omega:  x >= lower            upper: x <= upper bound
//   trust_radius: ||x - x_current||_1 <= max_deviation, with `trust` holding
//   the matching subgradient term (trust_radius * sign(x - x_current)).
// With default bounds and no deviation constraint only lambda, nu and omega
// are nonzero and the conditions reduce to the textbook ones for x >= 0.
struct Multipliers {
  Eigen::VectorXd lambda;
  Eigen::VectorXd nu;
  Eigen::VectorXd omega;
  Eigen::VectorXd upper;
  Eigen::VectorXd trust;
  double trust_radius = 0.0;

  static Multipliers zero(std::size_t m, std::size_t n);
  static Multipliers zero(const AllocationProblem& problem) {
    return zero(problem.num_resources(), problem.num_instances());
  }
};

struct KktReport {
  // Raw residuals; scaled() divides them by `scale`.
  double stationarity_norm = 0.0;
  double primal_violation = 0.0;
  double dual_violation = 0.0;
  double comp_slack_max = 0.0;
  double lagrangian_value = 0.0;
  double scale = 1.0;  // max(1, ||c||_inf, ||d||_inf)
  // Resources with d_r == (Kx)_r (to 1e-9 relative). At such points the
  // stationarity residual is taken over both one-sided shortage derivatives
  // and `stationarity_interval_gap` is the distance from 0 to that interval.
  std::size_t tie_count = 0;
  double stationarity_interval_gap = 0.0;

  // Residuals relative to the problem's magnitude.
  KktReport scaled() const;
};

// f(x) + lambda'(d - mu - Kx) + nu'(Kx - d - g) - omega'(x - lower)
//      + upper'(x - ub) + trust_radius (||x - x_current||_1 - delta_max)
double lagrangian(const AllocationProblem& problem, const Eigen::VectorXd& x,
                  const Multipliers& mult);

// Same value, assembled in the rearranged form with x collected against
// (c - K'lambda + K'nu - omega + upper). Used as a cross-check.
double lagrangian_rearranged(const AllocationProblem& problem,
                             const Eigen::VectorXd& x, const Multipliers& mult);

// Gradient of the Lagrangian in x.
Eigen::VectorXd lagrangian_gradient(const AllocationProblem& problem,
                                    const Eigen::VectorXd& x,
                                    const Multipliers& mult);

KktReport kkt_report(const AllocationProblem& problem, const Eigen::VectorXd& x,
                     const Multipliers& mult);

struct GapEstimate {
  double gap = 0.0;        // f(x) - L(x, mult); never clamped
  bool nonconvex = false;  // alpha > 0
  bool infeasible = false; // x violates a primal constraint
};

GapEstimate duality_gap_estimate(const AllocationProblem& problem,
                                 const Eigen::VectorXd& x,
                                 const Multipliers& mult);

}  // namespace nodemix

#endif  // NODEMIX_KKT_HPP_
