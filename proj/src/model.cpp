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

#include "nodemix/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nodemix/errors.hpp"

namespace nodemix {
namespace {

void check_length(const Eigen::VectorXd& v, std::size_t expected,
                  const char* what) {
  if (static_cast<std::size_t>(v.size()) != expected) {
    throw DimensionError(std::string(what) + ": expected length " +
                         std::to_string(expected) + ", got " +
                         std::to_string(v.size()));
  }
}

void check_nonnegative(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v(k)) || v(k) < 0.0)
      throw ValidationError(std::string(what) + " must be finite and >= 0");
  }
}

}  // namespace

void PenaltyParams::validate() const {
  if (!(beta1 > 0.0) || !(beta2 > 0.0))
    throw ValidationError("beta1 and beta2 must be > 0");
  if (!(alpha >= 0.0) || !(beta3 >= 0.0) || !(gamma >= 0.0))
    throw ValidationError("alpha, beta3 and gamma must be >= 0");
  if (!std::isfinite(alpha) || !std::isfinite(beta1) || !std::isfinite(beta2) ||
      !std::isfinite(beta3) || !std::isfinite(gamma))
    throw ValidationError("penalty parameters must be finite");
}

Allocation Allocation::continuous(Eigen::VectorXd counts) {
  return Allocation{std::move(counts), false};
}

Allocation Allocation::integer(Eigen::VectorXd counts) {
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts(i) < 0.0 || counts(i) != std::floor(counts(i)))
      throw ValidationError("integral allocation needs whole nonnegative counts");
  }
  return Allocation{std::move(counts), true};
}

void AllocationProblem::validate() const {
  if (!catalog) throw ValidationError("problem has no catalog");
  params.validate();
  const std::size_t m = num_resources();
  const std::size_t n = num_instances();
  check_length(demand, m, "demand");
  check_length(uncertainty, m, "uncertainty");
  check_length(waste, m, "waste");
  check_nonnegative(demand, "demand");
  check_nonnegative(uncertainty, "uncertainty");
  check_nonnegative(waste, "waste");
  if (current) {
    check_length(*current, n, "current allocation");
    check_nonnegative(*current, "current allocation");
  }
  if (max_deviation) {
    if (!current)
      throw ValidationError("max_deviation requires a current allocation");
    if (!std::isfinite(*max_deviation) || *max_deviation < 0.0)
      throw ValidationError("max_deviation must be >= 0");
  }
  if (lower_bounds) {
    check_length(*lower_bounds, n, "lower bounds");
    check_nonnegative(*lower_bounds, "lower bounds");
  }
  if (upper_bounds) {
    check_length(*upper_bounds, n, "upper bounds");
    check_nonnegative(*upper_bounds, "upper bounds");
  }
}

Eigen::VectorXd AllocationProblem::effective_lower_bounds() const {
  if (lower_bounds) return *lower_bounds;
  return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_instances()));
}

Eigen::VectorXd AllocationProblem::effective_upper_bounds() const {
  // Pre-existing nodes never make the default cap infeasible.
  Eigen::VectorXd ub = default_upper_bounds(*this);
  if (lower_bounds) ub = ub.cwiseMax(*lower_bounds);
  if (upper_bounds) ub = ub.cwiseMin(*upper_bounds);
  return ub;
}

AllocationProblem make_problem(CatalogPtr catalog, Eigen::VectorXd demand,
                               PenaltyParams params) {
  AllocationProblem problem;
  const auto m = static_cast<Eigen::Index>(catalog->num_resources());
  problem.catalog = std::move(catalog);
  problem.uncertainty = Eigen::VectorXd::Zero(m);
  problem.waste = 0.25 * demand;
  problem.demand = std::move(demand);
  problem.params = params;
  problem.validate();
  return problem;
}

Eigen::VectorXd default_upper_bounds(const AllocationProblem& problem) {
  const Eigen::MatrixXd& K = problem.composition();
  Eigen::VectorXd ub(K.cols());
  for (Eigen::Index i = 0; i < K.cols(); ++i) {
    double bound = 0.0;
    for (Eigen::Index r = 0; r < K.rows(); ++r) {
      if (K(r, i) > 0.0)
        bound = std::max(bound, (problem.demand(r) + problem.waste(r)) / K(r, i));
    }
    ub(i) = std::min(kMaxCountPerType, std::ceil(bound));
  }
  return ub;
}

ObjectiveBreakdown objective(const AllocationProblem& problem,
                             const Eigen::VectorXd& x) {
  check_length(x, problem.num_instances(), "allocation");
  const PenaltyParams& pp = problem.params;
  const Eigen::VectorXd z = problem.selector() * x;
  const Eigen::VectorXd kx = problem.composition() * x;

  ObjectiveBreakdown out;
  out.base_cost = problem.costs().dot(x);
  double consolidation = 0.0;
  double discount = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    consolidation += -std::expm1(-pp.beta1 * z(j));
    discount += std::log1p(pp.beta2 * z(j));
  }
  out.consolidation_penalty = pp.alpha * consolidation;
  out.volume_discount = -pp.gamma * discount;
  double shortage = 0.0;
  for (Eigen::Index r = 0; r < kx.size(); ++r) {
    double gap = std::max(0.0, problem.demand(r) - kx(r));
    shortage += gap * gap;
  }
  out.shortage_penalty = pp.beta3 * shortage;
  out.total = out.base_cost + out.consolidation_penalty + out.volume_discount +
              out.shortage_penalty;
  return out;
}

Eigen::VectorXd shortage_indicator(const AllocationProblem& problem,
                                   const Eigen::VectorXd& x) {
  check_length(x, problem.num_instances(), "allocation");
  const Eigen::VectorXd kx = problem.composition() * x;
  Eigen::VectorXd s(kx.size());
  for (Eigen::Index r = 0; r < kx.size(); ++r)
    s(r) = problem.demand(r) > kx(r) ? 1.0 : 0.0;
  return s;
}

Eigen::VectorXd gradient(const AllocationProblem& problem,
                         const Eigen::VectorXd& x) {
  check_length(x, problem.num_instances(), "allocation");
  const PenaltyParams& pp = problem.params;
  const Eigen::MatrixXd& K = problem.composition();
  const Eigen::MatrixXd& E = problem.selector();
  const Eigen::VectorXd z = E * x;
  const Eigen::VectorXd kx = K * x;

  Eigen::VectorXd per_provider(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    per_provider(j) = pp.alpha * pp.beta1 * std::exp(-pp.beta1 * z(j)) -
                      pp.gamma * pp.beta2 / (1.0 + pp.beta2 * z(j));
  }
  Eigen::VectorXd shortfall(kx.size());
  for (Eigen::Index r = 0; r < kx.size(); ++r) {
    shortfall(r) = problem.demand(r) > kx(r) ? problem.demand(r) - kx(r) : 0.0;
  }
  return problem.costs() + E.transpose() * per_provider -
         2.0 * pp.beta3 * (K.transpose() * shortfall);
}

Eigen::MatrixXd hessian(const AllocationProblem& problem,
                        const Eigen::VectorXd& x, bool convex_part_only) {
  check_length(x, problem.num_instances(), "allocation");
  const PenaltyParams& pp = problem.params;
  const Eigen::MatrixXd& K = problem.composition();
  const Eigen::MatrixXd& E = problem.selector();
  const Eigen::VectorXd z = E * x;
  const Eigen::VectorXd s = shortage_indicator(problem, x);

  Eigen::VectorXd provider_curv(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    double denom = 1.0 + pp.beta2 * z(j);
    double curv = pp.gamma * pp.beta2 * pp.beta2 / (denom * denom);
    if (!convex_part_only)
      curv -= pp.alpha * pp.beta1 * pp.beta1 * std::exp(-pp.beta1 * z(j));
    provider_curv(j) = curv;
  }
  return E.transpose() * provider_curv.asDiagonal() * E +
         2.0 * pp.beta3 * K.transpose() * s.asDiagonal() * K;
}

double ConstraintResiduals::max_violation() const {
  double v = 0.0;
  if (lower.size() > 0) v = std::max(v, -lower.minCoeff());
  if (upper.size() > 0) v = std::max(v, -upper.minCoeff());
  if (deviation) v = std::max(v, -*deviation);
  return v;
}

ConstraintResiduals constraint_residuals(const AllocationProblem& problem,
                                         const Eigen::VectorXd& x) {
  check_length(x, problem.num_instances(), "allocation");
  const Eigen::VectorXd kx = problem.composition() * x;
  ConstraintResiduals out;
  out.lower = kx - (problem.demand - problem.uncertainty);
  out.upper = (problem.demand + problem.waste) - kx;
  if (problem.max_deviation && problem.current) {
    out.deviation = *problem.max_deviation - (x - *problem.current).lpNorm<1>();
  }
  return out;
}

}  // namespace nodemix
