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

#include <algorithm>
#include <cmath>

#include "nodemix/errors.hpp"

namespace nodemix {
namespace {

void check_dims(const AllocationProblem& problem, const Eigen::VectorXd& x,
                const Multipliers& mult) {
  const auto m = static_cast<Eigen::Index>(problem.num_resources());
  const auto n = static_cast<Eigen::Index>(problem.num_instances());
  if (x.size() != n || mult.lambda.size() != m || mult.nu.size() != m ||
      mult.omega.size() != n || mult.upper.size() != n ||
      mult.trust.size() != n) {
    throw DimensionError("multiplier or allocation length mismatch");
  }
}

double residual_scale(const AllocationProblem& problem) {
  double scale = 1.0;
  if (problem.costs().size() > 0)
    scale = std::max(scale, problem.costs().cwiseAbs().maxCoeff());
  if (problem.demand.size() > 0)
    scale = std::max(scale, problem.demand.cwiseAbs().maxCoeff());
  return scale;
}

double deviation_excess(const AllocationProblem& problem,
                        const Eigen::VectorXd& x) {
  if (!problem.max_deviation || !problem.current) return 0.0;
  return (x - *problem.current).lpNorm<1>() - *problem.max_deviation;
}

}  // namespace

Multipliers Multipliers::zero(std::size_t m, std::size_t n) {
  const auto mm = static_cast<Eigen::Index>(m);
  const auto nn = static_cast<Eigen::Index>(n);
  return Multipliers{Eigen::VectorXd::Zero(mm), Eigen::VectorXd::Zero(mm),
                     Eigen::VectorXd::Zero(nn), Eigen::VectorXd::Zero(nn),
                     Eigen::VectorXd::Zero(nn), 0.0};
}

KktReport KktReport::scaled() const {
  KktReport out = *this;
  out.stationarity_norm /= scale;
  out.primal_violation /= scale;
  out.dual_violation /= scale;
  out.comp_slack_max /= scale;
  out.stationarity_interval_gap /= scale;
  out.scale = 1.0;
  return out;
}

double lagrangian(const AllocationProblem& problem, const Eigen::VectorXd& x,
                  const Multipliers& mult) {
  check_dims(problem, x, mult);
  const Eigen::VectorXd kx = problem.composition() * x;
  const Eigen::VectorXd& d = problem.demand;
  double value = objective(problem, x).total;
  value += mult.lambda.dot(d - problem.uncertainty - kx);
  value += mult.nu.dot(kx - d - problem.waste);
  value -= mult.omega.dot(x - problem.effective_lower_bounds());
  value += mult.upper.dot(x - problem.effective_upper_bounds());
  value += mult.trust_radius * deviation_excess(problem, x);
  return value;
}

double lagrangian_rearranged(const AllocationProblem& problem,
                             const Eigen::VectorXd& x,
                             const Multipliers& mult) {
  check_dims(problem, x, mult);
  const PenaltyParams& pp = problem.params;
  const Eigen::MatrixXd& K = problem.composition();
  const Eigen::VectorXd& d = problem.demand;
  const Eigen::VectorXd z = problem.selector() * x;
  const Eigen::VectorXd kx = K * x;

  double value = pp.alpha * static_cast<double>(problem.num_providers());
  value += mult.lambda.dot(d - problem.uncertainty);
  value -= mult.nu.dot(d + problem.waste);
  value += x.dot(problem.costs() - K.transpose() * mult.lambda +
                 K.transpose() * mult.nu - mult.omega + mult.upper);
  double exp_sum = 0.0;
  double log_sum = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    exp_sum += std::exp(-pp.beta1 * z(j));
    log_sum += std::log1p(pp.beta2 * z(j));
  }
  value -= pp.alpha * exp_sum;
  value -= pp.gamma * log_sum;
  double shortage = 0.0;
  for (Eigen::Index r = 0; r < kx.size(); ++r) {
    double gap = std::max(0.0, d(r) - kx(r));
    shortage += gap * gap;
  }
  value += pp.beta3 * shortage;
  value += mult.omega.dot(problem.effective_lower_bounds());
  value -= mult.upper.dot(problem.effective_upper_bounds());
  value += mult.trust_radius * deviation_excess(problem, x);
  return value;
}

Eigen::VectorXd lagrangian_gradient(const AllocationProblem& problem,
                                    const Eigen::VectorXd& x,
                                    const Multipliers& mult) {
  check_dims(problem, x, mult);
  const Eigen::MatrixXd& K = problem.composition();
  return gradient(problem, x) - K.transpose() * mult.lambda +
         K.transpose() * mult.nu - mult.omega + mult.upper + mult.trust;
}

KktReport kkt_report(const AllocationProblem& problem, const Eigen::VectorXd& x,
                     const Multipliers& mult) {
  check_dims(problem, x, mult);
  const Eigen::MatrixXd& K = problem.composition();
  const Eigen::VectorXd& d = problem.demand;
  const Eigen::VectorXd kx = K * x;
  const Eigen::VectorXd lower = problem.effective_lower_bounds();
  const Eigen::VectorXd upper = problem.effective_upper_bounds();

  KktReport rep;
  rep.scale = residual_scale(problem);
  rep.lagrangian_value = lagrangian(problem, x, mult);

  // Stationarity, with the shortage hinge evaluated from both sides wherever
  // the demand is met exactly.
  const Eigen::VectorXd grad = lagrangian_gradient(problem, x, mult);
  Eigen::VectorXd lo = grad;
  Eigen::VectorXd hi = grad;
  for (Eigen::Index r = 0; r < kx.size(); ++r) {
    double tie_tol = 1e-9 * std::max(1.0, std::abs(d(r)));
    if (std::abs(d(r) - kx(r)) > tie_tol) continue;
    ++rep.tie_count;
    // Flipping s_r changes the gradient by -2 beta3 K_r' (d_r - (Kx)_r) * (+-1).
    Eigen::VectorXd flip = -2.0 * problem.params.beta3 * (d(r) - kx(r)) *
                           K.row(r).transpose();
    if (d(r) > kx(r)) flip = -flip;  // s_r was 1, flipping removes the term
    Eigen::VectorXd alt = grad + flip;
    lo = lo.cwiseMin(alt);
    hi = hi.cwiseMax(alt);
  }
  rep.stationarity_norm = grad.cwiseAbs().maxCoeff();
  double interval_gap = 0.0;
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    double dist = lo(i) > 0.0 ? lo(i) : (hi(i) < 0.0 ? -hi(i) : 0.0);
    interval_gap = std::max(interval_gap, dist);
  }
  rep.stationarity_interval_gap = interval_gap;

  double primal = 0.0;
  for (Eigen::Index r = 0; r < kx.size(); ++r) {
    primal = std::max(primal, (d(r) - problem.uncertainty(r)) - kx(r));
    primal = std::max(primal, kx(r) - (d(r) + problem.waste(r)));
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    primal = std::max(primal, lower(i) - x(i));
    primal = std::max(primal, x(i) - upper(i));
  }
  primal = std::max(primal, deviation_excess(problem, x));
  rep.primal_violation = primal;

  double dual = 0.0;
  auto neg_part = [](const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : std::max(0.0, -v.minCoeff());
  };
  dual = std::max({dual, neg_part(mult.lambda), neg_part(mult.nu),
                   neg_part(mult.omega), neg_part(mult.upper),
                   std::max(0.0, -mult.trust_radius)});
  if (mult.trust.size() > 0) {
    // trust must be a subgradient of trust_radius * ||x - x_current||_1.
    dual = std::max(dual, mult.trust.cwiseAbs().maxCoeff() - mult.trust_radius);
    if (problem.current) {
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        double delta = x(i) - (*problem.current)(i);
        if (std::abs(delta) > 1e-6)
          dual = std::max(dual, std::abs(mult.trust(i) -
                                         std::copysign(mult.trust_radius, delta)));
      }
    }
  }
  rep.dual_violation = std::max(0.0, dual);

  double comp = 0.0;
  for (Eigen::Index r = 0; r < kx.size(); ++r) {
    comp = std::max(comp, std::abs(mult.lambda(r) *
                                   (kx(r) - d(r) + problem.uncertainty(r))));
    comp = std::max(comp, std::abs(mult.nu(r) *
                                   (d(r) + problem.waste(r) - kx(r))));
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    comp = std::max(comp, std::abs(mult.omega(i) * (x(i) - lower(i))));
    comp = std::max(comp, std::abs(mult.upper(i) * (upper(i) - x(i))));
  }
  comp = std::max(comp, std::abs(mult.trust_radius * deviation_excess(problem, x)));
  rep.comp_slack_max = comp;
  return rep;
}

GapEstimate duality_gap_estimate(const AllocationProblem& problem,
                                 const Eigen::VectorXd& x,
                                 const Multipliers& mult) {
  GapEstimate est;
  est.gap = objective(problem, x).total - lagrangian(problem, x, mult);
  est.nonconvex = problem.params.alpha > 0.0;
  KktReport rep = kkt_report(problem, x, mult);
  est.infeasible = rep.scaled().primal_violation > 1e-8;
  return est;
}

}  // namespace nodemix
