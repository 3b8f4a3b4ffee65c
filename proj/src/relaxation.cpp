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

#include "relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>

#include "nodemix/errors.hpp"

namespace nodemix::internal {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFixedWidth = 1e-12;
constexpr double kConstantTol = 1e-9;
// Half the squared Newton decrement bounds the centering error of t f -
// sum log s; below this the inner loop stops even if the gradient test has
// not been met.
constexpr double kNewtonDecrementTol = 1e-9;

double consolidation(double alpha, double beta1, double z) {
  return alpha * -std::expm1(-beta1 * z);
}

}  // namespace

RelaxationSpec root_spec(const AllocationProblem& problem) {
  RelaxationSpec spec;
  spec.lower = problem.effective_lower_bounds();
  spec.upper = problem.effective_upper_bounds();
  return spec;
}

Relaxation::Relaxation(const AllocationProblem& problem, RelaxationSpec spec)
    : problem_(&problem), spec_(std::move(spec)), constant_slack_(kInf) {
  const auto n = static_cast<Eigen::Index>(problem.num_instances());
  const auto m = static_cast<Eigen::Index>(problem.num_resources());
  const Eigen::MatrixXd& K = problem.composition();
  const Eigen::MatrixXd& E = problem.selector();
  const PenaltyParams& pp = problem.params;
  if (spec_.lower.size() != n || spec_.upper.size() != n)
    throw DimensionError("relaxation box has the wrong length");

  Eigen::VectorXd lo = spec_.lower;
  Eigen::VectorXd hi = spec_.upper;
  deviation_ = problem.max_deviation.has_value() && problem.current.has_value();
  if (deviation_ && *problem.max_deviation <= 0.0) {
    // A zero budget pins x to x_current.
    lo = lo.cwiseMax(*problem.current);
    hi = hi.cwiseMin(*problem.current);
    deviation_ = false;
  }

  fixed_x_ = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lo(i) > hi(i) + kFixedWidth) {
      double slack = hi(i) - lo(i);
      if (slack < constant_slack_) {
        constant_slack_ = slack;
        constant_name_ = "bounds on " + problem.catalog->instance(i).sku;
      }
      fixed_x_(i) = lo(i);
    } else if (hi(i) - lo(i) <= kFixedWidth) {
      fixed_x_(i) = lo(i);
    } else {
      free_.push_back(i);
    }
  }
  spec_.lower = lo;
  spec_.upper = hi;
  const auto nf = static_cast<Eigen::Index>(free_.size());
  dim_ = nf + (deviation_ ? n : 0);

  auto loosened = [this](double rhs) {
    return rhs + spec_.loosen * std::max(1.0, std::abs(rhs));
  };

  const Eigen::VectorXd k_fixed = K * fixed_x_;
  for (Eigen::Index r = 0; r < m; ++r) {
    double floor_r = problem.demand(r) - problem.uncertainty(r);
    // Implied by x >= 0 and K >= 0.
    if (floor_r <= 0.0) continue;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(dim_);
    for (Eigen::Index f = 0; f < nf; ++f) row(f) = -K(r, free_[f]);
    add_row(row, loosened(-floor_r + k_fixed(r)),
            {RowKind::kDemandLower, static_cast<std::size_t>(r)});
  }
  if (spec_.enforce_upper_demand) {
    for (Eigen::Index r = 0; r < m; ++r) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(dim_);
      for (Eigen::Index f = 0; f < nf; ++f) row(f) = K(r, free_[f]);
      add_row(row,
              loosened(problem.demand(r) + problem.waste(r) - k_fixed(r)),
              {RowKind::kDemandUpper, static_cast<std::size_t>(r)});
    }
  }
  for (Eigen::Index f = 0; f < nf; ++f) {
    Eigen::Index i = free_[f];
    Eigen::VectorXd row = Eigen::VectorXd::Zero(dim_);
    row(f) = -1.0;
    add_row(row, -lo(i), {RowKind::kBoxLower, static_cast<std::size_t>(i)});
    row(f) = 1.0;
    add_row(row, hi(i), {RowKind::kBoxUpper, static_cast<std::size_t>(i)});
  }
  if (deviation_) {
    const Eigen::VectorXd& xc = *problem.current;
    std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);
    for (Eigen::Index f = 0; f < nf; ++f) slot[static_cast<std::size_t>(free_[f])] = f;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index f = slot[static_cast<std::size_t>(i)];
      Eigen::VectorXd row = Eigen::VectorXd::Zero(dim_);
      row(nf + i) = -1.0;
      if (f >= 0) row(f) = 1.0;
      add_row(row, loosened(xc(i) - (f >= 0 ? 0.0 : fixed_x_(i))),
              {RowKind::kDeviationPlus, static_cast<std::size_t>(i)});
      if (f >= 0) row(f) = -1.0;
      add_row(row, loosened(-xc(i) + (f >= 0 ? 0.0 : fixed_x_(i))),
              {RowKind::kDeviationMinus, static_cast<std::size_t>(i)});
    }
    Eigen::VectorXd row = Eigen::VectorXd::Zero(dim_);
    row.tail(n).setOnes();
    add_row(row, loosened(*problem.max_deviation),
            {RowKind::kDeviationBudget, 0});
  }
  const auto p = E.rows();
  const Eigen::VectorXd z_fixed = E * fixed_x_;
  Eigen::VectorXd z_min = E * lo;
  Eigen::VectorXd z_max = E * hi;
  auto provider_row = [&](Eigen::Index j, double sign) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(dim_);
    for (Eigen::Index f = 0; f < nf; ++f) row(f) = sign * E(j, free_[f]);
    return row;
  };
  if (spec_.z_lower.size() == p) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (spec_.z_lower(j) <= z_min(j)) continue;
      double rhs = loosened(-spec_.z_lower(j) + z_fixed(j));
      add_row(provider_row(j, -1.0), rhs,
              {RowKind::kProviderLower, static_cast<std::size_t>(j)});
      z_min(j) = std::max(z_min(j), -rhs + z_fixed(j));
    }
  }
  if (spec_.z_upper.size() == p) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (spec_.z_upper(j) >= z_max(j)) continue;
      double rhs = loosened(spec_.z_upper(j) - z_fixed(j));
      add_row(provider_row(j, 1.0), rhs,
              {RowKind::kProviderUpper, static_cast<std::size_t>(j)});
      z_max(j) = std::min(z_max(j), rhs + z_fixed(j));
    }
  }

  A_.resize(static_cast<Eigen::Index>(pending_rows_.size()), dim_);
  b_.resize(static_cast<Eigen::Index>(pending_rows_.size()));
  for (std::size_t k = 0; k < pending_rows_.size(); ++k) {
    A_.row(static_cast<Eigen::Index>(k)) = pending_rows_[k].transpose();
    b_(static_cast<Eigen::Index>(k)) = pending_rhs_[k];
  }
  pending_rows_.clear();
  pending_rhs_.clear();

  chord_slope_ = Eigen::VectorXd::Zero(p);
  chord_intercept_ = Eigen::VectorXd::Zero(p);
  if (spec_.secant) {
    const Eigen::VectorXd zl = z_min.cwiseMax(0.0);
    const Eigen::VectorXd zu = z_max.cwiseMax(zl);
    for (Eigen::Index j = 0; j < p; ++j) {
      double hl = consolidation(pp.alpha, pp.beta1, zl(j));
      double hu = consolidation(pp.alpha, pp.beta1, zu(j));
      double width = zu(j) - zl(j);
      chord_slope_(j) = width > kFixedWidth ? (hu - hl) / width : 0.0;
      chord_intercept_(j) = hl - chord_slope_(j) * zl(j);
    }
  }
}

void Relaxation::add_row(const Eigen::VectorXd& coeffs, double rhs,
                         RowTag tag) {
  if (coeffs.size() == 0 || coeffs.cwiseAbs().maxCoeff() == 0.0) {
    if (rhs < constant_slack_) {
      constant_slack_ = rhs;
      tags_.push_back(tag);
      constant_name_ = row_name(tags_.size() - 1);
      tags_.pop_back();
    }
    return;
  }
  pending_rows_.push_back(coeffs);
  pending_rhs_.push_back(rhs);
  tags_.push_back(tag);
}

std::string Relaxation::row_name(std::size_t k) const {
  const RowTag& tag = tags_[k];
  const auto& catalog = *problem_->catalog;
  switch (tag.kind) {
    case RowKind::kDemandLower:
      return "demand floor on " + catalog.schema().name(tag.index);
    case RowKind::kDemandUpper:
      return "waste cap on " + catalog.schema().name(tag.index);
    case RowKind::kBoxLower:
      return "lower bound on " + catalog.instance(tag.index).sku;
    case RowKind::kBoxUpper:
      return "upper bound on " + catalog.instance(tag.index).sku;
    case RowKind::kDeviationPlus:
    case RowKind::kDeviationMinus:
      return "deviation of " + catalog.instance(tag.index).sku;
    case RowKind::kDeviationBudget:
      return "deviation budget";
    case RowKind::kProviderLower:
    case RowKind::kProviderUpper:
      return "instance total on " + catalog.providers()[tag.index];
  }
  return "constraint";
}

Eigen::VectorXd Relaxation::expand(const Eigen::VectorXd& w) const {
  Eigen::VectorXd x = fixed_x_;
  for (std::size_t f = 0; f < free_.size(); ++f)
    x(free_[f]) = w(static_cast<Eigen::Index>(f));
  return x;
}

Eigen::VectorXd Relaxation::lift(const Eigen::VectorXd& x) const {
  Eigen::VectorXd w(dim_);
  const auto nf = static_cast<Eigen::Index>(free_.size());
  for (Eigen::Index f = 0; f < nf; ++f) w(f) = x(free_[f]);
  if (deviation_) {
    const Eigen::VectorXd full = expand(w);
    const Eigen::VectorXd dist = (full - *problem_->current).cwiseAbs();
    const auto n = dist.size();
    double budget = *problem_->max_deviation *
                    (1.0 + spec_.loosen);
    double share = std::max(0.0, budget - dist.sum()) / (2.0 * static_cast<double>(n));
    w.tail(n) = dist.array() + share;
  }
  return w;
}

Eigen::VectorXd Relaxation::box_center() const {
  Eigen::VectorXd x = fixed_x_;
  for (Eigen::Index i : free_) x(i) = 0.5 * (spec_.lower(i) + spec_.upper(i));
  return lift(x);
}

bool Relaxation::strictly_feasible(const Eigen::VectorXd& w) const {
  // Constant rows never enter the barrier, so a tie is fine.
  if (constant_slack_ < -kConstantTol) return false;
  if (A_.rows() == 0) return true;
  return ((b_ - A_ * w).array() > 0.0).all();
}

double Relaxation::value_x(const Eigen::VectorXd& x) const {
  const AllocationProblem& pr = *problem_;
  const PenaltyParams& pp = pr.params;
  const Eigen::VectorXd z = pr.selector() * x;
  const Eigen::VectorXd kx = pr.composition() * x;
  double v = pr.costs().dot(x);
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    v += spec_.secant ? chord_intercept_(j) + chord_slope_(j) * z(j)
                      : consolidation(pp.alpha, pp.beta1, z(j));
    v -= pp.gamma * std::log1p(pp.beta2 * z(j));
  }
  for (Eigen::Index r = 0; r < kx.size(); ++r) {
    double shortfall = std::max(0.0, pr.demand(r) - kx(r));
    v += pp.beta3 * shortfall * shortfall;
    if (!spec_.enforce_upper_demand) {
      double excess = std::max(0.0, kx(r) - pr.demand(r) - pr.waste(r));
      v += pp.beta3 * excess * excess;
    }
  }
  return v;
}

Eigen::VectorXd Relaxation::gradient_x(const Eigen::VectorXd& x) const {
  const AllocationProblem& pr = *problem_;
  const PenaltyParams& pp = pr.params;
  const Eigen::MatrixXd& K = pr.composition();
  const Eigen::MatrixXd& E = pr.selector();
  const Eigen::VectorXd z = E * x;
  const Eigen::VectorXd kx = K * x;
  Eigen::VectorXd per(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    double cons = spec_.secant ? chord_slope_(j)
                               : pp.alpha * pp.beta1 * std::exp(-pp.beta1 * z(j));
    per(j) = cons - pp.gamma * pp.beta2 / (1.0 + pp.beta2 * z(j));
  }
  Eigen::VectorXd hinge(kx.size());
  for (Eigen::Index r = 0; r < kx.size(); ++r) {
    double shortfall = std::max(0.0, pr.demand(r) - kx(r));
    double excess = spec_.enforce_upper_demand
                        ? 0.0
                        : std::max(0.0, kx(r) - pr.demand(r) - pr.waste(r));
    hinge(r) = excess - shortfall;
  }
  return pr.costs() + E.transpose() * per +
         2.0 * pp.beta3 * (K.transpose() * hinge);
}

Eigen::VectorXd Relaxation::gradient(const Eigen::VectorXd& w) const {
  const Eigen::VectorXd gx = gradient_x(expand(w));
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  for (std::size_t f = 0; f < free_.size(); ++f)
    g(static_cast<Eigen::Index>(f)) = gx(free_[f]);
  return g;
}

Eigen::MatrixXd Relaxation::hessian(const Eigen::VectorXd& w,
                                    bool convex_only) const {
  const AllocationProblem& pr = *problem_;
  const PenaltyParams& pp = pr.params;
  const Eigen::MatrixXd& K = pr.composition();
  const Eigen::MatrixXd& E = pr.selector();
  const Eigen::VectorXd x = expand(w);
  const Eigen::VectorXd z = E * x;
  const Eigen::VectorXd kx = K * x;
  const auto nf = static_cast<Eigen::Index>(free_.size());

  Eigen::MatrixXd Ef(E.rows(), nf);
  Eigen::MatrixXd Kf(K.rows(), nf);
  for (Eigen::Index f = 0; f < nf; ++f) {
    Ef.col(f) = E.col(free_[static_cast<std::size_t>(f)]);
    Kf.col(f) = K.col(free_[static_cast<std::size_t>(f)]);
  }
  Eigen::VectorXd pc(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    double denom = 1.0 + pp.beta2 * z(j);
    double c = pp.gamma * pp.beta2 * pp.beta2 / (denom * denom);
    if (!spec_.secant && !convex_only)
      c -= pp.alpha * pp.beta1 * pp.beta1 * std::exp(-pp.beta1 * z(j));
    pc(j) = c;
  }
  Eigen::VectorXd active(kx.size());
  for (Eigen::Index r = 0; r < kx.size(); ++r) {
    double a = pr.demand(r) > kx(r) ? 1.0 : 0.0;
    if (!spec_.enforce_upper_demand && kx(r) > pr.demand(r) + pr.waste(r)) a += 1.0;
    active(r) = a;
  }
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim_, dim_);
  H.topLeftCorner(nf, nf) = Ef.transpose() * pc.asDiagonal() * Ef +
                            2.0 * pp.beta3 * Kf.transpose() * active.asDiagonal() * Kf;
  return H;
}

double Relaxation::diameter() const {
  double d = 0.0;
  for (Eigen::Index i : free_) d += spec_.upper(i) - spec_.lower(i);
  if (deviation_) d += 2.0 * *problem_->max_deviation * (1.0 + spec_.loosen) + 2.0 * spec_.loosen;
  return d;
}

double Relaxation::dual_bound(const Eigen::VectorXd& w, double t) const {
  const Eigen::VectorXd slack = b_ - A_ * w;
  Eigen::VectorXd r = gradient(w);
  double value = value_x(expand(w));
  for (Eigen::Index k = 0; k < slack.size(); ++k) {
    RowKind kind = tags_[static_cast<std::size_t>(k)].kind;
    if (kind == RowKind::kBoxLower || kind == RowKind::kBoxUpper) continue;
    const double lambda = 1.0 / (t * slack(k));
    r += lambda * A_.row(k).transpose();
    value -= lambda * slack(k);
  }
  // Minimize the linearization r'(y - w) over the box of w.
  // The e block is boxed by its own rows: e_i >= -eps_i and
  // e_i <= budget + sum of the other eps.
  const auto nf = static_cast<Eigen::Index>(free_.size());
  double eps_sum = 0.0;
  double budget = 0.0;
  if (deviation_) {
    for (Eigen::Index i = 0; i < problem_->current->size(); ++i)
      eps_sum += spec_.loosen * std::max(1.0, std::abs((*problem_->current)(i)));
    double delta = *problem_->max_deviation;
    budget = delta + spec_.loosen * std::max(1.0, delta);
  }
  for (Eigen::Index k = 0; k < dim_; ++k) {
    double lo, hi;
    if (k < nf) {
      lo = spec_.lower(free_[static_cast<std::size_t>(k)]);
      hi = spec_.upper(free_[static_cast<std::size_t>(k)]);
    } else {
      lo = -spec_.loosen * std::max(1.0, std::abs((*problem_->current)(k - nf)));
      hi = budget + eps_sum;
    }
    value += std::min(r(k) * (lo - w(k)), r(k) * (hi - w(k)));
  }
  return value;
}

Eigen::VectorXd Relaxation::chord_error(const Eigen::VectorXd& x) const {
  const PenaltyParams& pp = problem_->params;
  const Eigen::VectorXd z = problem_->selector() * x;
  Eigen::VectorXd err = Eigen::VectorXd::Zero(z.size());
  if (!spec_.secant) return err;
  for (Eigen::Index j = 0; j < z.size(); ++j)
    err(j) = consolidation(pp.alpha, pp.beta1, z(j)) -
             (chord_intercept_(j) + chord_slope_(j) * z(j));
  return err;
}

BarrierRun run_barrier(const SmoothObjective& objective,
                       const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       Eigen::VectorXd w0, const BarrierSettings& settings,
                       bool record_trace,
                       const std::function<bool(const Eigen::VectorXd&)>& stop) {
  BarrierRun run;
  run.w = std::move(w0);
  run.t = settings.t_initial;
  const Eigen::Index dim = run.w.size();
  const auto m_ineq = static_cast<double>(A.rows());
  if (dim == 0) {
    run.converged = true;
    return run;
  }

  // Most rows are box or deviation rows with one or two entries.
  const Eigen::SparseMatrix<double> As = A.sparseView();
  const Eigen::SparseMatrix<double> At = As.transpose();

  bool centered = false;
  for (int outer = 0; outer < settings.max_outer_iters; ++outer) {
    const double t = run.t;
    centered = false;
    for (int inner = 0; inner < settings.max_inner_iters; ++inner) {
      const Eigen::VectorXd s = b - As * run.w;
      const Eigen::VectorXd inv = s.cwiseInverse();
      const Eigen::VectorXd g = t * objective.gradient(run.w) + At * inv;
      run.stationarity = g.cwiseAbs().maxCoeff() / t;
      if (run.stationarity <= settings.inner_tolerance) {
        centered = true;
        break;
      }
      const Eigen::MatrixXd Hb =
          Eigen::MatrixXd(At * inv.cwiseAbs2().asDiagonal() * As);
      Eigen::MatrixXd H = t * objective.hessian(run.w, false) + Hb;
      Eigen::LLT<Eigen::MatrixXd> llt(H);
      if (llt.info() != Eigen::Success) {
        ++run.convexified;
        H = t * objective.hessian(run.w, true) + Hb;
        llt.compute(H);
        double ridge = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
        while (llt.info() != Eigen::Success && ridge < 1e12) {
          llt.compute(H + ridge * Eigen::MatrixXd::Identity(dim, dim));
          ridge *= 100.0;
        }
      }
      Eigen::VectorXd dx = -llt.solve(g);
      double slope = g.dot(dx);
      if (!(slope < 0.0)) {
        dx = -g;
        slope = -g.squaredNorm();
      } else if (-0.5 * slope <= kNewtonDecrementTol) {
        // The centering problem is solved to well below roundoff in t f.
        centered = true;
        break;
      }
      // Largest step that stays strictly inside.
      const Eigen::VectorXd adx = As * dx;
      double step_max = 1.0;
      for (Eigen::Index k = 0; k < adx.size(); ++k)
        if (adx(k) > 0.0) step_max = std::min(step_max, 0.99 * s(k) / adx(k));
      double step = step_max;
      const double f0 = objective.value(run.w);
      bool accepted = false;
      while (step > 1e-18) {
        Eigen::VectorXd trial = run.w + step * dx;
        // Change in t f - sum log s, formed without subtracting the two large
        // barrier values.
        double change = t * (objective.value(trial) - f0);
        for (Eigen::Index k = 0; k < adx.size(); ++k)
          change -= std::log1p(-step * adx(k) / s(k));
        if (std::isfinite(change) &&
            change <= settings.armijo_c * step * slope) {
          run.w = std::move(trial);
          accepted = true;
          break;
        }
        step *= settings.backtrack_factor;
      }
      if (!accepted) {
        // Near the center, t * f swamps the decrease in floating point. Fall
        // back to accepting the largest step that shrinks the gradient.
        auto grad_norm = [&](const Eigen::VectorXd& w) {
          const Eigen::VectorXd sw = b - As * w;
          if ((sw.array() <= 0.0).any()) return kInf;
          return (t * objective.gradient(w) + At * sw.cwiseInverse())
              .cwiseAbs()
              .maxCoeff();
        };
        const double g0 = g.cwiseAbs().maxCoeff();
        for (step = std::min(1.0, step_max); step > 1e-12;
             step *= settings.backtrack_factor) {
          Eigen::VectorXd trial = run.w + step * dx;
          if (grad_norm(trial) < g0) {
            run.w = std::move(trial);
            accepted = true;
            break;
          }
        }
      }
      ++run.inner;
      // No progress left at this t; the iterate is as centered as double
      // precision allows.
      if (!accepted || step < 1e-10) break;
      if (record_trace) run.trace.push_back(objective.value(run.w));
      if (stop && stop(run.w)) {
        run.stopped_early = true;
        ++run.outer;
        return run;
      }
    }
    ++run.outer;
    if (m_ineq / t <= settings.outer_tolerance) {
      // Stalled line searches near the optimum still count when the
      // stationarity target is met to within a factor of ten.
      run.converged = centered ||
                      run.stationarity <= 10.0 * settings.inner_tolerance;
      return run;
    }
    run.t *= settings.t_growth;
  }
  run.converged = false;
  return run;
}

PhaseOneOutcome run_phase_one(const Relaxation& rel,
                              const BarrierSettings& settings) {
  PhaseOneOutcome out;
  const Eigen::MatrixXd& A = rel.A();
  const Eigen::VectorXd& b = rel.b();
  const Eigen::Index dim = rel.dim();
  const Eigen::Index rows = A.rows();

  // Rows normalized by their largest coefficient so violations share a unit.
  Eigen::VectorXd norm(rows);
  for (Eigen::Index k = 0; k < rows; ++k) norm(k) = A.row(k).cwiseAbs().maxCoeff();
  Eigen::MatrixXd An = norm.cwiseInverse().asDiagonal() * A;
  Eigen::VectorXd bn = b.cwiseQuotient(norm);

  const double constant_violation = -rel.constant_slack();
  Eigen::VectorXd w0 = rel.box_center();

  // Box rows stay hard: the box always has an interior, and a violated demand
  // or deviation row is the informative culprit.
  std::vector<Eigen::Index> soft;
  for (Eigen::Index k = 0; k < rows; ++k) {
    RowKind kind = rel.tags()[static_cast<std::size_t>(k)].kind;
    if (kind != RowKind::kBoxLower && kind != RowKind::kBoxUpper) soft.push_back(k);
  }
  auto worst_soft = [&](const Eigen::VectorXd& w, Eigen::Index* arg) {
    const Eigen::VectorXd v = An * w - bn;
    double worst = -kInf;
    for (Eigen::Index k : soft) {
      if (v(k) > worst) {
        worst = v(k);
        if (arg) *arg = k;
      }
    }
    return worst;
  };
  auto report_worst = [&](const Eigen::VectorXd& w) {
    Eigen::Index arg = -1;
    double s_value = worst_soft(w, &arg);
    out.max_violation = s_value;
    out.most_violated = arg >= 0 ? rel.row_name(static_cast<std::size_t>(arg)) : "";
    if (constant_violation >= s_value) {
      out.max_violation = constant_violation;
      out.most_violated = rel.constant_slack_name();
    }
    return s_value;
  };

  if (soft.empty() || dim == 0) {
    out.w = w0;
    report_worst(w0);
    out.violation_lower_bound = out.max_violation;
  } else {
    // Variables (w, s): minimize s subject to An w - bn <= s on the soft rows,
    // the box rows as they are, and s >= -1.
    Eigen::MatrixXd Aug = Eigen::MatrixXd::Zero(rows + 1, dim + 1);
    Aug.topLeftCorner(rows, dim) = An;
    for (Eigen::Index k : soft) Aug(k, dim) = -1.0;
    Aug(rows, dim) = -1.0;
    Eigen::VectorXd baug(rows + 1);
    baug.head(rows) = bn;
    baug(rows) = 1.0;

    Eigen::VectorXd v0(dim + 1);
    v0.head(dim) = w0;
    v0(dim) = std::max(worst_soft(w0, nullptr) + 1.0, -0.5);

    SmoothObjective lin{
        [dim](const Eigen::VectorXd& v) { return v(dim); },
        [dim](const Eigen::VectorXd& v) {
          Eigen::VectorXd g = Eigen::VectorXd::Zero(v.size());
          g(dim) = 1.0;
          return g;
        },
        [](const Eigen::VectorXd& v, bool) {
          return Eigen::MatrixXd::Zero(v.size(), v.size()).eval();
        }};
    // Stop once comfortably inside, measured in normalized units.
    constexpr double kTarget = 0.05;
    BarrierSettings ps = settings;
    ps.outer_tolerance = std::min(settings.outer_tolerance, 1e-9);
    ps.max_outer_iters = std::max(settings.max_outer_iters, 16);
    BarrierRun run = run_barrier(
        lin, Aug, baug, v0, ps, false,
        [dim](const Eigen::VectorXd& v) { return v(dim) < -kTarget; });
    out.iterations = run.inner;
    out.w = run.w.head(dim);
    double s_value = report_worst(out.w);
    // Duality gap of the phase-one problem at the returned point.
    double gap = static_cast<double>(rows + 1) / run.t +
                 run.stationarity * (rel.diameter() + v0(dim) + 1.0);
    out.violation_lower_bound =
        run.stopped_early ? -kInf : std::max(s_value - gap, constant_violation);
  }

  const double row_violation = rows == 0 ? -kInf : (An * out.w - bn).maxCoeff();
  if (constant_violation > kConstantTol) {
    out.interior = Interior::kInfeasible;
  } else if (row_violation < 0.0 && rel.strictly_feasible(out.w)) {
    out.interior = Interior::kNonempty;
  } else if (out.violation_lower_bound > 1e-9) {
    out.interior = Interior::kInfeasible;
  } else {
    out.interior = Interior::kEmpty;
  }
  return out;
}

Multipliers recover_multipliers(const Relaxation& rel, const BarrierRun& run) {
  const AllocationProblem& pr = rel.problem();
  Multipliers mult = Multipliers::zero(pr);
  const Eigen::VectorXd s = rel.b() - rel.A() * run.w;
  double sigma = 0.0;
  Eigen::VectorXd plus = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pr.num_instances()));
  Eigen::VectorXd minus = plus;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    const RowTag& tag = rel.tags()[static_cast<std::size_t>(k)];
    const double mu = 1.0 / (run.t * s(k));
    const auto idx = static_cast<Eigen::Index>(tag.index);
    switch (tag.kind) {
      case RowKind::kDemandLower: mult.lambda(idx) += mu; break;
      case RowKind::kDemandUpper: mult.nu(idx) += mu; break;
      case RowKind::kBoxLower: mult.omega(idx) += mu; break;
      case RowKind::kBoxUpper: mult.upper(idx) += mu; break;
      case RowKind::kDeviationPlus: plus(idx) += mu; break;
      case RowKind::kDeviationMinus: minus(idx) += mu; break;
      case RowKind::kDeviationBudget: sigma += mu; break;
      case RowKind::kProviderLower:
      case RowKind::kProviderUpper: break;  // node-only rows
    }
  }
  mult.trust = plus - minus;
  mult.trust_radius = sigma;

  const Eigen::VectorXd x = rel.expand(run.w);
  if (!rel.spec().enforce_upper_demand) {
    // The waste penalty gradient plays the role of nu.
    const Eigen::VectorXd kx = pr.composition() * x;
    for (Eigen::Index r = 0; r < kx.size(); ++r)
      mult.nu(r) = 2.0 * pr.params.beta3 *
                   std::max(0.0, kx(r) - pr.demand(r) - pr.waste(r));
  }
  // Eliminated variables sit on both bounds; give their residual to the
  // matching bound multiplier.
  const Eigen::VectorXd residual = lagrangian_gradient(pr, x, mult);
  std::vector<bool> is_free(pr.num_instances(), false);
  for (Eigen::Index i : rel.free_vars()) is_free[static_cast<std::size_t>(i)] = true;
  const bool pinned = pr.current && pr.max_deviation && *pr.max_deviation <= 0.0;
  const Eigen::VectorXd lo = pr.effective_lower_bounds();
  const Eigen::VectorXd hi = pr.effective_upper_bounds();
  for (Eigen::Index i = 0; i < residual.size(); ++i) {
    if (is_free[static_cast<std::size_t>(i)]) continue;
    if (pinned && x(i) > lo(i) && x(i) < hi(i)) {
      // Held in place by the zero deviation budget, not by a bound.
      mult.trust(i) -= residual(i);
      mult.trust_radius = std::max(mult.trust_radius, std::abs(mult.trust(i)));
    } else if (residual(i) > 0.0) {
      mult.omega(i) += residual(i);
    } else {
      mult.upper(i) -= residual(i);
    }
  }
  return mult;
}

}  // namespace nodemix::internal
