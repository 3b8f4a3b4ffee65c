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

#include "nodemix/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "nodemix/errors.hpp"
#include "relaxation.hpp"
#include "rng.hpp"

namespace nodemix {
namespace {

using internal::Interior;
using internal::Relaxation;
using internal::RelaxationSpec;

// A relaxation with a strictly feasible starting point.
struct Prepared {
  std::unique_ptr<Relaxation> rel;
  Eigen::VectorXd w0;
  SolveMode mode = SolveMode::kBarrier;
  int phase_one_iters = 0;
};

[[noreturn]] void throw_infeasible(const internal::PhaseOneOutcome& out) {
  throw InfeasibleError(out.most_violated.empty() ? "constraints"
                                                  : out.most_violated,
                        out.max_violation);
}

// Demand that no allocation inside the box can reach, even with every type at
// its upper bound.
void check_coverable(const AllocationProblem& problem) {
  const Eigen::VectorXd reach =
      problem.composition() * problem.effective_upper_bounds();
  const Eigen::VectorXd floor = problem.demand - problem.uncertainty;
  for (Eigen::Index r = 0; r < floor.size(); ++r) {
    const double deficit = floor(r) - reach(r);
    if (deficit > 1e-9 * std::max(1.0, floor(r)))
      throw InfeasibleError(
          "uncoverable resource " +
              problem.catalog->schema().name(static_cast<std::size_t>(r)),
          deficit);
  }
}

Prepared prepare(const AllocationProblem& problem,
                 const BarrierSettings& settings) {
  check_coverable(problem);
  Prepared prep;
  RelaxationSpec spec = internal::root_spec(problem);
  prep.rel = std::make_unique<Relaxation>(problem, spec);
  internal::PhaseOneOutcome out = internal::run_phase_one(*prep.rel, settings);
  prep.phase_one_iters = out.iterations;
  if (out.interior == Interior::kInfeasible) throw_infeasible(out);
  if (out.interior == Interior::kNonempty) {
    prep.w0 = out.w;
    return prep;
  }
  // Empty interior: trade the waste cap for a penalty, and if that is still
  // not enough (ties in the demand floor or box) loosen by a hair.
  prep.mode = SolveMode::kPenalty;
  spec.enforce_upper_demand = false;
  for (double loosen : {0.0, 1e-9, 1e-7}) {
    spec.loosen = loosen;
    prep.rel = std::make_unique<Relaxation>(problem, spec);
    out = internal::run_phase_one(*prep.rel, settings);
    prep.phase_one_iters += out.iterations;
    if (out.interior == Interior::kInfeasible) throw_infeasible(out);
    if (out.interior == Interior::kNonempty) {
      prep.w0 = out.w;
      return prep;
    }
  }
  throw_infeasible(out);
}

ContinuousSolution finish(const AllocationProblem& problem,
                          const Prepared& prep, const Eigen::VectorXd& w0,
                          const BarrierSettings& settings) {
  const Relaxation& rel = *prep.rel;
  internal::BarrierRun run = internal::run_barrier(
      internal::objective_of(rel), rel.A(), rel.b(), w0, settings, true);
  ContinuousSolution sol;
  const Eigen::VectorXd x = rel.expand(run.w);
  sol.x_star = Allocation::continuous(x);
  sol.breakdown = objective(problem, x);
  sol.multipliers = internal::recover_multipliers(rel, run);
  sol.iterations.phase_one = prep.phase_one_iters;
  sol.iterations.inner = run.inner;
  sol.iterations.outer = run.outer;
  sol.iterations.convexified_steps = run.convexified;
  sol.converged = run.converged;
  sol.mode = prep.mode;
  sol.t_final = run.t;
  sol.barrier_gap = static_cast<double>(rel.A().rows()) / run.t;
  sol.trace = std::move(run.trace);
  return sol;
}

}  // namespace

void BarrierSettings::validate() const {
  if (!(t_initial > 0.0) || !(t_growth > 1.0))
    throw ValidationError("barrier t_initial must be > 0 and t_growth > 1");
  if (!(inner_tolerance > 0.0) || !(outer_tolerance > 0.0))
    throw ValidationError("barrier tolerances must be positive");
  if (max_inner_iters < 1 || max_outer_iters < 1)
    throw ValidationError("barrier iteration limits must be positive");
  if (!(armijo_c > 0.0 && armijo_c < 0.5) ||
      !(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw ValidationError("line search parameters out of range");
}

const char* to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::kBarrier:
      return "barrier";
    case SolveMode::kPenalty:
      return "penalty";
  }
  return "unknown";
}

PhaseOneResult phase_one(const AllocationProblem& problem,
                         const BarrierSettings& settings) {
  problem.validate();
  settings.validate();
  Relaxation rel(problem, internal::root_spec(problem));
  internal::PhaseOneOutcome out = internal::run_phase_one(rel, settings);
  PhaseOneResult res;
  res.x = Allocation::continuous(rel.expand(out.w));
  res.strictly_feasible = out.interior == Interior::kNonempty;
  res.max_violation = out.max_violation;
  res.violation_lower_bound = out.violation_lower_bound;
  res.most_violated = out.most_violated;
  res.iterations = out.iterations;
  return res;
}

ContinuousSolution solve_relaxed(const AllocationProblem& problem,
                                 const BarrierSettings& settings,
                                 const std::optional<Allocation>& x0) {
  problem.validate();
  settings.validate();
  if (x0 && x0->counts.size() != static_cast<Eigen::Index>(problem.num_instances()))
    throw DimensionError("starting point has the wrong length");
  if (x0) {
    // Skip phase one when the caller's point is already strictly inside.
    Prepared prep;
    prep.rel = std::make_unique<Relaxation>(problem, internal::root_spec(problem));
    Eigen::VectorXd w = prep.rel->lift(x0->counts);
    if (prep.rel->strictly_feasible(w)) return finish(problem, prep, w, settings);
  }
  Prepared prep = prepare(problem, settings);
  return finish(problem, prep, prep.w0, settings);
}

ContinuousSolution multi_start(const AllocationProblem& problem,
                               const BarrierSettings& settings, int starts,
                               std::uint64_t seed) {
  problem.validate();
  settings.validate();
  if (starts < 1) throw ValidationError("multi_start needs at least one start");
  Prepared prep = prepare(problem, settings);
  const Relaxation& rel = *prep.rel;
  const RelaxationSpec& spec = rel.spec();
  internal::Rng rng(seed);

  std::optional<ContinuousSolution> best;
  for (int k = 0; k < starts; ++k) {
    Eigen::VectorXd w = prep.w0;
    if (k > 0) {
      // Phase-one point scaled by up to e^3 either way per coordinate, then
      // pulled back toward it until strictly inside every row.
      Eigen::VectorXd x = rel.expand(prep.w0);
      for (Eigen::Index i : rel.free_vars()) {
        double scaled = spec.lower(i) + (x(i) - spec.lower(i)) *
                                            std::exp(rng.uniform(-3.0, 3.0));
        x(i) = std::min(scaled, spec.upper(i));
      }
      const Eigen::VectorXd target = rel.lift(x);
      double theta = 1.0;
      w = target;
      while (!rel.strictly_feasible(w) && theta > 1e-12) {
        theta *= 0.5;
        w = prep.w0 + theta * (target - prep.w0);
      }
      if (!rel.strictly_feasible(w)) w = prep.w0;
    }
    ContinuousSolution sol = finish(problem, prep, w, settings);
    if (!best) {
      best = std::move(sol);
      continue;
    }
    bool better;
    if (sol.converged != best->converged) {
      better = sol.converged;
    } else {
      better = sol.breakdown.total < best->breakdown.total;
    }
    if (better) best = std::move(sol);
  }
  return *best;
}

}  // namespace nodemix
