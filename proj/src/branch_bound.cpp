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

#include "nodemix/branch_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#include "nodemix/errors.hpp"
#include "relaxation.hpp"

namespace nodemix {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIntTol = 1e-6;
// Node relaxations loosen demand rows by this relative amount so that boxes
// touching the demand floor still have an interior.
constexpr double kNodeLoosen = 1e-6;
// Nodes whose bound is within this of the incumbent are closed.
constexpr double kPruneTol = 1e-7;

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd z_lower;
  Eigen::VectorXd z_upper;
};

double feasibility_tol(const AllocationProblem& problem) {
  double scale = 1.0;
  if (problem.demand.size() > 0)
    scale = std::max(scale, problem.demand.cwiseAbs().maxCoeff());
  return 1e-9 * scale;
}

// Integer box of the problem itself.
Box root_box(const AllocationProblem& problem) {
  Box box;
  box.lower = (problem.effective_lower_bounds().array() - 1e-9).ceil().matrix();
  box.upper = (problem.effective_upper_bounds().array() + 1e-9).floor().matrix();
  if (problem.current && problem.max_deviation) {
    const Eigen::VectorXd& xc = *problem.current;
    const double delta = *problem.max_deviation;
    box.lower = box.lower.cwiseMax((xc.array() - delta - 1e-9).ceil().matrix());
    box.upper = box.upper.cwiseMin((xc.array() + delta + 1e-9).floor().matrix());
  }
  const auto p = static_cast<Eigen::Index>(problem.num_providers());
  box.z_lower = Eigen::VectorXd::Zero(p);
  box.z_upper = Eigen::VectorXd::Constant(p, kInf);
  return box;
}

bool lower_or_raise(double value, double* bound) {
  if (value > *bound) {
    *bound = value;
    return true;
  }
  return false;
}

bool upper_or_cut(double value, double* bound) {
  if (value < *bound) {
    *bound = value;
    return true;
  }
  return false;
}

// Implied bounds from d - mu <= Kx <= d + g, the provider totals and the
// deviation budget. Returns false when the box is provably empty.
bool tighten(const AllocationProblem& problem, Box& box) {
  const Eigen::MatrixXd& K = problem.composition();
  const Eigen::MatrixXd& E = problem.selector();
  const Eigen::Index n = K.cols();
  const double tol = feasibility_tol(problem);
  constexpr int kPasses = 8;
  for (int pass = 0; pass < kPasses; ++pass) {
    bool changed = false;
    for (Eigen::Index r = 0; r < K.rows(); ++r) {
      const double cap = problem.demand(r) + problem.waste(r);
      const double need = problem.demand(r) - problem.uncertainty(r);
      const double sum_l = K.row(r).dot(box.lower);
      const double sum_u = K.row(r).dot(box.upper);
      if (sum_l > cap + tol || sum_u < need - tol) return false;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double k = K(r, i);
        if (k <= 0.0) continue;
        double hi = std::floor((cap - (sum_l - k * box.lower(i))) / k + 1e-9);
        double lo = std::ceil((need - (sum_u - k * box.upper(i))) / k - 1e-9);
        changed |= upper_or_cut(hi, &box.upper(i));
        changed |= lower_or_raise(lo, &box.lower(i));
      }
    }
    for (Eigen::Index j = 0; j < E.rows(); ++j) {
      const double zl = E.row(j).dot(box.lower);
      const double zu = E.row(j).dot(box.upper);
      changed |= lower_or_raise(zl, &box.z_lower(j));
      changed |= upper_or_cut(zu, &box.z_upper(j));
      if (box.z_lower(j) > box.z_upper(j)) return false;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (E(j, i) == 0.0) continue;
        changed |= upper_or_cut(box.z_upper(j) - (zl - box.lower(i)), &box.upper(i));
        changed |= lower_or_raise(box.z_lower(j) - (zu - box.upper(i)), &box.lower(i));
      }
    }
    if (problem.current && problem.max_deviation) {
      const Eigen::VectorXd& xc = *problem.current;
      const double delta = *problem.max_deviation;
      Eigen::VectorXd dmin(n);
      for (Eigen::Index i = 0; i < n; ++i)
        dmin(i) = std::max({0.0, box.lower(i) - xc(i), xc(i) - box.upper(i)});
      const double total = dmin.sum();
      if (total > delta + 1e-9) return false;
      for (Eigen::Index i = 0; i < n; ++i) {
        double room = delta - (total - dmin(i));
        changed |= upper_or_cut(std::floor(xc(i) + room + 1e-9), &box.upper(i));
        changed |= lower_or_raise(std::ceil(xc(i) - room - 1e-9), &box.lower(i));
      }
    }
    if ((box.lower.array() > box.upper.array()).any()) return false;
    if (!changed) break;
  }
  return true;
}

struct NodeEval {
  bool empty = false;
  bool solved = false;  // bound and x come from a barrier run
  double bound = -kInf;
  Eigen::VectorXd x;
  Eigen::VectorXd chord_error;
  std::string culprit;
};

// Strictly feasible start derived from the parent's relaxed point, pulled
// into the child box and then toward its center; empty when neither works.
std::optional<Eigen::VectorXd> warm_start(const internal::Relaxation& rel,
                                          const Box& box,
                                          const Eigen::VectorXd& parent_x) {
  const Eigen::VectorXd width = box.upper - box.lower;
  const Eigen::VectorXd inner_lo = box.lower + 0.05 * width;
  const Eigen::VectorXd inner_hi = box.upper - 0.05 * width;
  const Eigen::VectorXd clamped = parent_x.cwiseMax(inner_lo).cwiseMin(inner_hi);
  const Eigen::VectorXd center = 0.5 * (box.lower + box.upper);
  for (double pull : {0.0, 0.5}) {
    Eigen::VectorXd w = rel.lift(clamped + pull * (center - clamped));
    if (rel.strictly_feasible(w)) return w;
  }
  return std::nullopt;
}

NodeEval evaluate(const AllocationProblem& problem, const Box& box,
                  const BarrierSettings& settings,
                  const Eigen::VectorXd* parent_x = nullptr) {
  internal::RelaxationSpec spec;
  spec.lower = box.lower;
  spec.upper = box.upper;
  spec.secant = true;
  spec.loosen = kNodeLoosen;
  spec.z_lower = box.z_lower;
  spec.z_upper = box.z_upper;
  internal::Relaxation rel(problem, spec);

  NodeEval ev;
  if (rel.dim() == 0) {
    ev.x = rel.expand(Eigen::VectorXd());
    if (rel.constant_slack() < -1e-9) {
      ev.empty = true;
      ev.culprit = rel.constant_slack_name();
      return ev;
    }
    ev.solved = true;
    ev.bound = rel.value_x(ev.x);
    ev.chord_error = rel.chord_error(ev.x);
    return ev;
  }
  internal::PhaseOneOutcome start;
  std::optional<Eigen::VectorXd> warm;
  if (parent_x) warm = warm_start(rel, box, *parent_x);
  if (warm) {
    start.interior = internal::Interior::kNonempty;
    start.w = std::move(*warm);
  } else {
    start = internal::run_phase_one(rel, settings);
  }
  if (start.interior == internal::Interior::kInfeasible) {
    ev.empty = true;
    ev.culprit = start.most_violated;
    return ev;
  }
  if (start.interior == internal::Interior::kEmpty) {
    ev.x = rel.expand(start.w);
    ev.chord_error = Eigen::VectorXd::Zero(problem.selector().rows());
    return ev;
  }
  internal::BarrierRun run = internal::run_barrier(
      internal::objective_of(rel), rel.A(), rel.b(), start.w, settings, false);
  ev.solved = true;
  ev.x = rel.expand(run.w);
  ev.bound = rel.dual_bound(run.w, run.t);
  ev.chord_error = rel.chord_error(ev.x);
  return ev;
}

BarrierSettings node_settings(const BarrierSettings& settings) {
  BarrierSettings s = settings;
  s.outer_tolerance = std::min(settings.outer_tolerance, 1e-8);
  s.max_outer_iters = std::max(settings.max_outer_iters, 14);
  return s;
}

bool is_feasible(const AllocationProblem& problem, const Box& root,
                 const Eigen::VectorXd& x) {
  if ((x.array() < root.lower.array()).any() ||
      (x.array() > root.upper.array()).any())
    return false;
  return constraint_residuals(problem, x).max_violation() <=
         feasibility_tol(problem);
}

// Greedy covering from `x` (already integral and inside the box). Returns
// false when some deficit cannot be reduced; `stuck` then names the resource.
bool greedy_cover(const AllocationProblem& problem, const Eigen::VectorXd& upper,
                  Eigen::VectorXd& x, std::size_t* stuck) {
  const Eigen::MatrixXd& K = problem.composition();
  const Eigen::VectorXd& c = problem.costs();
  while (true) {
    const Eigen::VectorXd delta = problem.demand - K * x;
    if ((delta.array() <= 0.0).all()) return true;
    Eigen::Index best = -1;
    double best_ratio = -kInf;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x(i) + 1.0 > upper(i) + 1e-9) continue;
      double score = 0.0;
      for (Eigen::Index r = 0; r < delta.size(); ++r)
        if (delta(r) > 0.0) score += K(r, i) * delta(r);
      if (score <= 0.0) continue;
      double ratio = c(i) > 0.0 ? score / c(i) : kInf;
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = i;
      }
    }
    if (best < 0) {
      Eigen::Index r = 0;
      delta.maxCoeff(&r);
      *stuck = static_cast<std::size_t>(r);
      return false;
    }
    x(best) += 1.0;
  }
}

IntegerSolution finish(const AllocationProblem& problem, Eigen::VectorXd x,
                       IntegerMethod method) {
  IntegerSolution sol;
  sol.breakdown = objective(problem, x);
  sol.max_violation = constraint_residuals(problem, x).max_violation();
  sol.x_hat = Allocation::integer(std::move(x));
  sol.method = method;
  return sol;
}

struct OpenNode {
  double bound;
  std::size_t id;
  Box box;
  Eigen::VectorXd x;
  Eigen::VectorXd chord_error;
};

struct WorseNode {
  bool operator()(const OpenNode& a, const OpenNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

const char* to_string(IntegerMethod method) {
  switch (method) {
    case IntegerMethod::kBranchAndBound:
      return "branch_and_bound";
    case IntegerMethod::kRounding:
      return "rounding";
  }
  return "unknown";
}

IntegerSolution greedy_round(const AllocationProblem& problem,
                             const Allocation& x_relaxed) {
  problem.validate();
  const auto n = static_cast<Eigen::Index>(problem.num_instances());
  if (x_relaxed.counts.size() != n)
    throw DimensionError("relaxed allocation has the wrong length");
  if ((x_relaxed.counts.array() < -1e-9).any())
    throw ValidationError("relaxed allocation must be nonnegative");
  const Box box = root_box(problem);
  Eigen::VectorXd x = (x_relaxed.counts.array() + 1e-9).floor().matrix();
  x = x.cwiseMax(box.lower).cwiseMin(box.upper.cwiseMax(box.lower));
  std::size_t stuck = 0;
  if (!greedy_cover(problem, box.upper, x, &stuck)) {
    const std::string& name = problem.catalog->schema().name(stuck);
    double deficit = problem.demand(static_cast<Eigen::Index>(stuck)) -
                     problem.composition().row(static_cast<Eigen::Index>(stuck)).dot(x);
    throw InfeasibleError("uncoverable resource " + name, deficit);
  }
  IntegerSolution sol = finish(problem, std::move(x), IntegerMethod::kRounding);
  sol.completed = true;
  return sol;
}

AllocationProblem apply_incremental(const AllocationProblem& problem) {
  if (!problem.current || !problem.max_deviation)
    throw ValidationError("incremental adoption needs current and max_deviation");
  problem.validate();
  AllocationProblem out = problem;
  const Eigen::VectorXd& xc = *problem.current;
  const double delta = *problem.max_deviation;
  out.lower_bounds =
      problem.effective_lower_bounds().cwiseMax((xc.array() - delta).matrix());
  out.upper_bounds =
      problem.effective_upper_bounds().cwiseMin((xc.array() + delta).matrix());
  return out;
}

std::optional<double> node_lower_bound(const AllocationProblem& problem,
                                       const Eigen::VectorXd& lower,
                                       const Eigen::VectorXd& upper,
                                       const BarrierSettings& settings) {
  problem.validate();
  settings.validate();
  Box box = root_box(problem);
  if (lower.size() != box.lower.size() || upper.size() != box.upper.size())
    throw DimensionError("node box has the wrong length");
  box.lower = box.lower.cwiseMax(lower);
  box.upper = box.upper.cwiseMin(upper);
  if (!tighten(problem, box)) return std::nullopt;
  NodeEval ev = evaluate(problem, box, node_settings(settings));
  if (ev.empty) return std::nullopt;
  return ev.bound;
}

IntegerSolution solve_integer(const AllocationProblem& problem,
                              const BarrierSettings& settings,
                              const BnbBudget& budget) {
  problem.validate();
  settings.validate();
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
        .count();
  };
  const BarrierSettings node = node_settings(settings);
  const Box root = root_box(problem);

  std::optional<Eigen::VectorXd> incumbent;
  double incumbent_value = kInf;
  std::vector<double> trace;
  auto offer = [&](const Eigen::VectorXd& x) {
    if (!is_feasible(problem, root, x)) return;
    double value = objective(problem, x).total;
    if (value < incumbent_value) {
      incumbent_value = value;
      incumbent = x;
      trace.push_back(value);
    }
  };
  // Nearest rounding, then floor plus greedy cover.
  auto try_heuristics = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd nearest = x.array().round().matrix();
    offer(nearest.cwiseMax(root.lower).cwiseMin(root.upper));
    Eigen::VectorXd repaired = (x.array() + 1e-9).floor().matrix();
    repaired = repaired.cwiseMax(root.lower).cwiseMin(root.upper);
    std::size_t stuck = 0;
    if (greedy_cover(problem, root.upper, repaired, &stuck)) offer(repaired);
  };

  Box root_tight = root;
  if (!tighten(problem, root_tight))
    throw InfeasibleError("no integer allocation fits the bounds and demand", 0.0);
  NodeEval root_eval = evaluate(problem, root_tight, node);
  std::size_t nodes = 1;
  if (root_eval.empty) {
    throw InfeasibleError(root_eval.culprit.empty() ? "constraints" : root_eval.culprit,
                          0.0);
  }
  try_heuristics(root_eval.x);

  std::priority_queue<OpenNode, std::vector<OpenNode>, WorseNode> open;
  std::size_t next_id = 0;
  open.push({root_eval.bound, next_id++, root_tight, root_eval.x,
             root_eval.chord_error});

  auto closed = [&](double bound) { return bound >= incumbent_value - kPruneTol; };

  while (!open.empty()) {
    if (nodes >= budget.node_limit || elapsed() > budget.time_limit_secs) break;
    OpenNode cur = open.top();
    open.pop();
    if (closed(cur.bound)) continue;

    // Choose the split.
    std::vector<Box> children;
    const Box& b = cur.box;
    Eigen::Index j_best = -1;
    double err_best = kPruneTol;
    for (Eigen::Index j = 0; j < cur.chord_error.size(); ++j) {
      if (b.z_upper(j) - b.z_lower(j) < 1.0) continue;
      if (cur.chord_error(j) > err_best) {
        err_best = cur.chord_error(j);
        j_best = j;
      }
    }
    if (j_best >= 0) {
      const double z = problem.selector().row(j_best).dot(cur.x);
      double split = std::floor(z + kIntTol);
      split = std::clamp(split, b.z_lower(j_best), b.z_upper(j_best) - 1.0);
      Box left = b, right = b;
      left.z_upper(j_best) = split;
      right.z_lower(j_best) = split + 1.0;
      children = {std::move(left), std::move(right)};
    } else {
      Eigen::Index i_best = -1;
      double frac_best = kIntTol;
      for (Eigen::Index i = 0; i < cur.x.size(); ++i) {
        if (b.upper(i) <= b.lower(i)) continue;
        double frac = std::abs(cur.x(i) - std::round(cur.x(i)));
        if (frac > frac_best) {
          frac_best = frac;
          i_best = i;
        }
      }
      double split = 0.0;
      if (i_best >= 0) {
        split = std::floor(cur.x(i_best));
      } else {
        // Integral relaxed point that did not close the node: halve the
        // widest remaining range.
        double width_best = 0.0;
        for (Eigen::Index i = 0; i < cur.x.size(); ++i) {
          double width = b.upper(i) - b.lower(i);
          if (width > width_best) {
            width_best = width;
            i_best = i;
          }
        }
        if (i_best < 0) continue;  // a single point, already offered
        split = std::floor(0.5 * (b.lower(i_best) + b.upper(i_best)));
      }
      split = std::clamp(split, b.lower(i_best), b.upper(i_best) - 1.0);
      Box left = b, right = b;
      left.upper(i_best) = split;
      right.lower(i_best) = split + 1.0;
      children = {std::move(left), std::move(right)};
    }

    for (Box& child : children) {
      if (!tighten(problem, child)) continue;
      NodeEval ev = evaluate(problem, child, node, &cur.x);
      ++nodes;
      if (ev.empty) continue;
      try_heuristics(ev.x);
      double bound = ev.solved ? std::max(ev.bound, cur.bound) : cur.bound;
      if (closed(bound)) continue;
      open.push({bound, next_id++, std::move(child), std::move(ev.x),
                 std::move(ev.chord_error)});
    }
  }

  const bool completed = open.empty();
  if (!incumbent) {
    if (completed)
      throw InfeasibleError("no integer allocation satisfies the constraints", 0.0);
    IntegerSolution sol = greedy_round(problem, Allocation::continuous(root_eval.x));
    sol.nodes_explored = nodes;
    sol.completed = false;
    return sol;
  }
  IntegerSolution sol =
      finish(problem, *incumbent, IntegerMethod::kBranchAndBound);
  sol.nodes_explored = nodes;
  sol.completed = completed;
  double best_open = kInf;
  // The heap top is the smallest bound, but pruned entries may sit there.
  while (!open.empty() && closed(open.top().bound)) open.pop();
  if (!open.empty()) best_open = open.top().bound;
  sol.bound_gap = completed || best_open == kInf
                      ? 0.0
                      : std::max(0.0, incumbent_value - best_open);
  sol.incumbent_trace = std::move(trace);
  return sol;
}

}  // namespace nodemix
