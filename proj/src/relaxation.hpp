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

// Shared machinery of the continuous and integer solvers: a relaxation of the
// allocation problem over a box, written in a reduced variable space
//
//   w = [x_free; e]      (e only when the deviation constraint is active)
//
// with every constraint as a row of A w <= b, plus the barrier loop and the
// phase-one problem that run on top of it.

#ifndef NODEMIX_SRC_RELAXATION_HPP_
#define NODEMIX_SRC_RELAXATION_HPP_

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nodemix/barrier.hpp"
#include "nodemix/model.hpp"

namespace nodemix::internal {

enum class RowKind {
  kDemandLower,      // Kx >= d - mu
  kDemandUpper,      // Kx <= d + g
  kBoxLower,         // x_i >= lower_i
  kBoxUpper,         // x_i <= upper_i
  kDeviationPlus,    // x_i - e_i <= x_current_i
  kDeviationMinus,   // -x_i - e_i <= -x_current_i
  kDeviationBudget,  // sum e <= delta_max
  kProviderLower,    // (Ex)_j >= z_lower_j
  kProviderUpper,    // (Ex)_j <= z_upper_j
};

struct RowTag {
  RowKind kind;
  std::size_t index;  // resource or instance; unused for the budget row
};

struct RelaxationSpec {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  bool enforce_upper_demand = true;  // false: quadratic penalty instead
  // Replace the concave consolidation term by its chord over the range of
  // (Ex)_j that the box allows. The result underestimates f on the box.
  bool secant = false;
  // Optional bounds on the provider totals (Ex)_j; empty means none.
  Eigen::VectorXd z_lower;
  Eigen::VectorXd z_upper;
  // Relative loosening of the demand, deviation and provider rows (box rows
  // stay exact).
  double loosen = 0.0;
};

// Box and row layout for the root problem.
RelaxationSpec root_spec(const AllocationProblem& problem);

class Relaxation {
 public:
  Relaxation(const AllocationProblem& problem, RelaxationSpec spec);

  const AllocationProblem& problem() const { return *problem_; }
  const RelaxationSpec& spec() const { return spec_; }

  Eigen::Index dim() const { return dim_; }
  bool has_deviation() const { return deviation_; }
  const std::vector<Eigen::Index>& free_vars() const { return free_; }

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  const std::vector<RowTag>& tags() const { return tags_; }
  std::string row_name(std::size_t k) const;

  // Rows whose coefficients vanished after elimination are kept out of A; the
  // smallest right-hand side among them (+inf if none) decides whether they
  // hold. Contradictory bounds (lower > upper) land here too.
  double constant_slack() const { return constant_slack_; }
  const std::string& constant_slack_name() const { return constant_name_; }

  Eigen::VectorXd expand(const Eigen::VectorXd& w) const;
  // x -> w; each e_i is |x_i - x_current_i| plus an equal share of whatever
  // budget is left.
  Eigen::VectorXd lift(const Eigen::VectorXd& x) const;
  // Center of the box in w space.
  Eigen::VectorXd box_center() const;

  bool strictly_feasible(const Eigen::VectorXd& w) const;

  // Objective (possibly with secant and waste penalty) in x space.
  double value_x(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient_x(const Eigen::VectorXd& x) const;

  double value(const Eigen::VectorXd& w) const { return value_x(expand(w)); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& w, bool convex_only) const;

  // Sum of box widths in w space; bounds ||w - w'||_1 for any two points of
  // the relaxation.
  double diameter() const;

  // Lower bound on the relaxation's minimum from the strictly feasible w and
  // barrier parameter t. Every non-box row gets the multiplier 1 / (t slack)
  // and the resulting Lagrangian, which is convex for secant relaxations, is
  // minimized over the box by its linearization at w.
  double dual_bound(const Eigen::VectorXd& w, double t) const;

  // Chord error h(z_j) - chord_j(z_j) of the consolidation term at x.
  Eigen::VectorXd chord_error(const Eigen::VectorXd& x) const;

 private:
  void add_row(const Eigen::VectorXd& coeffs, double rhs, RowTag tag);

  const AllocationProblem* problem_;
  RelaxationSpec spec_;
  bool deviation_ = false;
  std::vector<Eigen::Index> free_;
  Eigen::VectorXd fixed_x_;  // full-length x with free entries zeroed
  Eigen::Index dim_ = 0;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  std::vector<RowTag> tags_;
  std::vector<Eigen::VectorXd> pending_rows_;
  std::vector<double> pending_rhs_;
  double constant_slack_;
  std::string constant_name_;
  Eigen::VectorXd chord_slope_;
  Eigen::VectorXd chord_intercept_;
};

// Smooth objective for the barrier loop.
struct SmoothObjective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, bool)> hessian;
};

struct BarrierRun {
  Eigen::VectorXd w;
  double t = 0.0;
  bool converged = false;
  bool stopped_early = false;
  int inner = 0;
  int outer = 0;
  int convexified = 0;
  // ||grad_w(t F - sum log s)||_inf / t at the returned point.
  double stationarity = 0.0;
  std::vector<double> trace;
};

// Barrier path following from the strictly feasible w0. `stop`, if set, is
// checked after every accepted step.
BarrierRun run_barrier(const SmoothObjective& objective,
                       const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       Eigen::VectorXd w0, const BarrierSettings& settings,
                       bool record_trace,
                       const std::function<bool(const Eigen::VectorXd&)>& stop = {});

inline SmoothObjective objective_of(const Relaxation& rel) {
  return SmoothObjective{
      [&rel](const Eigen::VectorXd& w) { return rel.value(w); },
      [&rel](const Eigen::VectorXd& w) { return rel.gradient(w); },
      [&rel](const Eigen::VectorXd& w, bool convex) {
        return rel.hessian(w, convex);
      }};
}

enum class Interior { kNonempty, kEmpty, kInfeasible };

struct PhaseOneOutcome {
  Interior interior = Interior::kInfeasible;
  Eigen::VectorXd w;
  double max_violation = 0.0;
  double violation_lower_bound = 0.0;
  std::string most_violated;
  int iterations = 0;
};

PhaseOneOutcome run_phase_one(const Relaxation& rel,
                              const BarrierSettings& settings);

// Multipliers 1 / (t * slack) mapped back onto the problem's constraint
// families; eliminated variables absorb their stationarity residual into
// omega / upper.
Multipliers recover_multipliers(const Relaxation& rel, const BarrierRun& run);

}  // namespace nodemix::internal

#endif  // NODEMIX_SRC_RELAXATION_HPP_
