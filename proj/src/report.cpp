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

#include "nodemix/report.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

#include "format.hpp"
#include "json_util.hpp"
#include "nodemix/errors.hpp"

namespace nodemix {
namespace {

using internal::format_double;
using internal::json;
using internal::optional_json;
using internal::vector_json;

json optional_vector_json(const std::vector<std::optional<double>>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(optional_json(v));
  return out;
}

json resource_names(const ResourceSchema& schema) {
  json out = json::array();
  for (const ResourceSpec& r : schema.resources()) out.push_back(r.name);
  return out;
}

json metadata_json(const ReportMetadata& metadata) {
  return {{"tool", std::string("nodemix ") + kVersion},
          {"timestamp", metadata.timestamp},
          {"elapsed_secs", metadata.elapsed_secs}};
}

json params_json(const PenaltyParams& p) {
  return {{"alpha", p.alpha}, {"beta1", p.beta1}, {"beta2", p.beta2},
          {"beta3", p.beta3}, {"gamma", p.gamma}};
}

json allocation_json(const InstanceCatalog& catalog, const Eigen::VectorXd& x) {
  json nodes = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) == 0.0) continue;
    const InstanceType& inst = catalog.instance(static_cast<std::size_t>(i));
    nodes.push_back({{"provider", inst.provider_id},
                     {"instance_sku", inst.sku},
                     {"count", x(i)}});
  }
  return {{"counts", vector_json(x)}, {"nodes", std::move(nodes)}};
}

json breakdown_json(const ObjectiveBreakdown& b) {
  // Adding +0.0 turns a negated zero discount into 0.0.
  return {{"base_cost", b.base_cost},
          {"consolidation_penalty", b.consolidation_penalty},
          {"volume_discount", b.volume_discount + 0.0},
          {"shortage_penalty", b.shortage_penalty},
          {"total", b.total}};
}

json metrics_json(const EvaluationMetrics& m) {
  return {{"total_cost", m.total_cost},
          {"provided", vector_json(m.provided)},
          {"per_resource_utilization", optional_vector_json(m.per_resource_utilization)},
          {"mean_utilization", optional_json(m.mean_utilization)},
          {"shortage", m.shortage},
          {"instance_diversity", m.instance_diversity},
          {"provider_fragmentation", m.provider_fragmentation},
          {"per_resource_overprovision_pct",
           optional_vector_json(m.per_resource_overprovision_pct)},
          {"mean_overprovision_pct", optional_json(m.mean_overprovision_pct)}};
}

json kkt_json(const KktReport& k) {
  return {{"stationarity_norm", k.stationarity_norm},
          {"primal_violation", k.primal_violation},
          {"dual_violation", k.dual_violation},
          {"comp_slack_max", k.comp_slack_max},
          {"lagrangian_value", k.lagrangian_value},
          {"scale", k.scale},
          {"tie_count", k.tie_count},
          {"stationarity_interval_gap", k.stationarity_interval_gap}};
}

json gap_json(const GapEstimate& g) {
  return {{"gap", g.gap}, {"nonconvex", g.nonconvex}, {"infeasible", g.infeasible}};
}

json relaxed_json(const ContinuousSolution& s) {
  return {{"x_star", vector_json(s.x_star.counts)},
          {"breakdown", breakdown_json(s.breakdown)},
          {"converged", s.converged},
          {"mode", to_string(s.mode)},
          {"t_final", s.t_final},
          {"barrier_gap", s.barrier_gap},
          {"iterations",
           {{"phase_one", s.iterations.phase_one},
            {"inner", s.iterations.inner},
            {"outer", s.iterations.outer},
            {"convexified_steps", s.iterations.convexified_steps}}},
          {"trace", s.trace}};
}

json integer_json(const InstanceCatalog& catalog, const IntegerSolution& s) {
  return {{"allocation", allocation_json(catalog, s.x_hat.counts)},
          {"breakdown", breakdown_json(s.breakdown)},
          {"method", to_string(s.method)},
          {"completed", s.completed},
          {"nodes_explored", s.nodes_explored},
          {"bound_gap", optional_json(s.bound_gap)},
          {"max_violation", s.max_violation},
          {"incumbent_trace", s.incumbent_trace}};
}

json problem_json(const AllocationProblem& p) {
  json doc = {{"resources", resource_names(p.catalog->schema())},
              {"demand", vector_json(p.demand)},
              {"uncertainty", vector_json(p.uncertainty)},
              {"waste", vector_json(p.waste)},
              {"params", params_json(p.params)},
              {"max_deviation", optional_json(p.max_deviation)}};
  return doc;
}

json radar_json(const EvaluationMetrics& m) {
  RadarSeries series = radar_data(m);
  json points = json::array();
  for (const RadarPoint& pt : series.points)
    points.push_back({{"resource", pt.resource},
                      {"demand", pt.demand},
                      {"provided", pt.provided},
                      {"utilization", pt.utilization},
                      {"normalized_provided", pt.normalized_provided}});
  return {{"points", std::move(points)}, {"notes", series.notes}};
}

json events_json(const std::vector<ScaleEvent>& events) {
  json out = json::array();
  for (const ScaleEvent& e : events) out.push_back({{"pool", e.pool}, {"delta", e.delta}});
  return out;
}

json pools_json(const InstanceCatalog& catalog, const std::vector<NodePool>& pools) {
  json out = json::array();
  for (const NodePool& pool : pools) out.push_back(internal::pool_json(pool, catalog));
  return out;
}

json expander_json(const Expander& e) {
  json doc = {{"kind", to_string(e.kind)}};
  if (e.kind == ExpanderKind::kRandom) doc["seed"] = e.seed;
  if (e.kind == ExpanderKind::kPriority) doc["order"] = e.order;
  return doc;
}

json comparison_row_json(const ComparisonRow& row) {
  return {{"cost_savings_pct", optional_json(row.cost_savings_pct)},
          {"cost_delta", row.cost_delta},
          {"mean_utilization_delta", optional_json(row.mean_utilization_delta)},
          {"diversity_delta", row.diversity_delta},
          {"fragmentation_delta", row.fragmentation_delta},
          {"mean_overprovision_delta", optional_json(row.mean_overprovision_delta)}};
}

json grid_row_json(const GridRow& row) {
  json doc = {{"params", params_json(row.params)}, {"feasible", row.feasible}};
  if (row.feasible) {
    doc["objective"] = row.objective;
    doc["baseline"] = metrics_json(row.baseline);
    doc["optimized"] = metrics_json(row.optimized);
  } else {
    doc["error"] = row.error;
  }
  return doc;
}

std::string csv_number(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

// Quotes a field when it holds a separator, quote or line break.
std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void metrics_cells(std::ostringstream& out, const EvaluationMetrics& m) {
  out << format_double(m.total_cost) << ',' << csv_number(m.mean_utilization) << ','
      << m.instance_diversity << ',' << m.provider_fragmentation << ','
      << csv_number(m.mean_overprovision_pct);
}

std::string finish(json doc, const ReportMetadata& metadata) {
  doc["metadata"] = metadata_json(metadata);
  return doc.dump(2) + "\n";
}

}  // namespace

ReportMetadata ReportMetadata::now(double elapsed_secs) {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return {buf, elapsed_secs};
}

SolveReport solve_problem(const AllocationProblem& problem,
                          const BarrierSettings& settings, int starts,
                          std::uint64_t seed, const BnbBudget& budget) {
  if (starts < 1) throw ValidationError("starts must be >= 1");
  SolveReport report;
  report.relaxed = starts > 1 ? multi_start(problem, settings, starts, seed)
                              : solve_relaxed(problem, settings);
  report.kkt = kkt_report(problem, report.relaxed.x_star.counts,
                          report.relaxed.multipliers);
  report.gap = duality_gap_estimate(problem, report.relaxed.x_star.counts,
                                    report.relaxed.multipliers);
  report.integer = solve_integer(problem, settings, budget);
  return report;
}

std::string solve_report_json(const AllocationProblem& problem,
                              const SolveReport& report,
                              const ReportMetadata& metadata) {
  json doc = {{"kind", "solve"},
              {"problem", problem_json(problem)},
              {"integer", integer_json(*problem.catalog, report.integer)},
              {"metrics", metrics_json(evaluate(problem, report.integer.x_hat))},
              {"relaxation", relaxed_json(report.relaxed)},
              {"kkt", {{"raw", kkt_json(report.kkt)},
                       {"scaled", kkt_json(report.kkt.scaled())},
                       {"duality_gap", gap_json(report.gap)}}}};
  return finish(std::move(doc), metadata);
}

std::string kkt_report_json(const AllocationProblem& problem,
                            const ContinuousSolution& relaxed,
                            const KktReport& kkt, const GapEstimate& gap,
                            const KktTolerances& tolerances,
                            const ReportMetadata& metadata) {
  const KktReport scaled = kkt.scaled();
  const bool stationarity = scaled.stationarity_norm <= tolerances.stationarity;
  const bool primal = scaled.primal_violation <= tolerances.primal;
  const bool complementary = scaled.comp_slack_max <= tolerances.complementary;
  json doc = {{"kind", "kkt-check"},
              {"problem", problem_json(problem)},
              {"relaxation", relaxed_json(relaxed)},
              {"kkt", {{"raw", kkt_json(kkt)},
                       {"scaled", kkt_json(scaled)},
                       {"duality_gap", gap_json(gap)}}},
              {"tolerances", {{"stationarity", tolerances.stationarity},
                              {"primal", tolerances.primal},
                              {"complementary", tolerances.complementary}}},
              {"checks", {{"stationarity", stationarity},
                          {"primal", primal},
                          {"complementary", complementary}}},
              {"certified", stationarity && primal && complementary}};
  return finish(std::move(doc), metadata);
}

std::string ca_report_json(const InstanceCatalog& catalog,
                           const Eigen::VectorXd& demand, const CaResult& result,
                           const Expander& expander,
                           const ReportMetadata& metadata) {
  json doc = {{"kind", "simulate-ca"},
              {"resources", resource_names(catalog.schema())},
              {"demand", vector_json(demand)},
              {"expander", expander_json(expander)},
              {"satisfied", result.satisfied},
              {"final_pools", pools_json(catalog, result.final_pools)},
              {"allocation", allocation_json(catalog, result.allocation.counts)},
              {"scale_events", events_json(result.scale_events)},
              {"metrics", metrics_json(evaluate(catalog, demand, result.allocation.counts))}};
  return finish(std::move(doc), metadata);
}

std::string comparison_report_json(const InstanceCatalog& catalog,
                                   const ComparisonReport& r,
                                   const ReportMetadata& metadata) {
  json doc = {
      {"kind", "comparison"},
      {"scenario", r.scenario},
      {"resources", resource_names(catalog.schema())},
      {"demand", vector_json(r.demand)},
      {"seed", r.seed},
      {"repetitions", r.repetitions},
      {"median_repetition", r.median_repetition},
      {"median_of_repetitions", r.median_of_repetitions},
      {"baseline",
       {{"satisfied", r.baseline_run.satisfied},
        {"final_pools", pools_json(catalog, r.baseline_run.final_pools)},
        {"allocation", allocation_json(catalog, r.baseline_run.allocation.counts)},
        {"scale_events", events_json(r.baseline_run.scale_events)},
        {"metrics", metrics_json(r.baseline)},
        {"radar", radar_json(r.baseline)}}},
      {"optimized",
       {{"integer", integer_json(catalog, r.integer)},
        {"metrics", metrics_json(r.optimized)},
        {"radar", radar_json(r.optimized)}}},
      {"relaxation", relaxed_json(r.relaxed)},
      {"relaxation_kkt_scaled", kkt_json(r.relaxed_kkt)},
      {"comparison", comparison_row_json(r.comparison)}};
  return finish(std::move(doc), metadata);
}

std::string summary_csv(const std::vector<ComparisonReport>& reports) {
  std::ostringstream out;
  out << "scenario,strategy,cost,mean_utilization,diversity,fragmentation,"
         "mean_overprovision_pct\n";
  for (const ComparisonReport& r : reports) {
    out << csv_text(r.scenario) << ",cluster-autoscaler,";
    metrics_cells(out, r.baseline);
    out << '\n' << csv_text(r.scenario) << ",optimizer,";
    metrics_cells(out, r.optimized);
    out << '\n';
  }
  return out.str();
}

std::string radar_csv(const std::vector<ComparisonReport>& reports) {
  std::ostringstream out;
  out << "scenario,strategy,resource,demand,provided,utilization,normalized_provided\n";
  for (const ComparisonReport& r : reports) {
    for (const auto& [strategy, metrics] :
         {std::pair<const char*, const EvaluationMetrics*>{"cluster-autoscaler", &r.baseline},
          {"optimizer", &r.optimized}}) {
      for (const RadarPoint& p : radar_data(*metrics).points)
        out << csv_text(r.scenario) << ',' << strategy << ',' << csv_text(p.resource) << ','
            << format_double(p.demand) << ',' << format_double(p.provided) << ','
            << format_double(p.utilization) << ',' << format_double(p.normalized_provided)
            << '\n';
    }
  }
  return out.str();
}

std::string grid_csv(const std::vector<GridRow>& rows) {
  std::ostringstream out;
  out << "alpha,beta1,beta2,beta3,gamma,feasible,objective,ca_cost,cost,"
         "mean_utilization,diversity,fragmentation,mean_overprovision_pct,error\n";
  for (const GridRow& row : rows) {
    const PenaltyParams& p = row.params;
    out << format_double(p.alpha) << ',' << format_double(p.beta1) << ','
        << format_double(p.beta2) << ',' << format_double(p.beta3) << ','
        << format_double(p.gamma) << ',' << (row.feasible ? "true" : "false") << ',';
    if (row.feasible) {
      out << format_double(row.objective) << ',' << format_double(row.baseline.total_cost)
          << ',';
      metrics_cells(out, row.optimized);
      out << ",\n";
    } else {
      out << ",,,,,,," << csv_text(row.error) << '\n';
    }
  }
  return out.str();
}

std::string grid_json(std::string_view kind, std::string_view scenario,
                      const std::vector<GridRow>& rows,
                      const std::vector<std::string>& objectives,
                      const ReportMetadata& metadata) {
  json list = json::array();
  for (const GridRow& row : rows) list.push_back(grid_row_json(row));
  json doc = {{"kind", std::string(kind)},
              {"scenario", std::string(scenario)},
              {"rows", std::move(list)}};
  if (!objectives.empty()) doc["objectives"] = objectives;
  return finish(std::move(doc), metadata);
}

std::string sensitivity_csv(const std::vector<SensitivityRow>& rows) {
  std::ostringstream out;
  out << "parameter,value,cost,cost_minus,cost_plus,elasticity,one_sided,note\n";
  for (const SensitivityRow& r : rows)
    out << r.parameter << ',' << format_double(r.value) << ',' << format_double(r.cost)
        << ',' << format_double(r.cost_minus) << ',' << format_double(r.cost_plus) << ','
        << format_double(r.elasticity) << ',' << (r.one_sided ? "true" : "false") << ','
        << csv_text(r.note) << '\n';
  return out.str();
}

std::string sensitivity_json(std::string_view scenario,
                             const std::vector<SensitivityRow>& rows,
                             double perturbation,
                             const ReportMetadata& metadata) {
  json list = json::array();
  for (const SensitivityRow& r : rows)
    list.push_back({{"parameter", r.parameter},
                    {"value", r.value},
                    {"cost", r.cost},
                    {"cost_minus", r.cost_minus},
                    {"cost_plus", r.cost_plus},
                    {"elasticity", r.elasticity},
                    {"one_sided", r.one_sided},
                    {"note", r.note}});
  json doc = {{"kind", "sensitivity"},
              {"scenario", std::string(scenario)},
              {"perturbation", perturbation},
              {"rows", std::move(list)}};
  return finish(std::move(doc), metadata);
}

std::string strip_metadata(std::string_view report_json) {
  json doc = internal::parse_json_text(report_json, "report JSON");
  if (doc.is_object()) doc.erase("metadata");
  return doc.dump(2) + "\n";
}

}  // namespace nodemix
