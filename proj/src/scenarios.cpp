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

#include "nodemix/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "format.hpp"
#include "json_util.hpp"
#include "nodemix/errors.hpp"

namespace nodemix {
namespace {

using internal::json;

std::size_t resource_index(const InstanceCatalog& catalog, std::string_view name) {
  std::optional<std::size_t> r = catalog.schema().find(name);
  if (!r)
    throw ValidationError("catalog schema has no resource '" + std::string(name) + "'");
  return *r;
}

struct Shape {
  double cpu;
  double mem;
  double cost;
};

std::vector<Shape> shapes(const InstanceCatalog& catalog) {
  const std::size_t cpu = resource_index(catalog, "cpu_cores");
  const std::size_t mem = resource_index(catalog, "memory_gb");
  std::vector<Shape> out;
  for (const InstanceType& inst : catalog.instances())
    out.push_back({inst.capacities[cpu], inst.capacities[mem], inst.hourly_cost});
  return out;
}

NodePool pool_of(std::size_t instance) {
  NodePool pool;
  pool.instance = instance;
  return pool;
}

Eigen::VectorXd demand_vector(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double x : values) v(k++) = x;
  return v;
}

void require_nonempty(const std::vector<NodePool>& pools, const std::string& what) {
  if (pools.empty()) throw ValidationError("catalog has no " + what);
}

double median_key_cost(const ComparisonReport& r) { return r.optimized.total_cost; }

}  // namespace

bool InstanceFilter::admits(const InstanceCatalog& catalog,
                            std::size_t instance) const {
  const std::size_t r = resource_index(catalog, resource);
  return catalog.instance(instance).capacities[r] <= max_value;
}

const char* to_string(OptimizerScope scope) {
  switch (scope) {
    case OptimizerScope::kCatalog:
      return "catalog";
    case OptimizerScope::kPools:
      return "pools";
  }
  return "unknown";
}

void Scenario::validate(const InstanceCatalog& catalog) const {
  const std::string where = "scenario " + name;
  if (static_cast<std::size_t>(demand.size()) != catalog.num_resources())
    throw DimensionError(where + ": demand has the wrong length");
  if (!demand.allFinite() || (demand.array() < 0.0).any())
    throw ValidationError(where + ": demand must be finite and nonnegative");
  if (!(waste_fraction >= 0.0) || !std::isfinite(waste_fraction))
    throw ValidationError(where + ": waste_fraction must be nonnegative");
  if (repetitions < 1) throw ValidationError(where + ": repetitions must be >= 1");
  if (max_deviation && !(*max_deviation >= 0.0))
    throw ValidationError(where + ": max_deviation must be nonnegative");
  if (filter) resource_index(catalog, filter->resource);
  for (const NodePool& pool : pools) {
    if (pool.instance >= catalog.num_instances())
      throw ValidationError(where + ": pool instance out of range");
    if (pool.min_nodes > pool.current_nodes || pool.current_nodes > pool.max_nodes)
      throw ValidationError(where + ": pool needs min <= current <= max");
    if (filter && !filter->admits(catalog, pool.instance))
      throw ValidationError(where + ": pool " + catalog.instance(pool.instance).sku +
                            " fails the instance filter");
  }
  if (existing) {
    if (static_cast<std::size_t>(existing->size()) != catalog.num_instances())
      throw DimensionError(where + ": existing allocation has the wrong length");
    for (Eigen::Index i = 0; i < existing->size(); ++i) {
      const double v = (*existing)(i);
      if (v < 0.0 || v != std::floor(v))
        throw ValidationError(where + ": existing counts must be whole numbers");
      if (v > 0.0 && filter && !filter->admits(catalog, static_cast<std::size_t>(i)))
        throw ValidationError(where + ": existing " + catalog.instance(static_cast<std::size_t>(i)).sku +
                              " fails the instance filter");
    }
  }
}

std::vector<Scenario> builtin_scenarios(const CatalogPtr& catalog,
                                        int small_per_provider) {
  if (!catalog) throw ValidationError("builtin scenarios need a catalog");
  if (small_per_provider != 1 && small_per_provider != 2)
    throw ValidationError("small_per_provider must be 1 or 2");
  if (catalog->num_resources() != 4)
    throw ValidationError("builtin scenarios need four resources");
  const std::vector<Shape> shape = shapes(*catalog);
  const std::size_t n = catalog->num_instances();
  auto ratio = [&](std::size_t i) { return shape[i].mem / shape[i].cpu; };
  auto cheaper = [&](std::size_t a, std::size_t b) {
    return shape[a].cost < shape[b].cost || (shape[a].cost == shape[b].cost && a < b);
  };
  std::vector<Scenario> out;

  // S1: greenfield; the autoscaler has general-purpose pools (3-5 GB per
  // core, 2-8 cores).
  {
    Scenario s;
    s.name = "S1";
    s.description = "basic web application, greenfield deployment";
    s.demand = demand_vector({8, 16, 4, 100});
    for (std::size_t i = 0; i < n; ++i)
      if (ratio(i) >= 3.0 && ratio(i) <= 5.0 && shape[i].cpu >= 2 && shape[i].cpu <= 8)
        s.pools.push_back(pool_of(i));
    require_nonempty(s.pools, "general-purpose type for S1");
    out.push_back(std::move(s));
  }

  // S2: the cheapest small (<= 2 cores) type of each provider is already
  // running; the autoscaler may only grow those pools.
  {
    Scenario s;
    s.name = "S2";
    s.description = "microservices with existing small instances";
    s.demand = demand_vector({16, 32, 8, 200});
    s.existing = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < catalog->num_providers(); ++j) {
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < n; ++i) {
        if (catalog->provider_index(i) != j || shape[i].cpu > 2) continue;
        if (!best || cheaper(i, *best)) best = i;
      }
      if (!best) continue;
      (*s.existing)(static_cast<Eigen::Index>(*best)) = small_per_provider;
      NodePool pool = pool_of(*best);
      pool.min_nodes = pool.current_nodes = static_cast<std::size_t>(small_per_provider);
      s.pools.push_back(pool);
    }
    require_nonempty(s.pools, "small type for S2");
    s.max_deviation = 8.0;
    out.push_back(std::move(s));
  }

  // S3: nine pools, the three cheapest per core in each size tier; the
  // optimizer is held to the same types.
  {
    Scenario s;
    s.name = "S3";
    s.description = "data processing across small, medium and large pools";
    s.demand = demand_vector({24, 64, 12, 300});
    const double tiers[3][2] = {{2, 4}, {4, 8}, {8, 1e300}};
    for (const auto& tier : tiers) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i)
        if (shape[i].cpu >= tier[0] && shape[i].cpu < tier[1]) members.push_back(i);
      std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return shape[a].cost / shape[a].cpu < shape[b].cost / shape[b].cpu;
      });
      if (members.size() < 3)
        throw ValidationError("catalog has fewer than three types in an S3 tier");
      for (std::size_t k = 0; k < 3; ++k) s.pools.push_back(pool_of(members[k]));
    }
    s.scope = OptimizerScope::kPools;
    out.push_back(std::move(s));
  }

  // S4: one high-memory node per provider already runs; the autoscaler has
  // memory-optimized pools (>= 6 GB per core).
  {
    Scenario s;
    s.name = "S4";
    s.description = "memory-intensive workload on existing high-memory nodes";
    s.demand = demand_vector({32, 128, 12, 500});
    s.existing = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < catalog->num_providers(); ++j) {
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < n; ++i) {
        if (catalog->provider_index(i) != j || shape[i].mem < 16 || ratio(i) < 6.0) continue;
        if (!best || cheaper(i, *best)) best = i;
      }
      if (best) (*s.existing)(static_cast<Eigen::Index>(*best)) = 1;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (ratio(i) >= 6.0) s.pools.push_back(pool_of(i));
    require_nonempty(s.pools, "memory-optimized type for S4");
    if (s.existing->sum() == 0.0)
      throw ValidationError("catalog has no high-memory type for S4");
    out.push_back(std::move(s));
  }

  // S5: only types with at most two cores, for both sides.
  {
    Scenario s;
    s.name = "S5";
    s.description = "constrained environment with small instances only";
    s.demand = demand_vector({32, 64, 12, 300});
    s.filter = InstanceFilter{catalog->schema().name(resource_index(*catalog, "cpu_cores")), 2.0};
    for (std::size_t i = 0; i < n; ++i)
      if (s.filter->admits(*catalog, i)) s.pools.push_back(pool_of(i));
    require_nonempty(s.pools, "type with at most two cores for S5");
    out.push_back(std::move(s));
  }
  for (const Scenario& s : out) s.validate(*catalog);
  return out;
}

AllocationProblem scenario_problem(const Scenario& scenario,
                                   const CatalogPtr& catalog,
                                   const PenaltyParams& params) {
  scenario.validate(*catalog);
  AllocationProblem problem = make_problem(catalog, scenario.demand, params);
  problem.waste = scenario.waste_fraction * scenario.demand;
  const auto n = static_cast<Eigen::Index>(catalog->num_instances());
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(n, kMaxCountPerType);
  bool restricted = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    bool allowed = !scenario.filter || scenario.filter->admits(*catalog, idx);
    if (scenario.scope == OptimizerScope::kPools) {
      bool in_pools = std::any_of(scenario.pools.begin(), scenario.pools.end(),
                                  [&](const NodePool& p) { return p.instance == idx; });
      bool running = scenario.existing && (*scenario.existing)(i) > 0.0;
      allowed = allowed && (in_pools || running);
    }
    if (!allowed) {
      upper(i) = 0.0;
      restricted = true;
    }
  }
  if (restricted) problem.upper_bounds = upper;
  if (scenario.existing) problem.lower_bounds = *scenario.existing;
  if (scenario.max_deviation) {
    problem.current = scenario.existing ? *scenario.existing
                                        : Eigen::VectorXd::Zero(n);
    problem.max_deviation = *scenario.max_deviation;
  }
  problem.validate();
  return problem;
}

Scenario parse_scenario(std::string_view text, const InstanceCatalog& catalog) {
  const json doc = internal::parse_json_text(text, "scenario JSON");
  if (!doc.is_object()) throw ParseError("scenario JSON: expected an object");
  auto string_field = [&](const char* key, bool required) -> std::string {
    if (!doc.contains(key)) {
      if (required) throw ParseError(std::string("scenario JSON: missing '") + key + "'");
      return {};
    }
    if (!doc[key].is_string())
      throw ParseError(std::string("scenario JSON: '") + key + "' must be a string");
    return doc[key].get<std::string>();
  };
  Scenario s;
  s.name = string_field("name", true);
  s.description = string_field("description", false);
  if (!doc.contains("demand")) throw ParseError("scenario JSON: missing 'demand'");
  s.demand = internal::vector_from_json(
      doc["demand"], "demand", static_cast<Eigen::Index>(catalog.num_resources()));
  if (doc.contains("waste_fraction"))
    s.waste_fraction = internal::number_from_json(doc["waste_fraction"], "waste_fraction");
  if (doc.contains("pools")) {
    if (!doc["pools"].is_array()) throw ParseError("scenario JSON: 'pools' must be an array");
    for (std::size_t k = 0; k < doc["pools"].size(); ++k)
      s.pools.push_back(internal::pool_from_json(doc["pools"][k], catalog,
                                                 "scenario pool " + std::to_string(k)));
  }
  if (doc.contains("existing") && !doc["existing"].is_null()) {
    const json& list = doc["existing"];
    if (!list.is_array()) throw ParseError("scenario JSON: 'existing' must be an array");
    s.existing = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(catalog.num_instances()));
    for (const json& rec : list) {
      if (!rec.is_object() || !rec.contains("provider") || !rec.contains("instance_sku") ||
          !rec.contains("count") || !rec["count"].is_number_integer())
        throw ParseError("scenario JSON: existing entries need provider, instance_sku, count");
      auto idx = catalog.find(rec["provider"].get<std::string>(),
                              rec["instance_sku"].get<std::string>());
      if (!idx) throw ValidationError("scenario JSON: unknown existing instance");
      (*s.existing)(static_cast<Eigen::Index>(*idx)) += rec["count"].get<double>();
    }
  }
  if (doc.contains("filter") && !doc["filter"].is_null()) {
    const json& f = doc["filter"];
    if (!f.is_object() || !f.contains("resource") || !f["resource"].is_string() ||
        !f.contains("max_value"))
      throw ParseError("scenario JSON: filter needs 'resource' and 'max_value'");
    s.filter = InstanceFilter{f["resource"].get<std::string>(),
                              internal::number_from_json(f["max_value"], "filter.max_value")};
  }
  const std::string scope = string_field("optimizer_scope", false);
  if (scope == "pools") s.scope = OptimizerScope::kPools;
  else if (scope.empty() || scope == "catalog") s.scope = OptimizerScope::kCatalog;
  else throw ParseError("scenario JSON: optimizer_scope must be 'catalog' or 'pools'");
  if (doc.contains("max_deviation") && !doc["max_deviation"].is_null())
    s.max_deviation = internal::number_from_json(doc["max_deviation"], "max_deviation");
  if (doc.contains("repetitions")) {
    if (!doc["repetitions"].is_number_integer() || doc["repetitions"].get<long long>() < 1)
      throw ParseError("scenario JSON: repetitions must be a positive integer");
    s.repetitions = doc["repetitions"].get<std::size_t>();
  }
  s.validate(catalog);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path,
                       const InstanceCatalog& catalog) {
  return parse_scenario(internal::read_file(path), catalog);
}

std::string serialize_scenario(const Scenario& scenario,
                               const InstanceCatalog& catalog) {
  json doc;
  doc["name"] = scenario.name;
  doc["description"] = scenario.description;
  doc["demand"] = internal::vector_json(scenario.demand);
  doc["waste_fraction"] = scenario.waste_fraction;
  doc["pools"] = json::array();
  for (const NodePool& pool : scenario.pools)
    doc["pools"].push_back(internal::pool_json(pool, catalog));
  if (scenario.existing) {
    json list = json::array();
    for (Eigen::Index i = 0; i < scenario.existing->size(); ++i) {
      if ((*scenario.existing)(i) == 0.0) continue;
      const InstanceType& inst = catalog.instance(static_cast<std::size_t>(i));
      list.push_back({{"provider", inst.provider_id},
                      {"instance_sku", inst.sku},
                      {"count", static_cast<long long>((*scenario.existing)(i))}});
    }
    doc["existing"] = list;
  } else {
    doc["existing"] = nullptr;
  }
  if (scenario.filter) {
    doc["filter"] = {{"resource", scenario.filter->resource},
                     {"max_value", scenario.filter->max_value}};
  } else {
    doc["filter"] = nullptr;
  }
  doc["optimizer_scope"] = to_string(scenario.scope);
  doc["max_deviation"] = internal::optional_json(scenario.max_deviation);
  doc["repetitions"] = scenario.repetitions;
  return doc.dump(2) + "\n";
}

ComparisonReport run_comparison(const Scenario& scenario,
                                const CatalogPtr& catalog,
                                const PenaltyParams& params, std::uint64_t seed,
                                const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const AllocationProblem problem = scenario_problem(scenario, catalog, params);
  if (options.starts < 1) throw ValidationError("starts must be >= 1");

  std::vector<ComparisonReport> runs;
  for (std::size_t rep = 0; rep < scenario.repetitions; ++rep) {
    const std::uint64_t rep_seed = seed + rep;
    ComparisonReport r;
    r.scenario = scenario.name;
    r.demand = scenario.demand;
    r.seed = seed;

    Expander expander = options.expander;
    if (expander.kind == ExpanderKind::kRandom) expander.seed = rep_seed;
    r.baseline_run = run_baseline(*catalog, scenario.pools, scenario.existing,
                                  scenario.demand, expander,
                                  options.utilization_threshold);
    r.baseline = evaluate(*catalog, scenario.demand, r.baseline_run.allocation.counts);

    try {
      r.relaxed = options.starts > 1
                      ? multi_start(problem, options.barrier, options.starts, rep_seed)
                      : solve_relaxed(problem, options.barrier);
      r.relaxed_kkt =
          kkt_report(problem, r.relaxed.x_star.counts, r.relaxed.multipliers).scaled();
      r.integer = solve_integer(problem, options.barrier, options.budget);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(scenario.name + ": " + e.detail(), e.max_violation());
    }
    r.optimized = evaluate(problem, r.integer.x_hat);
    r.comparison = compare(r.baseline, r.optimized);
    runs.push_back(std::move(r));
  }

  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (median_key_cost(runs[a]) != median_key_cost(runs[b]))
      return median_key_cost(runs[a]) < median_key_cost(runs[b]);
    return runs[a].baseline.total_cost < runs[b].baseline.total_cost;
  });
  const std::size_t pick = order[(order.size() - 1) / 2];
  ComparisonReport report = std::move(runs[pick]);
  report.repetitions = scenario.repetitions;
  report.median_repetition = pick;
  report.median_of_repetitions = scenario.repetitions > 1;
  report.elapsed_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::vector<GridRow> grid_search(const Scenario& scenario,
                                 const CatalogPtr& catalog,
                                 const ParameterGrid& grid, std::uint64_t seed,
                                 const RunOptions& options) {
  if (grid.alpha.empty() || grid.beta1.empty() || grid.beta2.empty() ||
      grid.beta3.empty() || grid.gamma.empty())
    throw ValidationError("every grid dimension needs at least one value");
  Scenario single = scenario;
  single.repetitions = 1;
  std::vector<GridRow> rows;
  for (double alpha : grid.alpha)
    for (double beta1 : grid.beta1)
      for (double beta2 : grid.beta2)
        for (double beta3 : grid.beta3)
          for (double gamma : grid.gamma) {
            GridRow row;
            row.params = PenaltyParams{alpha, beta1, beta2, beta3, gamma};
            row.params.validate();
            try {
              ComparisonReport r = run_comparison(single, catalog, row.params, seed, options);
              row.feasible = true;
              row.baseline = r.baseline;
              row.optimized = r.optimized;
              row.objective = r.integer.breakdown.total;
            } catch (const InfeasibleError& e) {
              row.error = e.what();
            }
            rows.push_back(std::move(row));
          }
  return rows;
}

double metric_value(const EvaluationMetrics& metrics, std::string_view name) {
  if (name == "cost") return metrics.total_cost;
  if (name == "fragmentation") return static_cast<double>(metrics.provider_fragmentation);
  if (name == "diversity") return static_cast<double>(metrics.instance_diversity);
  if (name == "overprovision") return metrics.mean_overprovision_pct.value_or(0.0);
  if (name == "utilization") return -metrics.mean_utilization.value_or(0.0);
  throw ValidationError("unknown metric '" + std::string(name) + "'");
}

std::vector<GridRow> pareto_frontier(const std::vector<GridRow>& rows,
                                     std::string_view first,
                                     std::string_view second) {
  std::vector<std::size_t> feasible;
  std::vector<std::pair<double, double>> point(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!rows[k].feasible) continue;
    point[k] = {metric_value(rows[k].optimized, first),
                metric_value(rows[k].optimized, second)};
    feasible.push_back(k);
  }
  std::vector<std::size_t> keep;
  for (std::size_t a : feasible) {
    bool dominated = false;
    for (std::size_t b : feasible) {
      if (point[b].first <= point[a].first && point[b].second <= point[a].second &&
          (point[b].first < point[a].first || point[b].second < point[a].second)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) keep.push_back(a);
  }
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    return point[a].first < point[b].first;
  });
  std::vector<GridRow> out;
  for (std::size_t k : keep) out.push_back(rows[k]);
  return out;
}

std::vector<SensitivityRow> sensitivity(const Scenario& scenario,
                                        const CatalogPtr& catalog,
                                        const PenaltyParams& params,
                                        double perturbation, std::uint64_t seed,
                                        const RunOptions& options) {
  if (!(perturbation > 0.0 && perturbation < 1.0))
    throw ValidationError("perturbation must lie in (0, 1)");
  Scenario single = scenario;
  single.repetitions = 1;
  auto cost_at = [&](const PenaltyParams& p) {
    return run_comparison(single, catalog, p, seed, options).optimized.total_cost;
  };
  const double base = cost_at(params);
  struct Knob {
    const char* name;
    double PenaltyParams::*field;
  };
  const Knob knobs[] = {{"alpha", &PenaltyParams::alpha},
                        {"beta1", &PenaltyParams::beta1},
                        {"beta2", &PenaltyParams::beta2},
                        {"beta3", &PenaltyParams::beta3},
                        {"gamma", &PenaltyParams::gamma}};
  std::vector<SensitivityRow> rows;
  for (const Knob& knob : knobs) {
    SensitivityRow row;
    row.parameter = knob.name;
    row.value = params.*knob.field;
    row.cost = base;
    PenaltyParams plus = params;
    PenaltyParams minus = params;
    if (row.value == 0.0) {
      plus.*knob.field = perturbation;
      row.cost_minus = base;
      row.cost_plus = cost_at(plus);
      row.one_sided = true;
      row.note = "parameter is 0: one-sided step of +" +
                 internal::format_double(perturbation) + ", per unit of the parameter";
      row.elasticity = base != 0.0 ? (row.cost_plus - base) / base / perturbation : 0.0;
    } else {
      plus.*knob.field = row.value * (1.0 + perturbation);
      minus.*knob.field = row.value * (1.0 - perturbation);
      row.cost_plus = cost_at(plus);
      row.cost_minus = cost_at(minus);
      row.elasticity =
          base != 0.0 ? (row.cost_plus - row.cost_minus) / base / (2.0 * perturbation) : 0.0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace nodemix
