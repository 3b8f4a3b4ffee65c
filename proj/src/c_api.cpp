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

#include "nodemix/nodemix.h"

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "format.hpp"
#include "nodemix/ca_sim.hpp"
#include "nodemix/catalog.hpp"
#include "nodemix/errors.hpp"
#include "nodemix/problem_io.hpp"
#include "nodemix/report.hpp"
#include "nodemix/scenarios.hpp"

struct nm_catalog {
  nodemix::CatalogPtr catalog;
};

struct nm_problem {
  nodemix::AllocationProblem problem;
};

struct nm_scenario {
  nodemix::Scenario scenario;
  nodemix::CatalogPtr catalog;
};

struct nm_pools {
  std::vector<nodemix::NodePool> pools;
  nodemix::CatalogPtr catalog;
};

struct nm_comparison {
  nodemix::ComparisonReport report;
  nodemix::CatalogPtr catalog;
};

struct nm_grid {
  nodemix::ParameterGrid grid;
};

struct nm_table {
  std::string kind;
  std::string scenario;
  std::vector<nodemix::GridRow> rows;
  std::vector<std::string> objectives;
  double elapsed_secs = 0.0;
};

namespace {

using namespace nodemix;
using Clock = std::chrono::steady_clock;

thread_local std::string last_error;

class ArgumentError : public Error {
 public:
  using Error::Error;
};

template <typename Fn>
nm_status guard(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return NM_OK;
  } catch (const ArgumentError& e) {
    last_error = e.what();
    return NM_ERR_ARGUMENT;
  } catch (const IoError& e) {
    last_error = e.what();
    return NM_ERR_IO;
  } catch (const ParseError& e) {
    last_error = e.what();
    return NM_ERR_PARSE;
  } catch (const DimensionError& e) {
    last_error = e.what();
    return NM_ERR_DIMENSION;
  } catch (const ValidationError& e) {
    last_error = e.what();
    return NM_ERR_VALIDATION;
  } catch (const InfeasibleError& e) {
    last_error = e.what();
    return NM_ERR_INFEASIBLE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NM_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return NM_ERR_INTERNAL;
  }
}

template <typename T>
const T& need(const T* p, const char* what) {
  if (!p) throw ArgumentError(std::string(what) + " is NULL");
  return *p;
}

const char* need_str(const char* s, const char* what) {
  if (!s) throw ArgumentError(std::string(what) + " is NULL");
  return s;
}

template <typename T>
void need_out(T** out) {
  if (!out) throw ArgumentError("output pointer is NULL");
  *out = nullptr;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

double elapsed_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

nm_options options_or_default(const nm_options* options) {
  nm_options o;
  nm_options_init(&o);
  return options ? *options : o;
}

void check_options(const nm_options& o) {
  if (o.starts < 1) throw ArgumentError("starts must be >= 1");
  if (o.node_budget < 1) throw ArgumentError("node budget must be >= 1");
  if (!(o.time_budget_secs > 0.0)) throw ArgumentError("time budget must be positive");
  if (!(o.utilization_threshold > 0.0 && o.utilization_threshold <= 1.0))
    throw ArgumentError("utilization threshold must lie in (0, 1]");
  if (o.expander < NM_EXPANDER_LEAST_WASTE || o.expander > NM_EXPANDER_PRIORITY)
    throw ArgumentError("unknown expander");
}

PenaltyParams override_params(PenaltyParams p, const nm_options& o) {
  if (!std::isnan(o.alpha)) p.alpha = o.alpha;
  if (!std::isnan(o.beta1)) p.beta1 = o.beta1;
  if (!std::isnan(o.beta2)) p.beta2 = o.beta2;
  if (!std::isnan(o.beta3)) p.beta3 = o.beta3;
  if (!std::isnan(o.gamma)) p.gamma = o.gamma;
  p.validate();
  return p;
}

BnbBudget budget_of(const nm_options& o) {
  BnbBudget b;
  b.node_limit = o.node_budget;
  b.time_limit_secs = o.time_budget_secs;
  return b;
}

Expander expander_of(const nm_options& o) {
  switch (o.expander) {
    case NM_EXPANDER_RANDOM:
      return Expander::random(o.seed);
    case NM_EXPANDER_PRIORITY:
      return Expander::priority({});
    default:
      return Expander::least_waste();
  }
}

RunOptions run_options_of(const nm_options& o) {
  RunOptions r;
  r.starts = o.starts;
  r.budget = budget_of(o);
  r.expander = expander_of(o);
  r.utilization_threshold = o.utilization_threshold;
  return r;
}

AllocationProblem configured_problem(const nm_problem* problem, const nm_options& o) {
  AllocationProblem p = need(problem, "problem").problem;
  p.params = override_params(p.params, o);
  p.validate();
  return p;
}

CatalogFormat format_of(nm_format format) {
  switch (format) {
    case NM_FORMAT_JSON:
      return CatalogFormat::kJson;
    case NM_FORMAT_CSV:
      return CatalogFormat::kCsv;
  }
  throw ArgumentError("unknown format");
}

std::vector<ComparisonReport> collect(const nm_comparison* const* items, size_t count) {
  if (count > 0 && !items) throw ArgumentError("comparison list is NULL");
  std::vector<ComparisonReport> reports;
  for (size_t k = 0; k < count; ++k) reports.push_back(need(items[k], "comparison").report);
  return reports;
}

}  // namespace

extern "C" {

void nm_options_init(nm_options* options) {
  if (!options) return;
  const double unset = std::numeric_limits<double>::quiet_NaN();
  const BnbBudget budget;
  options->seed = 42;
  options->alpha = options->beta1 = options->beta2 = unset;
  options->beta3 = options->gamma = unset;
  options->starts = 1;
  options->node_budget = budget.node_limit;
  options->time_budget_secs = budget.time_limit_secs;
  options->expander = NM_EXPANDER_LEAST_WASTE;
  options->utilization_threshold = 0.5;
}

const char* nm_version(void) { return kVersion; }

const char* nm_status_string(nm_status status) {
  switch (status) {
    case NM_OK:
      return "ok";
    case NM_ERR_ARGUMENT:
      return "argument";
    case NM_ERR_IO:
      return "io";
    case NM_ERR_PARSE:
      return "parse";
    case NM_ERR_VALIDATION:
      return "validation";
    case NM_ERR_DIMENSION:
      return "dimension";
    case NM_ERR_INFEASIBLE:
      return "infeasible";
    case NM_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

const char* nm_last_error(void) { return last_error.c_str(); }

void nm_string_free(char* s) { delete[] s; }

nm_status nm_catalog_load(const char* path, nm_catalog** out) {
  return guard([&] {
    need_out(out);
    const char* p = need_str(path, "path");
    *out = new nm_catalog{load_catalog(p, format_from_path(p))};
  });
}

nm_status nm_catalog_bundled(nm_catalog** out) {
  return guard([&] {
    need_out(out);
    *out = new nm_catalog{bundled_catalog()};
  });
}

nm_status nm_catalog_synth(uint64_t seed, size_t n, size_t p, nm_catalog** out) {
  return guard([&] {
    need_out(out);
    if (p < 1 || n < p) throw ArgumentError("need n >= p >= 1");
    *out = new nm_catalog{synth_catalog(seed, n, p, ResourceSchema::standard(),
                                        SynthOptions::standard())};
  });
}

nm_status nm_catalog_save(const nm_catalog* catalog, const char* path,
                          nm_format format) {
  return guard([&] {
    const InstanceCatalog& c = *need(catalog, "catalog").catalog;
    internal::write_file_atomic(need_str(path, "path"),
                                serialize_catalog(c, format_of(format)));
  });
}

size_t nm_catalog_num_instances(const nm_catalog* catalog) {
  return catalog ? catalog->catalog->num_instances() : 0;
}

size_t nm_catalog_num_resources(const nm_catalog* catalog) {
  return catalog ? catalog->catalog->num_resources() : 0;
}

void nm_catalog_free(nm_catalog* catalog) { delete catalog; }

nm_status nm_problem_load(const nm_catalog* catalog, const char* path,
                          nm_problem** out) {
  return guard([&] {
    need_out(out);
    *out = new nm_problem{load_problem(need_str(path, "path"), need(catalog, "catalog").catalog)};
  });
}

void nm_problem_free(nm_problem* problem) { delete problem; }

nm_status nm_solve(const nm_problem* problem, const nm_options* options,
                   char** report_json) {
  return guard([&] {
    need_out(report_json);
    const nm_options o = options_or_default(options);
    check_options(o);
    const auto start = Clock::now();
    AllocationProblem p = configured_problem(problem, o);
    SolveReport report = solve_problem(p, {}, o.starts, o.seed, budget_of(o));
    *report_json = copy_string(
        solve_report_json(p, report, ReportMetadata::now(elapsed_since(start))));
  });
}

nm_status nm_kkt_check(const nm_problem* problem, const nm_options* options,
                       char** report_json) {
  return guard([&] {
    need_out(report_json);
    const nm_options o = options_or_default(options);
    check_options(o);
    const auto start = Clock::now();
    AllocationProblem p = configured_problem(problem, o);
    ContinuousSolution relaxed =
        o.starts > 1 ? multi_start(p, {}, o.starts, o.seed) : solve_relaxed(p);
    KktReport kkt = kkt_report(p, relaxed.x_star.counts, relaxed.multipliers);
    GapEstimate gap = duality_gap_estimate(p, relaxed.x_star.counts, relaxed.multipliers);
    *report_json = copy_string(kkt_report_json(p, relaxed, kkt, gap, {},
                                               ReportMetadata::now(elapsed_since(start))));
  });
}

nm_status nm_pools_load(const nm_catalog* catalog, const char* path, nm_pools** out) {
  return guard([&] {
    need_out(out);
    const CatalogPtr& c = need(catalog, "catalog").catalog;
    *out = new nm_pools{load_pools(need_str(path, "path"), *c), c};
  });
}

void nm_pools_free(nm_pools* pools) { delete pools; }

nm_status nm_simulate_ca(const nm_pools* pools, const nm_problem* problem,
                         const nm_options* options, char** report_json) {
  return guard([&] {
    need_out(report_json);
    const nm_options o = options_or_default(options);
    check_options(o);
    const auto start = Clock::now();
    const nm_pools& pl = need(pools, "pools");
    const AllocationProblem& p = need(problem, "problem").problem;
    if (p.catalog != pl.catalog && !(*p.catalog == *pl.catalog))
      throw ArgumentError("pools and problem use different catalogs");
    const Expander expander = expander_of(o);
    CaResult result = run_baseline(*pl.catalog, pl.pools, p.current, p.demand, expander,
                                   o.utilization_threshold);
    *report_json = copy_string(ca_report_json(*pl.catalog, p.demand, result, expander,
                                              ReportMetadata::now(elapsed_since(start))));
  });
}

nm_status nm_simulate_ca_scenario(const nm_scenario* scenario, const nm_options* options,
                                  char** report_json) {
  return guard([&] {
    need_out(report_json);
    const nm_options o = options_or_default(options);
    check_options(o);
    const auto start = Clock::now();
    const nm_scenario& s = need(scenario, "scenario");
    const Expander expander = expander_of(o);
    CaResult result = run_baseline(*s.catalog, s.scenario.pools, s.scenario.existing,
                                   s.scenario.demand, expander, o.utilization_threshold);
    *report_json =
        copy_string(ca_report_json(*s.catalog, s.scenario.demand, result, expander,
                                   ReportMetadata::now(elapsed_since(start))));
  });
}

size_t nm_builtin_scenario_count(void) { return 5; }

nm_status nm_scenario_builtin(const nm_catalog* catalog, size_t index,
                              int small_per_provider, nm_scenario** out) {
  return guard([&] {
    need_out(out);
    const CatalogPtr& c = need(catalog, "catalog").catalog;
    if (index >= nm_builtin_scenario_count())
      throw ArgumentError("scenario index out of range");
    std::vector<Scenario> all = builtin_scenarios(c, small_per_provider);
    *out = new nm_scenario{std::move(all[index]), c};
  });
}

nm_status nm_scenario_load(const nm_catalog* catalog, const char* path,
                           nm_scenario** out) {
  return guard([&] {
    need_out(out);
    const CatalogPtr& c = need(catalog, "catalog").catalog;
    *out = new nm_scenario{load_scenario(need_str(path, "path"), *c), c};
  });
}

nm_status nm_scenario_save(const nm_scenario* scenario, const char* path) {
  return guard([&] {
    const nm_scenario& s = need(scenario, "scenario");
    internal::write_file_atomic(need_str(path, "path"),
                                serialize_scenario(s.scenario, *s.catalog));
  });
}

const char* nm_scenario_name(const nm_scenario* scenario) {
  return scenario ? scenario->scenario.name.c_str() : "";
}

void nm_scenario_set_repetitions(nm_scenario* scenario, size_t repetitions) {
  if (scenario && repetitions > 0) scenario->scenario.repetitions = repetitions;
}

void nm_scenario_free(nm_scenario* scenario) { delete scenario; }

nm_status nm_compare(const nm_scenario* scenario, const nm_options* options,
                     nm_comparison** out) {
  return guard([&] {
    need_out(out);
    const nm_options o = options_or_default(options);
    check_options(o);
    const nm_scenario& s = need(scenario, "scenario");
    ComparisonReport report = run_comparison(s.scenario, s.catalog,
                                             override_params({}, o), o.seed,
                                             run_options_of(o));
    *out = new nm_comparison{std::move(report), s.catalog};
  });
}

nm_status nm_comparison_json(const nm_comparison* comparison, char** report_json) {
  return guard([&] {
    need_out(report_json);
    const nm_comparison& c = need(comparison, "comparison");
    *report_json = copy_string(comparison_report_json(
        *c.catalog, c.report, ReportMetadata::now(c.report.elapsed_secs)));
  });
}

double nm_comparison_baseline_cost(const nm_comparison* comparison) {
  return comparison ? comparison->report.baseline.total_cost
                    : std::numeric_limits<double>::quiet_NaN();
}

double nm_comparison_optimized_cost(const nm_comparison* comparison) {
  return comparison ? comparison->report.optimized.total_cost
                    : std::numeric_limits<double>::quiet_NaN();
}

void nm_comparison_free(nm_comparison* comparison) { delete comparison; }

nm_status nm_summary_csv(const nm_comparison* const* comparisons, size_t count,
                         char** csv) {
  return guard([&] {
    need_out(csv);
    *csv = copy_string(summary_csv(collect(comparisons, count)));
  });
}

nm_status nm_radar_csv(const nm_comparison* const* comparisons, size_t count,
                       char** csv) {
  return guard([&] {
    need_out(csv);
    *csv = copy_string(radar_csv(collect(comparisons, count)));
  });
}

nm_status nm_grid_create(nm_grid** out) {
  return guard([&] {
    need_out(out);
    *out = new nm_grid{};
  });
}

nm_status nm_grid_set(nm_grid* grid, const char* parameter, const double* values,
                      size_t count) {
  return guard([&] {
    if (!grid) throw ArgumentError("grid is NULL");
    const std::string name = need_str(parameter, "parameter");
    if (count == 0) throw ValidationError("grid dimension '" + name + "' needs a value");
    if (!values) throw ArgumentError("values is NULL");
    std::vector<double> list(values, values + count);
    if (name == "alpha") grid->grid.alpha = list;
    else if (name == "beta1") grid->grid.beta1 = list;
    else if (name == "beta2") grid->grid.beta2 = list;
    else if (name == "beta3") grid->grid.beta3 = list;
    else if (name == "gamma") grid->grid.gamma = list;
    else throw ArgumentError("unknown parameter '" + name + "'");
  });
}

void nm_grid_free(nm_grid* grid) { delete grid; }

nm_status nm_sweep(const nm_scenario* scenario, const nm_grid* grid,
                   const nm_options* options, nm_table** out) {
  return guard([&] {
    need_out(out);
    const nm_options o = options_or_default(options);
    check_options(o);
    const nm_scenario& s = need(scenario, "scenario");
    const auto start = Clock::now();
    auto table = std::make_unique<nm_table>();
    table->kind = "sweep";
    table->scenario = s.scenario.name;
    table->rows = grid_search(s.scenario, s.catalog, need(grid, "grid").grid, o.seed,
                              run_options_of(o));
    table->elapsed_secs = elapsed_since(start);
    *out = table.release();
  });
}

nm_status nm_table_pareto(const nm_table* table, const char* first, const char* second,
                          nm_table** out) {
  return guard([&] {
    need_out(out);
    const nm_table& t = need(table, "table");
    const std::string a = need_str(first, "first metric");
    const std::string b = need_str(second, "second metric");
    auto front = std::make_unique<nm_table>();
    front->kind = "pareto";
    front->scenario = t.scenario;
    front->rows = pareto_frontier(t.rows, a, b);
    front->objectives = {a, b};
    front->elapsed_secs = t.elapsed_secs;
    *out = front.release();
  });
}

size_t nm_table_rows(const nm_table* table) { return table ? table->rows.size() : 0; }

nm_status nm_table_render(const nm_table* table, nm_format format, char** out) {
  return guard([&] {
    need_out(out);
    const nm_table& t = need(table, "table");
    if (format == NM_FORMAT_CSV) {
      *out = copy_string(grid_csv(t.rows));
    } else if (format == NM_FORMAT_JSON) {
      *out = copy_string(grid_json(t.kind, t.scenario, t.rows, t.objectives,
                                   ReportMetadata::now(t.elapsed_secs)));
    } else {
      throw ArgumentError("unknown format");
    }
  });
}

void nm_table_free(nm_table* table) { delete table; }

nm_status nm_sensitivity(const nm_scenario* scenario, const nm_options* options,
                         double perturbation, nm_format format, char** out) {
  return guard([&] {
    need_out(out);
    const nm_options o = options_or_default(options);
    check_options(o);
    const nm_scenario& s = need(scenario, "scenario");
    const auto start = Clock::now();
    std::vector<SensitivityRow> rows =
        sensitivity(s.scenario, s.catalog, override_params({}, o), perturbation, o.seed,
                    run_options_of(o));
    if (format == NM_FORMAT_CSV) {
      *out = copy_string(sensitivity_csv(rows));
    } else if (format == NM_FORMAT_JSON) {
      *out = copy_string(sensitivity_json(s.scenario.name, rows, perturbation,
                                          ReportMetadata::now(elapsed_since(start))));
    } else {
      throw ArgumentError("unknown format");
    }
  });
}

nm_status nm_strip_metadata(const char* report_json, char** out) {
  return guard([&] {
    need_out(out);
    *out = copy_string(strip_metadata(need_str(report_json, "report")));
  });
}

nm_status nm_write_file(const char* path, const char* contents) {
  return guard([&] {
    internal::write_file_atomic(need_str(path, "path"), need_str(contents, "contents"));
  });
}

}  // extern "C"
