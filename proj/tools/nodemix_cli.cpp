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

// nodemix command-line tool. Every command goes through the C API.
//
// Exit codes: 0 success, 1 error, 2 infeasible problem, 3 some scenarios
// failed. Errors are written to stderr as {"error": {"status", "message"}}.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nodemix/nodemix.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitPartial = 3;

struct Failure {
  nm_status status;
  std::string message;
};

void check(nm_status status) {
  if (status != NM_OK) throw Failure{status, nm_last_error()};
}

[[noreturn]] void fail(const std::string& message) {
  throw Failure{NM_ERR_ARGUMENT, message};
}

int exit_code(nm_status status) {
  return status == NM_ERR_INFEASIBLE ? kExitInfeasible : kExitError;
}

void report_error(const Failure& f) {
  nlohmann::json doc = {{"error", {{"status", nm_status_string(f.status)},
                                   {"message", f.message}}}};
  std::cerr << doc.dump() << "\n";
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using String = std::unique_ptr<char, Deleter<char, nm_string_free>>;
using Catalog = std::unique_ptr<nm_catalog, Deleter<nm_catalog, nm_catalog_free>>;
using Problem = std::unique_ptr<nm_problem, Deleter<nm_problem, nm_problem_free>>;
using Scenario = std::unique_ptr<nm_scenario, Deleter<nm_scenario, nm_scenario_free>>;
using Pools = std::unique_ptr<nm_pools, Deleter<nm_pools, nm_pools_free>>;
using Comparison =
    std::unique_ptr<nm_comparison, Deleter<nm_comparison, nm_comparison_free>>;
using Grid = std::unique_ptr<nm_grid, Deleter<nm_grid, nm_grid_free>>;
using Table = std::unique_ptr<nm_table, Deleter<nm_table, nm_table_free>>;

// Flags shared by the subcommands; not every command reads all of them.
struct Config {
  std::string catalog;
  std::string problem;
  std::string scenario;
  std::string builtin;
  std::string pools;
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 42;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta1 = std::numeric_limits<double>::quiet_NaN();
  double beta2 = std::numeric_limits<double>::quiet_NaN();
  double beta3 = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  int starts = 1;
  std::size_t node_budget = 2000;
  double time_budget_secs = 10.0;
  std::string expander = "least-waste";
  double utilization_threshold = 0.5;
  std::size_t repetitions = 0;  // 0 keeps the scenario's own count
  int small_per_provider = 1;
  std::string prefix;
  bool radar = false;
  bool export_fixtures = false;
  std::string grid;
  std::vector<std::string> set;
  std::string objectives = "cost,fragmentation";
  std::string table_out;
  double sensitivity = 0.0;
  std::size_t synth_n = 40;
  std::size_t synth_p = 2;
  bool bundled = false;
};

void add_catalog(CLI::App* cmd, Config& c) {
  cmd->add_option("--catalog", c.catalog,
                  "Catalog file (.json or .csv); defaults to the bundled catalog");
}

void add_out(CLI::App* cmd, Config& c, const std::string& help) {
  cmd->add_option("--out", c.out, help);
}

void add_params(CLI::App* cmd, Config& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--alpha", c.alpha, "Provider consolidation weight");
  cmd->add_option("--beta1", c.beta1, "Consolidation steepness");
  cmd->add_option("--beta2", c.beta2, "Volume discount rate");
  cmd->add_option("--beta3", c.beta3, "Shortage penalty weight");
  cmd->add_option("--gamma", c.gamma, "Volume discount weight");
  cmd->add_option("--starts", c.starts, "Multi-start count for the relaxation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--node-budget", c.node_budget, "Branch-and-bound node limit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--time-budget-secs", c.time_budget_secs,
                  "Branch-and-bound wall-time limit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void add_simulator(CLI::App* cmd, Config& c) {
  cmd->add_option("--expander", c.expander, "Autoscaler expander")
      ->check(CLI::IsMember({"least-waste", "random", "priority"}))
      ->capture_default_str();
  cmd->add_option("--utilization-threshold", c.utilization_threshold,
                  "Autoscaler scale-down utilization threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void add_scenario(CLI::App* cmd, Config& c) {
  auto* file = cmd->add_option("--scenario", c.scenario, "Scenario fixture (JSON)");
  auto* named = cmd->add_option("--builtin", c.builtin, "Built-in scenario name (S1..S5)");
  file->excludes(named);
  cmd->add_option("--repetitions", c.repetitions, "Override the repetition count")
      ->check(CLI::PositiveNumber);
}

void add_format(CLI::App* cmd, Config& c) {
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

nm_format format_of(const std::string& name) {
  return name == "csv" ? NM_FORMAT_CSV : NM_FORMAT_JSON;
}

nm_options options_of(const Config& c) {
  nm_options o;
  nm_options_init(&o);
  o.seed = c.seed;
  o.alpha = c.alpha;
  o.beta1 = c.beta1;
  o.beta2 = c.beta2;
  o.beta3 = c.beta3;
  o.gamma = c.gamma;
  o.starts = c.starts;
  o.node_budget = c.node_budget;
  o.time_budget_secs = c.time_budget_secs;
  o.expander = c.expander == "random"     ? NM_EXPANDER_RANDOM
               : c.expander == "priority" ? NM_EXPANDER_PRIORITY
                                          : NM_EXPANDER_LEAST_WASTE;
  o.utilization_threshold = c.utilization_threshold;
  return o;
}

Catalog open_catalog(const Config& c) {
  nm_catalog* raw = nullptr;
  check(c.catalog.empty() ? nm_catalog_bundled(&raw)
                          : nm_catalog_load(c.catalog.c_str(), &raw));
  return Catalog(raw);
}

Problem open_problem(const nm_catalog* catalog, const Config& c) {
  if (c.problem.empty()) fail("--problem is required");
  nm_problem* raw = nullptr;
  check(nm_problem_load(catalog, c.problem.c_str(), &raw));
  return Problem(raw);
}

Scenario builtin_scenario(const nm_catalog* catalog, const std::string& name,
                          int small_per_provider) {
  for (std::size_t k = 0; k < nm_builtin_scenario_count(); ++k) {
    nm_scenario* raw = nullptr;
    check(nm_scenario_builtin(catalog, k, small_per_provider, &raw));
    Scenario s(raw);
    if (name == nm_scenario_name(s.get())) return s;
  }
  fail("unknown built-in scenario '" + name + "'");
}

Scenario open_scenario(const nm_catalog* catalog, const Config& c) {
  Scenario s;
  if (!c.scenario.empty()) {
    nm_scenario* raw = nullptr;
    check(nm_scenario_load(catalog, c.scenario.c_str(), &raw));
    s.reset(raw);
  } else if (!c.builtin.empty()) {
    s = builtin_scenario(catalog, c.builtin, c.small_per_provider);
  } else {
    fail("--scenario or --builtin is required");
  }
  if (c.repetitions > 0) nm_scenario_set_repetitions(s.get(), c.repetitions);
  return s;
}

void emit(const std::string& path, const char* contents) {
  if (path.empty()) {
    std::cout << contents;
    std::cout.flush();
    return;
  }
  check(nm_write_file(path.c_str(), contents));
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{NM_ERR_IO, "cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail("bad number '" + item + "' in " + what);
    }
  }
  if (values.empty()) fail(what + " needs at least one value");
  return values;
}

// Grid from --grid (JSON object of parameter -> list) and --set PARAM=LIST.
Grid build_grid(const Config& c) {
  nm_grid* raw = nullptr;
  check(nm_grid_create(&raw));
  Grid grid(raw);
  auto set = [&](const std::string& name, const std::vector<double>& values) {
    check(nm_grid_set(grid.get(), name.c_str(), values.data(), values.size()));
  };
  if (!c.grid.empty()) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text(c.grid));
    } catch (const nlohmann::json::exception& e) {
      throw Failure{NM_ERR_PARSE, "grid JSON: " + std::string(e.what())};
    }
    if (!doc.is_object()) throw Failure{NM_ERR_PARSE, "grid JSON: expected an object"};
    for (const auto& [name, list] : doc.items()) {
      if (!list.is_array()) throw Failure{NM_ERR_PARSE, "grid JSON: '" + name + "' must be an array"};
      std::vector<double> values;
      for (const auto& v : list) {
        if (!v.is_number()) throw Failure{NM_ERR_PARSE, "grid JSON: '" + name + "' must hold numbers"};
        values.push_back(v.get<double>());
      }
      set(name, values);
    }
  }
  for (const std::string& entry : c.set) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) fail("--set expects PARAM=V1,V2,...");
    set(entry.substr(0, eq), parse_list(entry.substr(eq + 1), entry.substr(0, eq)));
  }
  return grid;
}

int cmd_solve(const Config& c) {
  Catalog catalog = open_catalog(c);
  Problem problem = open_problem(catalog.get(), c);
  const nm_options o = options_of(c);
  char* raw = nullptr;
  check(nm_solve(problem.get(), &o, &raw));
  emit(c.out, String(raw).get());
  return kExitOk;
}

int cmd_kkt_check(const Config& c) {
  Catalog catalog = open_catalog(c);
  Problem problem = open_problem(catalog.get(), c);
  const nm_options o = options_of(c);
  char* raw = nullptr;
  check(nm_kkt_check(problem.get(), &o, &raw));
  emit(c.out, String(raw).get());
  return kExitOk;
}

int cmd_simulate_ca(const Config& c) {
  Catalog catalog = open_catalog(c);
  const nm_options o = options_of(c);
  char* raw = nullptr;
  if (!c.pools.empty()) {
    Problem problem = open_problem(catalog.get(), c);
    nm_pools* pools_raw = nullptr;
    check(nm_pools_load(catalog.get(), c.pools.c_str(), &pools_raw));
    Pools pools(pools_raw);
    check(nm_simulate_ca(pools.get(), problem.get(), &o, &raw));
  } else {
    Scenario scenario = open_scenario(catalog.get(), c);
    check(nm_simulate_ca_scenario(scenario.get(), &o, &raw));
  }
  emit(c.out, String(raw).get());
  return kExitOk;
}

int cmd_compare(const Config& c) {
  Catalog catalog = open_catalog(c);
  Scenario scenario = open_scenario(catalog.get(), c);
  const nm_options o = options_of(c);
  nm_comparison* cmp_raw = nullptr;
  check(nm_compare(scenario.get(), &o, &cmp_raw));
  Comparison cmp(cmp_raw);
  char* raw = nullptr;
  if (c.format == "csv") {
    const nm_comparison* list[] = {cmp.get()};
    check(nm_summary_csv(list, 1, &raw));
  } else {
    check(nm_comparison_json(cmp.get(), &raw));
  }
  emit(c.out, String(raw).get());
  return kExitOk;
}

int cmd_scenarios(const Config& c) {
  Catalog catalog = open_catalog(c);
  const std::filesystem::path dir = c.out.empty() ? "." : c.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Failure{NM_ERR_IO, "cannot create '" + dir.string() + "'"};
  const nm_options o = options_of(c);

  std::vector<Comparison> done;
  bool any_failed = false;
  for (std::size_t k = 0; k < nm_builtin_scenario_count(); ++k) {
    nm_scenario* raw = nullptr;
    check(nm_scenario_builtin(catalog.get(), k, c.small_per_provider, &raw));
    Scenario scenario(raw);
    if (c.repetitions > 0) nm_scenario_set_repetitions(scenario.get(), c.repetitions);
    const std::string name = nm_scenario_name(scenario.get());
    if (c.export_fixtures) {
      check(nm_scenario_save(scenario.get(), (dir / (c.prefix + name + ".json")).c_str()));
      continue;
    }
    nm_comparison* cmp_raw = nullptr;
    nm_status status = nm_compare(scenario.get(), &o, &cmp_raw);
    if (status != NM_OK) {
      report_error({status, nm_last_error()});
      any_failed = true;
      continue;
    }
    Comparison cmp(cmp_raw);
    char* json = nullptr;
    check(nm_comparison_json(cmp.get(), &json));
    emit((dir / (c.prefix + name + ".json")).string(), String(json).get());
    done.push_back(std::move(cmp));
  }
  if (c.export_fixtures) return kExitOk;

  std::vector<const nm_comparison*> list;
  for (const Comparison& cmp : done) list.push_back(cmp.get());
  char* csv = nullptr;
  check(nm_summary_csv(list.data(), list.size(), &csv));
  emit((dir / (c.prefix + "summary.csv")).string(), String(csv).get());
  if (c.radar) {
    check(nm_radar_csv(list.data(), list.size(), &csv));
    emit((dir / (c.prefix + "radar.csv")).string(), String(csv).get());
  }
  return any_failed ? kExitPartial : kExitOk;
}

int cmd_sweep(const Config& c) {
  Catalog catalog = open_catalog(c);
  Scenario scenario = open_scenario(catalog.get(), c);
  const nm_options o = options_of(c);
  char* raw = nullptr;
  if (c.sensitivity > 0.0) {
    check(nm_sensitivity(scenario.get(), &o, c.sensitivity, format_of(c.format), &raw));
    emit(c.out, String(raw).get());
    return kExitOk;
  }
  Grid grid = build_grid(c);
  nm_table* table_raw = nullptr;
  check(nm_sweep(scenario.get(), grid.get(), &o, &table_raw));
  Table table(table_raw);
  check(nm_table_render(table.get(), format_of(c.format), &raw));
  emit(c.out, String(raw).get());
  return kExitOk;
}

int cmd_pareto(const Config& c) {
  const auto comma = c.objectives.find(',');
  if (comma == std::string::npos) fail("--objectives expects FIRST,SECOND");
  const std::string first = c.objectives.substr(0, comma);
  const std::string second = c.objectives.substr(comma + 1);

  Catalog catalog = open_catalog(c);
  Scenario scenario = open_scenario(catalog.get(), c);
  const nm_options o = options_of(c);
  Grid grid = build_grid(c);
  nm_table* table_raw = nullptr;
  check(nm_sweep(scenario.get(), grid.get(), &o, &table_raw));
  Table table(table_raw);
  nm_table* front_raw = nullptr;
  check(nm_table_pareto(table.get(), first.c_str(), second.c_str(), &front_raw));
  Table front(front_raw);
  char* raw = nullptr;
  if (!c.table_out.empty()) {
    check(nm_table_render(table.get(), format_of(c.format), &raw));
    emit(c.table_out, String(raw).get());
  }
  check(nm_table_render(front.get(), format_of(c.format), &raw));
  emit(c.out, String(raw).get());
  return kExitOk;
}

int cmd_synth_catalog(const Config& c) {
  if (c.out.empty()) fail("--out is required");
  nm_catalog* raw = nullptr;
  check(c.bundled ? nm_catalog_bundled(&raw)
                  : nm_catalog_synth(c.seed, c.synth_n, c.synth_p, &raw));
  Catalog catalog(raw);
  std::string format = c.format;
  if (format.empty()) format = std::filesystem::path(c.out).extension() == ".csv" ? "csv" : "json";
  check(nm_catalog_save(catalog.get(), c.out.c_str(), format_of(format)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-provider cloud instance allocation and autoscaler comparison"};
  app.set_version_flag("--version", std::string("nodemix ") + nm_version());
  app.require_subcommand(1);
  Config c;

  auto* solve = app.add_subcommand("solve", "Optimize one allocation problem");
  add_catalog(solve, c);
  solve->add_option("--problem", c.problem, "Problem fixture (JSON)")
      ->required();
  add_params(solve, c);
  add_out(solve, c, "Report path (default: stdout)");

  auto* kkt = app.add_subcommand("kkt-check", "Certify the relaxed optimum");
  add_catalog(kkt, c);
  kkt->add_option("--problem", c.problem, "Problem fixture (JSON)")
      ->required();
  add_params(kkt, c);
  add_out(kkt, c, "Report path (default: stdout)");

  auto* sim = app.add_subcommand("simulate-ca", "Run the cluster autoscaler baseline");
  add_catalog(sim, c);
  auto* pools_opt = sim->add_option("--pools", c.pools, "Node pool fixture (JSON)");
  sim->add_option("--problem", c.problem, "Problem fixture giving the demand")
      ->needs(pools_opt);
  add_scenario(sim, c);
  sim->add_option("--seed", c.seed, "Seed for the random expander")->capture_default_str();
  add_simulator(sim, c);
  add_out(sim, c, "Report path (default: stdout)");

  auto* compare = app.add_subcommand("compare", "Autoscaler versus optimizer on one scenario");
  add_catalog(compare, c);
  add_scenario(compare, c);
  compare->add_option("--small-per-provider", c.small_per_provider,
                      "Pre-existing small nodes per provider in S2")
      ->check(CLI::Range(1, 2));
  add_params(compare, c);
  add_simulator(compare, c);
  add_format(compare, c);
  add_out(compare, c, "Report path (default: stdout)");

  auto* scenarios = app.add_subcommand("scenarios", "Run the five built-in scenarios");
  add_catalog(scenarios, c);
  scenarios->add_option("--repetitions", c.repetitions, "Override the repetition count")
      ->check(CLI::PositiveNumber);
  scenarios->add_option("--small-per-provider", c.small_per_provider,
                        "Pre-existing small nodes per provider in S2")
      ->check(CLI::Range(1, 2));
  add_params(scenarios, c);
  add_simulator(scenarios, c);
  scenarios->add_option("--prefix", c.prefix, "File name prefix for the outputs");
  scenarios->add_flag("--radar", c.radar, "Also write radar.csv");
  scenarios->add_flag("--export-fixtures", c.export_fixtures,
                      "Write the scenario fixtures instead of running them");
  add_out(scenarios, c, "Output directory (default: .)");

  auto* sweep = app.add_subcommand("sweep", "Grid search over the penalty weights");
  auto* pareto = app.add_subcommand("pareto", "Pareto frontier of a grid search");
  for (CLI::App* cmd : {sweep, pareto}) {
    add_catalog(cmd, c);
    add_scenario(cmd, c);
    cmd->add_option("--grid", c.grid, "Grid JSON: {\"alpha\": [...], ...}");
    cmd->add_option("--set", c.set, "PARAM=V1,V2,... (repeatable)");
    add_params(cmd, c);
    add_simulator(cmd, c);
    add_format(cmd, c);
    add_out(cmd, c, "Table path (default: stdout)");
  }
  sweep->add_option("--sensitivity", c.sensitivity,
                    "Report elasticities for this relative perturbation instead")
      ->check(CLI::Range(0.0, 1.0));
  pareto->add_option("--objectives", c.objectives, "Two metrics: FIRST,SECOND")
      ->capture_default_str();
  pareto->add_option("--table-out", c.table_out, "Also write the full table here");

  auto* synth = app.add_subcommand("synth-catalog", "Write a synthetic catalog");
  synth->add_option("--seed", c.seed, "Generator seed")->capture_default_str();
  synth->add_option("--n", c.synth_n, "Instance types")->capture_default_str();
  synth->add_option("--p", c.synth_p, "Providers")->capture_default_str();
  synth->add_flag("--bundled", c.bundled, "Write the bundled catalog");
  synth->add_option("--format", c.format, "Catalog format (default: from extension)")
      ->check(CLI::IsMember({"json", "csv"}));
  synth->add_option("--out", c.out, "Catalog path")->required();

  // synth-catalog picks its format from the extension unless told otherwise.
  synth->preparse_callback([&](std::size_t) { c.format.clear(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve) return cmd_solve(c);
    if (*kkt) return cmd_kkt_check(c);
    if (*sim) return cmd_simulate_ca(c);
    if (*compare) return cmd_compare(c);
    if (*scenarios) return cmd_scenarios(c);
    if (*sweep) return cmd_sweep(c);
    if (*pareto) return cmd_pareto(c);
    if (*synth) return cmd_synth_catalog(c);
  } catch (const Failure& f) {
    report_error(f);
    return exit_code(f.status);
  } catch (const std::exception& e) {
    report_error({NM_ERR_INTERNAL, e.what()});
    return kExitError;
  }
  return kExitError;
}
