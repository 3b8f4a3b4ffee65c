/* Copyright 2026 The nodemix Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libnodemix.
 *
 * Objects are opaque handles released with their *_free function; passing
 * NULL to a *_free function is a no-op. Every fallible call returns an
 * nm_status. On failure nm_last_error() describes the problem until the next
 * call on the same thread. Strings returned through char** out-parameters
 * are owned by the caller and released with nm_string_free().
 */

#ifndef NODEMIX_NODEMIX_H_
#define NODEMIX_NODEMIX_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define NM_API __attribute__((visibility("default")))
#else
#define NM_API
#endif

typedef enum nm_status {
  NM_OK = 0,
  NM_ERR_ARGUMENT = 1,   /* NULL handle, bad option value */
  NM_ERR_IO = 2,         /* file cannot be read or written */
  NM_ERR_PARSE = 3,      /* malformed CSV or JSON */
  NM_ERR_VALIDATION = 4, /* well-formed input violating an invariant */
  NM_ERR_DIMENSION = 5,  /* vector length does not match the catalog */
  NM_ERR_INFEASIBLE = 6, /* no allocation satisfies the constraints */
  NM_ERR_INTERNAL = 7
} nm_status;

typedef enum nm_expander {
  NM_EXPANDER_LEAST_WASTE = 0,
  NM_EXPANDER_RANDOM = 1,
  NM_EXPANDER_PRIORITY = 2
} nm_expander;

typedef enum nm_format { NM_FORMAT_JSON = 0, NM_FORMAT_CSV = 1 } nm_format;

typedef struct nm_catalog nm_catalog;
typedef struct nm_problem nm_problem;
typedef struct nm_scenario nm_scenario;
typedef struct nm_pools nm_pools;
typedef struct nm_comparison nm_comparison;
typedef struct nm_grid nm_grid;
typedef struct nm_table nm_table;

/* Run options. Penalty weights set to NaN keep the value from the problem
 * fixture, or the library default for scenarios. */
typedef struct nm_options {
  uint64_t seed;
  double alpha, beta1, beta2, beta3, gamma;
  int starts;               /* multi-start count for the relaxation, >= 1 */
  size_t node_budget;       /* branch-and-bound node limit */
  double time_budget_secs;  /* branch-and-bound wall-time limit */
  nm_expander expander;
  double utilization_threshold; /* autoscaler scale-down threshold, (0, 1] */
} nm_options;

NM_API void nm_options_init(nm_options* options);

NM_API const char* nm_version(void);
NM_API const char* nm_status_string(nm_status status);
NM_API const char* nm_last_error(void);
NM_API void nm_string_free(char* s);

/* Catalogs. The format follows the file extension (.json or .csv). */
NM_API nm_status nm_catalog_load(const char* path, nm_catalog** out);
NM_API nm_status nm_catalog_bundled(nm_catalog** out);
/* Standard four-resource schema, n types spread over p providers. */
NM_API nm_status nm_catalog_synth(uint64_t seed, size_t n, size_t p,
                                  nm_catalog** out);
NM_API nm_status nm_catalog_save(const nm_catalog* catalog, const char* path,
                                 nm_format format);
NM_API size_t nm_catalog_num_instances(const nm_catalog* catalog);
NM_API size_t nm_catalog_num_resources(const nm_catalog* catalog);
NM_API void nm_catalog_free(nm_catalog* catalog);

/* Problems: JSON fixture with demand and optional bounds and weights. */
NM_API nm_status nm_problem_load(const nm_catalog* catalog, const char* path,
                                 nm_problem** out);
NM_API void nm_problem_free(nm_problem* problem);

/* Optimizer: relaxation, KKT certificate and branch and bound. Writes the
 * solve report JSON. */
NM_API nm_status nm_solve(const nm_problem* problem, const nm_options* options,
                          char** report_json);
/* Relaxation only, with the KKT residuals checked against the default
 * tolerances. */
NM_API nm_status nm_kkt_check(const nm_problem* problem,
                              const nm_options* options, char** report_json);

/* Autoscaler pools: JSON array of {instance_sku, provider, min_nodes,
 * max_nodes, current_nodes}. */
NM_API nm_status nm_pools_load(const nm_catalog* catalog, const char* path,
                               nm_pools** out);
NM_API void nm_pools_free(nm_pools* pools);
/* Scales the pools against the problem's demand; the problem's current
 * allocation, if any, is treated as nodes already running. */
NM_API nm_status nm_simulate_ca(const nm_pools* pools, const nm_problem* problem,
                                const nm_options* options, char** report_json);
NM_API nm_status nm_simulate_ca_scenario(const nm_scenario* scenario,
                                         const nm_options* options,
                                         char** report_json);

/* Scenarios. Built-in scenarios are numbered 0..4. */
NM_API size_t nm_builtin_scenario_count(void);
NM_API nm_status nm_scenario_builtin(const nm_catalog* catalog, size_t index,
                                     int small_per_provider, nm_scenario** out);
NM_API nm_status nm_scenario_load(const nm_catalog* catalog, const char* path,
                                  nm_scenario** out);
NM_API nm_status nm_scenario_save(const nm_scenario* scenario, const char* path);
NM_API const char* nm_scenario_name(const nm_scenario* scenario);
NM_API void nm_scenario_set_repetitions(nm_scenario* scenario, size_t repetitions);
NM_API void nm_scenario_free(nm_scenario* scenario);

/* Autoscaler baseline versus optimizer. */
NM_API nm_status nm_compare(const nm_scenario* scenario, const nm_options* options,
                            nm_comparison** out);
NM_API nm_status nm_comparison_json(const nm_comparison* comparison,
                                    char** report_json);
NM_API double nm_comparison_baseline_cost(const nm_comparison* comparison);
NM_API double nm_comparison_optimized_cost(const nm_comparison* comparison);
NM_API void nm_comparison_free(nm_comparison* comparison);
/* Summary CSV (two rows per comparison) and radar CSV. */
NM_API nm_status nm_summary_csv(const nm_comparison* const* comparisons,
                                size_t count, char** csv);
NM_API nm_status nm_radar_csv(const nm_comparison* const* comparisons,
                              size_t count, char** csv);

/* Parameter grids: every dimension starts as the default value alone. */
NM_API nm_status nm_grid_create(nm_grid** out);
/* `parameter` is one of alpha, beta1, beta2, beta3, gamma. */
NM_API nm_status nm_grid_set(nm_grid* grid, const char* parameter,
                             const double* values, size_t count);
NM_API void nm_grid_free(nm_grid* grid);

NM_API nm_status nm_sweep(const nm_scenario* scenario, const nm_grid* grid,
                          const nm_options* options, nm_table** out);
/* Non-dominated feasible rows under two metrics (cost, fragmentation,
 * diversity, overprovision, utilization). */
NM_API nm_status nm_table_pareto(const nm_table* table, const char* first,
                                 const char* second, nm_table** out);
NM_API size_t nm_table_rows(const nm_table* table);
NM_API nm_status nm_table_render(const nm_table* table, nm_format format,
                                 char** out);
NM_API void nm_table_free(nm_table* table);

/* Elasticity of the optimized cost in each weight. */
NM_API nm_status nm_sensitivity(const nm_scenario* scenario,
                                const nm_options* options, double perturbation,
                                nm_format format, char** out);

/* Drops the "metadata" field of a report so runs can be compared. */
NM_API nm_status nm_strip_metadata(const char* report_json, char** out);

/* Writes through a temporary file and a rename. */
NM_API nm_status nm_write_file(const char* path, const char* contents);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* NODEMIX_NODEMIX_H_ */
