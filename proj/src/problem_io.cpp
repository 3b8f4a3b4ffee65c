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

#include "nodemix/problem_io.hpp"

#include "format.hpp"
#include "json_util.hpp"
#include "nodemix/errors.hpp"

namespace nodemix {

using internal::json;

AllocationProblem parse_problem(std::string_view text, CatalogPtr catalog) {
  if (!catalog) throw ValidationError("problem needs a catalog");
  const json doc = internal::parse_json_text(text, "problem JSON");
  if (!doc.is_object()) throw ParseError("problem JSON: expected an object");
  if (!doc.contains("demand")) throw ParseError("problem JSON: missing 'demand'");
  const auto m = static_cast<Eigen::Index>(catalog->num_resources());
  const auto n = static_cast<Eigen::Index>(catalog->num_instances());

  PenaltyParams params;
  if (doc.contains("params")) {
    const json& p = doc["params"];
    if (!p.is_object()) throw ParseError("problem JSON: 'params' must be an object");
    for (const auto& [key, value] : p.items()) {
      double v = internal::number_from_json(value, "params." + key);
      if (key == "alpha") params.alpha = v;
      else if (key == "beta1") params.beta1 = v;
      else if (key == "beta2") params.beta2 = v;
      else if (key == "beta3") params.beta3 = v;
      else if (key == "gamma") params.gamma = v;
      else throw ParseError("problem JSON: unknown parameter '" + key + "'");
    }
  }
  AllocationProblem problem = make_problem(
      catalog, internal::vector_from_json(doc["demand"], "demand", m), params);
  auto vec = [&](const char* key, Eigen::Index len) -> std::optional<Eigen::VectorXd> {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    return internal::vector_from_json(doc[key], key, len);
  };
  if (auto v = vec("uncertainty", m)) problem.uncertainty = *v;
  if (auto v = vec("waste", m)) problem.waste = *v;
  problem.current = vec("current", n);
  problem.lower_bounds = vec("lower_bounds", n);
  problem.upper_bounds = vec("upper_bounds", n);
  if (doc.contains("max_deviation") && !doc["max_deviation"].is_null())
    problem.max_deviation =
        internal::number_from_json(doc["max_deviation"], "max_deviation");
  problem.validate();
  return problem;
}

AllocationProblem load_problem(const std::filesystem::path& path,
                               CatalogPtr catalog) {
  return parse_problem(internal::read_file(path), std::move(catalog));
}

std::string serialize_problem(const AllocationProblem& problem) {
  json doc;
  doc["demand"] = internal::vector_json(problem.demand);
  doc["uncertainty"] = internal::vector_json(problem.uncertainty);
  doc["waste"] = internal::vector_json(problem.waste);
  doc["params"] = {{"alpha", problem.params.alpha},
                   {"beta1", problem.params.beta1},
                   {"beta2", problem.params.beta2},
                   {"beta3", problem.params.beta3},
                   {"gamma", problem.params.gamma}};
  if (problem.current) doc["current"] = internal::vector_json(*problem.current);
  if (problem.max_deviation) doc["max_deviation"] = *problem.max_deviation;
  if (problem.lower_bounds)
    doc["lower_bounds"] = internal::vector_json(*problem.lower_bounds);
  if (problem.upper_bounds)
    doc["upper_bounds"] = internal::vector_json(*problem.upper_bounds);
  return doc.dump(2) + "\n";
}

}  // namespace nodemix
