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

#include "json_util.hpp"

#include <cmath>

#include "nodemix/errors.hpp"

namespace nodemix::internal {

json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

double number_from_json(const json& value, const std::string& what) {
  if (!value.is_number()) throw ParseError(what + " must be a number");
  double v = value.get<double>();
  if (!std::isfinite(v)) throw ParseError(what + " must be finite");
  return v;
}

Eigen::VectorXd vector_from_json(const json& value, const std::string& what,
                                 Eigen::Index expected) {
  if (!value.is_array()) throw ParseError(what + " must be an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(value.size()));
  for (std::size_t k = 0; k < value.size(); ++k)
    out(static_cast<Eigen::Index>(k)) =
        number_from_json(value[k], what + "[" + std::to_string(k) + "]");
  if (expected >= 0 && out.size() != expected)
    throw DimensionError(what + " has length " + std::to_string(out.size()) +
                         ", expected " + std::to_string(expected));
  return out;
}

json pool_json(const NodePool& pool, const InstanceCatalog& catalog) {
  const InstanceType& inst = catalog.instance(pool.instance);
  return {{"instance_sku", inst.sku},
          {"provider", inst.provider_id},
          {"min_nodes", pool.min_nodes},
          {"max_nodes", pool.max_nodes},
          {"current_nodes", pool.current_nodes}};
}

NodePool pool_from_json(const json& rec, const InstanceCatalog& catalog,
                        const std::string& where) {
  if (!rec.is_object()) throw ParseError(where + ": not an object");
  if (!rec.contains("instance_sku") || !rec["instance_sku"].is_string() ||
      !rec.contains("provider") || !rec["provider"].is_string())
    throw ParseError(where + ": needs string 'instance_sku' and 'provider'");
  auto count = [&](const char* key, std::size_t fallback) -> std::size_t {
    if (!rec.contains(key)) return fallback;
    const json& v = rec[key];
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ParseError(where + ": '" + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
  };
  const std::string provider = rec["provider"];
  const std::string sku = rec["instance_sku"];
  std::optional<std::size_t> index = catalog.find(provider, sku);
  if (!index)
    throw ValidationError(where + ": unknown instance " + provider + "/" + sku);
  NodePool pool;
  pool.instance = *index;
  pool.min_nodes = count("min_nodes", 0);
  pool.max_nodes = count("max_nodes", 100);
  pool.current_nodes = count("current_nodes", pool.min_nodes);
  if (pool.min_nodes > pool.current_nodes || pool.current_nodes > pool.max_nodes)
    throw ValidationError(where + ": need min_nodes <= current_nodes <= max_nodes");
  return pool;
}

}  // namespace nodemix::internal
