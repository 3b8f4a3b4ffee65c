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

#ifndef NODEMIX_SRC_JSON_UTIL_HPP_
#define NODEMIX_SRC_JSON_UTIL_HPP_

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "json.hpp"
#include "nodemix/ca_sim.hpp"
#include "nodemix/catalog.hpp"

namespace nodemix::internal {

using json = nlohmann::json;

json parse_json_text(std::string_view text, const std::string& what);

inline json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

// Array of numbers; `expected` < 0 accepts any length.
Eigen::VectorXd vector_from_json(const json& value, const std::string& what,
                                 Eigen::Index expected);

double number_from_json(const json& value, const std::string& what);

json pool_json(const NodePool& pool, const InstanceCatalog& catalog);
NodePool pool_from_json(const json& rec, const InstanceCatalog& catalog,
                        const std::string& where);

}  // namespace nodemix::internal

#endif  // NODEMIX_SRC_JSON_UTIL_HPP_
