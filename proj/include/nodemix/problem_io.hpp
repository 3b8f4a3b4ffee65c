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

// Problem fixtures:
//
//   {"demand": [8, 16], "uncertainty": [0, 0], "waste": [8, 32],
//    "params": {"alpha": 0, "gamma": 0},
//    "current": [4, 0], "max_deviation": 1,
//    "lower_bounds": [0, 0], "upper_bounds": [10, 10]}
//
// Only "demand" is required. Missing vectors take the make_problem()
// defaults and missing params keep their defaults.

#ifndef NODEMIX_PROBLEM_IO_HPP_
#define NODEMIX_PROBLEM_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "nodemix/model.hpp"

namespace nodemix {

AllocationProblem parse_problem(std::string_view text, CatalogPtr catalog);
AllocationProblem load_problem(const std::filesystem::path& path,
                               CatalogPtr catalog);
std::string serialize_problem(const AllocationProblem& problem);

}  // namespace nodemix

#endif  // NODEMIX_PROBLEM_IO_HPP_
