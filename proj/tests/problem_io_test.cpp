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

#include <gtest/gtest.h>

#include "nodemix/errors.hpp"
#include "test_support.hpp"

namespace nodemix {
namespace {

using testing::ab_catalog;
using testing::vec;

TEST(ProblemJson, MinimalUsesDefaults) {
  AllocationProblem p = parse_problem(R"({"demand": [8, 16]})", ab_catalog());
  AllocationProblem q = make_problem(ab_catalog(), vec({8, 16}));
  EXPECT_EQ(p.demand, q.demand);
  EXPECT_EQ(p.waste, q.waste);
  EXPECT_EQ(p.uncertainty, q.uncertainty);
  EXPECT_EQ(p.params.alpha, q.params.alpha);
  EXPECT_FALSE(p.current.has_value());
  EXPECT_FALSE(p.max_deviation.has_value());
}

TEST(ProblemJson, RoundTrip) {
  AllocationProblem p = testing::ab_problem();
  p.current = vec({4, 0});
  p.max_deviation = 1;
  p.lower_bounds = vec({0, 0});
  p.upper_bounds = vec({10, 10});
  const std::string text = serialize_problem(p);
  AllocationProblem back = parse_problem(text, ab_catalog());
  EXPECT_EQ(back.demand, p.demand);
  EXPECT_EQ(back.waste, p.waste);
  EXPECT_EQ(back.params.alpha, 0.0);
  EXPECT_EQ(back.params.beta3, 10.0);
  EXPECT_EQ(*back.current, *p.current);
  EXPECT_EQ(*back.max_deviation, 1.0);
  EXPECT_EQ(*back.upper_bounds, *p.upper_bounds);
  EXPECT_EQ(serialize_problem(back), text);
}

TEST(ProblemJson, Errors) {
  auto cat = ab_catalog();
  EXPECT_THROW(parse_problem("{", cat), ParseError);
  EXPECT_THROW(parse_problem("[]", cat), ParseError);
  EXPECT_THROW(parse_problem(R"({"waste": [1, 1]})", cat), ParseError);
  EXPECT_THROW(parse_problem(R"({"demand": [1, 2, 3]})", cat), DimensionError);
  EXPECT_THROW(parse_problem(R"({"demand": [1, "x"]})", cat), ParseError);
  EXPECT_THROW(parse_problem(R"({"demand": [1, 1], "params": {"delta": 1}})", cat),
               ParseError);
  EXPECT_THROW(parse_problem(R"({"demand": [-1, 1]})", cat), ValidationError);
  EXPECT_THROW(parse_problem(R"({"demand": [1, 1]})", nullptr), ValidationError);
}

}  // namespace
}  // namespace nodemix
