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

#ifndef NODEMIX_ERRORS_HPP_
#define NODEMIX_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace nodemix {

// Base of every error thrown by the library. The C API maps each subclass to
// a distinct nm_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (CSV line, JSON record).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Vector or matrix lengths that do not match the problem.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// The allocation problem has no feasible point. `detail` names the most
// violated constraint, or the resource nobody can provide.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& detail, double max_violation)
      : Error("infeasible: " + detail),
        detail_(detail),
        max_violation_(max_violation) {}

  const std::string& detail() const { return detail_; }
  double max_violation() const { return max_violation_; }

 private:
  std::string detail_;
  double max_violation_;
};

}  // namespace nodemix

#endif  // NODEMIX_ERRORS_HPP_
