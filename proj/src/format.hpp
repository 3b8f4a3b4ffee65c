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

#ifndef NODEMIX_SRC_FORMAT_HPP_
#define NODEMIX_SRC_FORMAT_HPP_

#include <filesystem>
#include <string>

namespace nodemix::internal {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

}  // namespace nodemix::internal

#endif  // NODEMIX_SRC_FORMAT_HPP_
