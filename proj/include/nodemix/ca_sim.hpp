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

// A Cluster Autoscaler stand-in. Demand is an aggregate vector packed into
// the summed capacity of whole nodes; pools are homogeneous and only ever
// change by one node at a time.

#ifndef NODEMIX_CA_SIM_HPP_
#define NODEMIX_CA_SIM_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nodemix/catalog.hpp"
#include "nodemix/model.hpp"

namespace nodemix {

struct NodePool {
  std::size_t instance = 0;  // catalog index
  std::size_t min_nodes = 0;
  std::size_t max_nodes = 100;
  std::size_t current_nodes = 0;

  bool operator==(const NodePool&) const = default;
};

struct ClusterState {
  std::vector<NodePool> pools;
  Eigen::VectorXd pending_demand;  // length m, >= 0
};

enum class ExpanderKind { kLeastWaste, kRandom, kPriority };

const char* to_string(ExpanderKind kind);
// Accepts "least-waste", "random", "priority" (underscores also work).
ExpanderKind parse_expander(std::string_view name);

struct Expander {
  ExpanderKind kind = ExpanderKind::kLeastWaste;
  std::uint64_t seed = 0;            // random
  std::vector<std::size_t> order;    // priority: pool indices, best first

  static Expander least_waste() { return {}; }
  static Expander random(std::uint64_t seed) {
    return {ExpanderKind::kRandom, seed, {}};
  }
  static Expander priority(std::vector<std::size_t> order) {
    return {ExpanderKind::kPriority, 0, std::move(order)};
  }
};

struct ScaleEvent {
  std::size_t pool;
  int delta;  // +1 or -1

  bool operator==(const ScaleEvent&) const = default;
};

struct CaResult {
  std::vector<NodePool> final_pools;
  Allocation allocation;  // node counts summed per catalog index
  bool satisfied = false;
  std::vector<ScaleEvent> scale_events;
};

// Grows pools one node at a time until the pooled capacity covers the
// demand. Only pools with headroom that add capacity on some short resource
// are candidates. least_waste picks the smallest
// sum_r max(0, K[r][i] - max(0, deficit_r)) / sum_r K[r][i].
CaResult simulate_scale_up(const InstanceCatalog& catalog,
                           const ClusterState& state,
                           const Expander& expander = {});

// Removes one node at a time, trying pools with the most nodes first, as long
// as the cluster stays covered, the pool stays at or above min_nodes and the
// cluster is underutilized: max_r d_r / (Kx)_r < utilization_threshold, with
// demand spread evenly over the provided capacity.
CaResult simulate_scale_down(const InstanceCatalog& catalog,
                             const ClusterState& state,
                             double utilization_threshold);

// Seeds the pools from the existing allocation (existing nodes become each
// pool's current and minimum count; existing types without a pool get a
// fixed pool), then scales up and down.
CaResult run_baseline(const InstanceCatalog& catalog,
                      const std::vector<NodePool>& pools,
                      const std::optional<Eigen::VectorXd>& existing,
                      const Eigen::VectorXd& demand,
                      const Expander& expander = {},
                      double utilization_threshold = 0.5);

// JSON array of {instance_sku, provider, min_nodes, max_nodes,
// current_nodes}; the last three default to 0, 100 and min_nodes.
std::vector<NodePool> parse_pools(std::string_view text,
                                  const InstanceCatalog& catalog);
std::vector<NodePool> load_pools(const std::filesystem::path& path,
                                 const InstanceCatalog& catalog);
std::string serialize_pools(const std::vector<NodePool>& pools,
                            const InstanceCatalog& catalog);

}  // namespace nodemix

#endif  // NODEMIX_CA_SIM_HPP_
