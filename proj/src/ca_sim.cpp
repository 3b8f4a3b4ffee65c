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

#include "nodemix/ca_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "format.hpp"
#include "json_util.hpp"
#include "nodemix/errors.hpp"
#include "rng.hpp"

namespace nodemix {
namespace {

using internal::json;

void check_state(const InstanceCatalog& catalog, const ClusterState& state) {
  if (static_cast<std::size_t>(state.pending_demand.size()) != catalog.num_resources())
    throw DimensionError("pending demand has the wrong length");
  if ((state.pending_demand.array() < 0.0).any() || !state.pending_demand.allFinite())
    throw ValidationError("pending demand must be finite and nonnegative");
  for (std::size_t k = 0; k < state.pools.size(); ++k) {
    const NodePool& pool = state.pools[k];
    const std::string where = "pool " + std::to_string(k);
    if (pool.instance >= catalog.num_instances())
      throw ValidationError(where + ": instance index out of range");
    if (pool.min_nodes > pool.current_nodes || pool.current_nodes > pool.max_nodes)
      throw ValidationError(where + ": need min_nodes <= current_nodes <= max_nodes");
  }
}

Eigen::VectorXd counts_of(const InstanceCatalog& catalog,
                          const std::vector<NodePool>& pools) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(catalog.num_instances()));
  for (const NodePool& pool : pools)
    x(static_cast<Eigen::Index>(pool.instance)) += static_cast<double>(pool.current_nodes);
  return x;
}

CaResult make_result(const InstanceCatalog& catalog, std::vector<NodePool> pools,
                     bool satisfied, std::vector<ScaleEvent> events) {
  CaResult result;
  result.allocation = Allocation::integer(counts_of(catalog, pools));
  result.final_pools = std::move(pools);
  result.satisfied = satisfied;
  result.scale_events = std::move(events);
  return result;
}

}  // namespace

const char* to_string(ExpanderKind kind) {
  switch (kind) {
    case ExpanderKind::kLeastWaste:
      return "least-waste";
    case ExpanderKind::kRandom:
      return "random";
    case ExpanderKind::kPriority:
      return "priority";
  }
  return "unknown";
}

ExpanderKind parse_expander(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "least-waste") return ExpanderKind::kLeastWaste;
  if (s == "random") return ExpanderKind::kRandom;
  if (s == "priority") return ExpanderKind::kPriority;
  throw ValidationError("unknown expander '" + std::string(name) + "'");
}

CaResult simulate_scale_up(const InstanceCatalog& catalog,
                           const ClusterState& state, const Expander& expander) {
  check_state(catalog, state);
  const Eigen::MatrixXd& K = catalog.composition();
  std::vector<NodePool> pools = state.pools;
  std::vector<ScaleEvent> events;
  internal::Rng rng(expander.seed);
  Eigen::VectorXd provided = K * counts_of(catalog, pools);

  while (true) {
    const Eigen::VectorXd deficit = state.pending_demand - provided;
    if ((deficit.array() <= 0.0).all())
      return make_result(catalog, std::move(pools), true, std::move(events));

    std::vector<std::size_t> eligible;
    for (std::size_t k = 0; k < pools.size(); ++k) {
      if (pools[k].current_nodes >= pools[k].max_nodes) continue;
      const auto col = K.col(static_cast<Eigen::Index>(pools[k].instance));
      bool helps = false;
      for (Eigen::Index r = 0; r < deficit.size(); ++r)
        helps |= deficit(r) > 0.0 && col(r) > 0.0;
      if (helps) eligible.push_back(k);
    }
    if (eligible.empty())
      return make_result(catalog, std::move(pools), false, std::move(events));

    std::size_t pick = eligible.front();
    switch (expander.kind) {
      case ExpanderKind::kLeastWaste: {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k : eligible) {
          const auto col = K.col(static_cast<Eigen::Index>(pools[k].instance));
          double waste = 0.0;
          for (Eigen::Index r = 0; r < deficit.size(); ++r)
            waste += std::max(0.0, col(r) - std::max(0.0, deficit(r)));
          const double total = col.sum();
          const double score = total > 0.0 ? waste / total : 0.0;
          if (score < best) {
            best = score;
            pick = k;
          }
        }
        break;
      }
      case ExpanderKind::kRandom:
        pick = eligible[rng.below(eligible.size())];
        break;
      case ExpanderKind::kPriority: {
        bool found = false;
        for (std::size_t k : expander.order) {
          if (std::find(eligible.begin(), eligible.end(), k) != eligible.end()) {
            pick = k;
            found = true;
            break;
          }
        }
        // Unlisted pools rank after the listed ones, in index order.
        if (!found) pick = eligible.front();
        break;
      }
    }
    pools[pick].current_nodes += 1;
    provided += K.col(static_cast<Eigen::Index>(pools[pick].instance));
    events.push_back({pick, +1});
  }
}

CaResult simulate_scale_down(const InstanceCatalog& catalog,
                             const ClusterState& state,
                             double utilization_threshold) {
  check_state(catalog, state);
  if (!(utilization_threshold > 0.0 && utilization_threshold <= 1.0))
    throw ValidationError("utilization threshold must lie in (0, 1]");
  const Eigen::MatrixXd& K = catalog.composition();
  const Eigen::VectorXd& d = state.pending_demand;
  std::vector<NodePool> pools = state.pools;
  std::vector<ScaleEvent> events;
  Eigen::VectorXd provided = K * counts_of(catalog, pools);

  auto covered = [&](const Eigen::VectorXd& cap) {
    return (cap.array() >= d.array()).all();
  };
  auto utilization = [&](const Eigen::VectorXd& cap) {
    double u = 0.0;
    for (Eigen::Index r = 0; r < d.size(); ++r)
      if (cap(r) > 0.0) u = std::max(u, d(r) / cap(r));
    return u;
  };

  std::vector<std::size_t> order(pools.size());
  while (covered(provided) && utilization(provided) < utilization_threshold) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pools[a].current_nodes > pools[b].current_nodes;
    });
    bool removed = false;
    for (std::size_t k : order) {
      if (pools[k].current_nodes <= pools[k].min_nodes) continue;
      Eigen::VectorXd after = provided - K.col(static_cast<Eigen::Index>(pools[k].instance));
      if (!covered(after)) continue;
      pools[k].current_nodes -= 1;
      provided = after;
      events.push_back({k, -1});
      removed = true;
      break;
    }
    if (!removed) break;
  }
  return make_result(catalog, std::move(pools), covered(provided), std::move(events));
}

CaResult run_baseline(const InstanceCatalog& catalog,
                      const std::vector<NodePool>& pools,
                      const std::optional<Eigen::VectorXd>& existing,
                      const Eigen::VectorXd& demand, const Expander& expander,
                      double utilization_threshold) {
  ClusterState state;
  state.pools = pools;
  state.pending_demand = demand;
  if (existing) {
    if (static_cast<std::size_t>(existing->size()) != catalog.num_instances())
      throw DimensionError("existing allocation has the wrong length");
    for (Eigen::Index i = 0; i < existing->size(); ++i) {
      const double v = (*existing)(i);
      if (v < 0.0 || v != std::floor(v))
        throw ValidationError("existing allocation must hold whole node counts");
      if (v == 0.0) continue;
      const auto count = static_cast<std::size_t>(v);
      auto it = std::find_if(state.pools.begin(), state.pools.end(),
                             [&](const NodePool& p) {
                               return p.instance == static_cast<std::size_t>(i);
                             });
      if (it == state.pools.end()) {
        state.pools.push_back({static_cast<std::size_t>(i), count, count, count});
        continue;
      }
      it->min_nodes = std::max(it->min_nodes, count);
      it->current_nodes = std::max(it->current_nodes, it->min_nodes);
      it->max_nodes = std::max(it->max_nodes, it->current_nodes);
    }
  }
  CaResult up = simulate_scale_up(catalog, state, expander);
  if (!up.satisfied) return up;
  state.pools = up.final_pools;
  CaResult down = simulate_scale_down(catalog, state, utilization_threshold);
  down.scale_events.insert(down.scale_events.begin(), up.scale_events.begin(),
                           up.scale_events.end());
  return down;
}

std::vector<NodePool> parse_pools(std::string_view text,
                                  const InstanceCatalog& catalog) {
  const json doc = internal::parse_json_text(text, "pools JSON");
  if (!doc.is_array()) throw ParseError("pools JSON: expected an array");
  std::vector<NodePool> pools;
  for (std::size_t k = 0; k < doc.size(); ++k)
    pools.push_back(internal::pool_from_json(
        doc[k], catalog, "pools JSON entry " + std::to_string(k)));
  return pools;
}

std::vector<NodePool> load_pools(const std::filesystem::path& path,
                                 const InstanceCatalog& catalog) {
  return parse_pools(internal::read_file(path), catalog);
}

std::string serialize_pools(const std::vector<NodePool>& pools,
                            const InstanceCatalog& catalog) {
  json doc = json::array();
  for (const NodePool& pool : pools) doc.push_back(internal::pool_json(pool, catalog));
  return doc.dump(2) + "\n";
}

}  // namespace nodemix
