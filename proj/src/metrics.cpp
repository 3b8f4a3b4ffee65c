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

#include "nodemix/metrics.hpp"

#include <algorithm>

#include "nodemix/errors.hpp"

namespace nodemix {
namespace {

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::optional<double> difference(const std::optional<double>& a,
                                 const std::optional<double>& b) {
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

}  // namespace

EvaluationMetrics evaluate(const InstanceCatalog& catalog,
                           const Eigen::VectorXd& demand,
                           const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(demand.size()) != catalog.num_resources())
    throw DimensionError("demand has the wrong length");
  if (static_cast<std::size_t>(x.size()) != catalog.num_instances())
    throw DimensionError("allocation has the wrong length");

  EvaluationMetrics out;
  for (const ResourceSpec& spec : catalog.schema().resources())
    out.resources.push_back(spec.name);
  out.demand = demand;
  out.provided = catalog.composition() * x;
  out.total_cost = catalog.costs().dot(x);

  for (Eigen::Index r = 0; r < demand.size(); ++r) {
    const double d = demand(r);
    const double k = out.provided(r);
    if (k < d) out.shortage = true;
    if (k == 0.0) {
      out.per_resource_utilization.push_back(d == 0.0 ? std::optional<double>(0.0)
                                                      : std::nullopt);
    } else {
      out.per_resource_utilization.push_back(std::min(1.0, d / k));
    }
    if (d == 0.0) {
      out.per_resource_overprovision_pct.push_back(std::nullopt);
    } else {
      out.per_resource_overprovision_pct.push_back((k - d) / d * 100.0);
    }
  }
  out.mean_utilization = mean_of(out.per_resource_utilization);
  out.mean_overprovision_pct = mean_of(out.per_resource_overprovision_pct);

  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) > 0.0) ++out.instance_diversity;
  const Eigen::VectorXd z = catalog.selector() * x;
  for (Eigen::Index j = 0; j < z.size(); ++j)
    if (z(j) > 0.0) ++out.provider_fragmentation;
  return out;
}

ComparisonRow compare(const EvaluationMetrics& baseline,
                      const EvaluationMetrics& optimized) {
  ComparisonRow row;
  if (baseline.total_cost != 0.0)
    row.cost_savings_pct =
        (baseline.total_cost - optimized.total_cost) / baseline.total_cost * 100.0;
  row.cost_delta = optimized.total_cost - baseline.total_cost;
  row.mean_utilization_delta =
      difference(optimized.mean_utilization, baseline.mean_utilization);
  row.diversity_delta = static_cast<long long>(optimized.instance_diversity) -
                        static_cast<long long>(baseline.instance_diversity);
  row.fragmentation_delta = static_cast<long long>(optimized.provider_fragmentation) -
                            static_cast<long long>(baseline.provider_fragmentation);
  row.mean_overprovision_delta =
      difference(optimized.mean_overprovision_pct, baseline.mean_overprovision_pct);
  return row;
}

RadarSeries radar_data(const EvaluationMetrics& metrics) {
  RadarSeries series;
  for (std::size_t r = 0; r < metrics.resources.size(); ++r) {
    const auto idx = static_cast<Eigen::Index>(r);
    const double d = metrics.demand(idx);
    const double k = metrics.provided(idx);
    if (d == 0.0) {
      series.notes.push_back(metrics.resources[r] +
                             ": no demand, normalization undefined");
      continue;
    }
    RadarPoint point;
    point.resource = metrics.resources[r];
    point.demand = d;
    point.provided = k;
    point.utilization = k > 0.0 ? std::min(1.0, d / k) : 0.0;
    point.normalized_provided = k / d;
    series.points.push_back(point);
  }
  return series;
}

}  // namespace nodemix
