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

#ifndef NODEMIX_CATALOG_HPP_
#define NODEMIX_CATALOG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nodemix {

enum class CatalogFormat { kCsv, kJson };

// Parses "csv" / "json". Throws ValidationError on anything else.
CatalogFormat parse_catalog_format(std::string_view name);

// Picks the format from a file extension (.csv / .json).
CatalogFormat format_from_path(const std::filesystem::path& path);

struct ResourceSpec {
  std::string name;
  std::string unit;

  bool operator==(const ResourceSpec&) const = default;
};

// Ordered resource dimensions. Index r of every capacity / demand vector
// refers to names()[r].
class ResourceSchema {
 public:
  explicit ResourceSchema(std::vector<ResourceSpec> resources);

  // cpu_cores, memory_gb, network_units, storage_gb: the layout of the CSV
  // catalog format and of the bundled fixtures.
  static ResourceSchema standard();

  std::size_t size() const { return resources_.size(); }
  const std::vector<ResourceSpec>& resources() const { return resources_; }
  const std::string& name(std::size_t r) const { return resources_[r].name; }

  // Index of the resource called `name`, if any.
  std::optional<std::size_t> find(std::string_view name) const;

  bool operator==(const ResourceSchema&) const = default;

 private:
  std::vector<ResourceSpec> resources_;
};

struct InstanceType {
  std::string provider_id;
  std::string sku;
  std::vector<double> capacities;
  double hourly_cost = 0.0;

  bool operator==(const InstanceType&) const = default;
};

// An immutable, validated list of instance types. The composition matrix K
// (m x n) and the provider selector E (p x n) are materialized once at
// construction.
class InstanceCatalog {
 public:
  // Validates and takes ownership. Providers are ordered by first appearance.
  InstanceCatalog(ResourceSchema schema, std::vector<InstanceType> instances);

  const ResourceSchema& schema() const { return schema_; }
  const std::vector<InstanceType>& instances() const { return instances_; }
  const InstanceType& instance(std::size_t i) const { return instances_[i]; }
  const std::vector<std::string>& providers() const { return providers_; }

  std::size_t num_resources() const { return schema_.size(); }
  std::size_t num_instances() const { return instances_.size(); }
  std::size_t num_providers() const { return providers_.size(); }

  // Provider row of instance i in E.
  std::size_t provider_index(std::size_t i) const { return provider_of_[i]; }

  // Instance index for (provider, sku), if present.
  std::optional<std::size_t> find(std::string_view provider,
                                  std::string_view sku) const;

  const Eigen::MatrixXd& composition() const { return composition_; }
  const Eigen::MatrixXd& selector() const { return selector_; }
  const Eigen::VectorXd& costs() const { return costs_; }

  bool operator==(const InstanceCatalog& other) const {
    return schema_ == other.schema_ && instances_ == other.instances_;
  }

 private:
  ResourceSchema schema_;
  std::vector<InstanceType> instances_;
  std::vector<std::string> providers_;
  std::vector<std::size_t> provider_of_;
  Eigen::MatrixXd composition_;
  Eigen::MatrixXd selector_;
  Eigen::VectorXd costs_;
};

using CatalogPtr = std::shared_ptr<const InstanceCatalog>;

CatalogPtr load_catalog(const std::filesystem::path& path,
                        CatalogFormat format);
CatalogPtr parse_catalog(std::string_view text, CatalogFormat format);
std::string serialize_catalog(const InstanceCatalog& catalog,
                              CatalogFormat format);
void save_catalog(const InstanceCatalog& catalog,
                  const std::filesystem::path& path, CatalogFormat format);

// K[r][i] = capacity of resource r in instance i.
Eigen::MatrixXd composition_matrix(const InstanceCatalog& catalog);
// E[j][i] = 1 iff instance i belongs to provider j.
Eigen::MatrixXd selector_matrix(const InstanceCatalog& catalog);

// Generator parameters for synth_catalog.
//
// The first resource is the size anchor: its value is a power of two drawn
// log-uniformly from [min, max]. Every other resource r is the anchor times a
// ratio drawn uniformly from [min, max] (equal bounds give a fixed ratio),
// rounded to `granularity`.
struct SynthRange {
  double min = 1.0;
  double max = 1.0;
  double granularity = 1.0;
  double price_weight = 0.0;  // currency per unit per hour
};

struct SynthOptions {
  std::vector<SynthRange> ranges;  // one per schema resource
  double base_price = 0.005;
  double noise = 0.15;           // relative price noise amplitude
  double provider_spread = 0.1;  // per-provider price multiplier amplitude
  std::vector<std::string> provider_names;  // default: "provider-<j>"

  // Ranges used for the bundled fixtures (standard schema).
  static SynthOptions standard();
};

// Deterministic for fixed arguments. Requires n >= p >= 1.
CatalogPtr synth_catalog(std::uint64_t seed, std::size_t n, std::size_t p,
                         const ResourceSchema& schema,
                         const SynthOptions& options);

// The catalog shipped as fixtures/catalog.json.
CatalogPtr bundled_catalog();

}  // namespace nodemix

#endif  // NODEMIX_CATALOG_HPP_
