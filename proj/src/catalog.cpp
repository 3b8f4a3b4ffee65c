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

#include "nodemix/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "json.hpp"

#include "format.hpp"
#include "nodemix/errors.hpp"
#include "rng.hpp"

namespace nodemix {
namespace {

using json = nlohmann::json;

constexpr std::string_view kCsvHeader =
    "provider,sku,cpu_cores,memory_gb,network_units,storage_gb,hourly_usd";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_number(std::string_view field, std::size_t line_no,
                    std::string_view column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(),
                                   value);
  if (ec != std::errc() || ptr != field.data() + field.size() ||
      field.empty()) {
    throw ParseError("catalog line " + std::to_string(line_no) + ": column '" +
                     std::string(column) + "' is not a number: '" +
                     std::string(field) + "'");
  }
  return value;
}

CatalogPtr parse_csv(std::string_view text) {
  ResourceSchema schema = ResourceSchema::standard();
  std::vector<InstanceType> instances;
  std::size_t line_no = 0;
  bool saw_header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!saw_header) {
      if (line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
      if (line != kCsvHeader) {
        throw ParseError("catalog line " + std::to_string(line_no) +
                         ": expected header '" + std::string(kCsvHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    auto fields = split_csv(line);
    if (fields.size() != 7) {
      throw ParseError("catalog line " + std::to_string(line_no) +
                       ": expected 7 fields, found " +
                       std::to_string(fields.size()));
    }
    InstanceType inst;
    inst.provider_id = std::string(fields[0]);
    inst.sku = std::string(fields[1]);
    for (std::size_t r = 0; r < 4; ++r) {
      inst.capacities.push_back(
          parse_number(fields[2 + r], line_no, schema.name(r)));
    }
    inst.hourly_cost = parse_number(fields[6], line_no, "hourly_usd");
    instances.push_back(std::move(inst));
  }
  if (!saw_header) throw ParseError("catalog: empty CSV input");
  return std::make_shared<const InstanceCatalog>(std::move(schema),
                                                 std::move(instances));
}

CatalogPtr parse_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("catalog JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema") || !doc.contains("instances"))
    throw ParseError("catalog JSON: expected object with 'schema' and 'instances'");

  std::vector<ResourceSpec> specs;
  const json& schema = doc.at("schema");
  if (!schema.is_array()) throw ParseError("catalog JSON: 'schema' must be an array");
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const json& s = schema[k];
    if (!s.is_object() || !s.contains("name") || !s.at("name").is_string())
      throw ParseError("catalog JSON: schema entry " + std::to_string(k) +
                       " needs a string 'name'");
    ResourceSpec spec;
    spec.name = s.at("name").get<std::string>();
    if (s.contains("unit")) {
      if (!s.at("unit").is_string())
        throw ParseError("catalog JSON: schema entry " + std::to_string(k) +
                         " has a non-string 'unit'");
      spec.unit = s.at("unit").get<std::string>();
    }
    specs.push_back(std::move(spec));
  }

  std::vector<InstanceType> instances;
  const json& list = doc.at("instances");
  if (!list.is_array()) throw ParseError("catalog JSON: 'instances' must be an array");
  for (std::size_t k = 0; k < list.size(); ++k) {
    const json& rec = list[k];
    auto fail = [k](const std::string& what) {
      return ParseError("catalog JSON: instance record " + std::to_string(k) +
                        ": " + what);
    };
    if (!rec.is_object()) throw fail("not an object");
    for (const char* key : {"provider_id", "sku"}) {
      if (!rec.contains(key) || !rec.at(key).is_string())
        throw fail(std::string("missing string '") + key + "'");
    }
    if (!rec.contains("capacities") || !rec.at("capacities").is_array())
      throw fail("missing array 'capacities'");
    if (!rec.contains("hourly_cost") || !rec.at("hourly_cost").is_number())
      throw fail("missing number 'hourly_cost'");
    InstanceType inst;
    inst.provider_id = rec.at("provider_id").get<std::string>();
    inst.sku = rec.at("sku").get<std::string>();
    for (const json& v : rec.at("capacities")) {
      if (!v.is_number()) throw fail("non-numeric capacity");
      inst.capacities.push_back(v.get<double>());
    }
    inst.hourly_cost = rec.at("hourly_cost").get<double>();
    instances.push_back(std::move(inst));
  }
  return std::make_shared<const InstanceCatalog>(
      ResourceSchema(std::move(specs)), std::move(instances));
}

std::string to_csv(const InstanceCatalog& catalog) {
  if (!(catalog.schema() == ResourceSchema::standard())) {
    throw ValidationError(
        "CSV catalogs carry the standard 4-resource schema only; use JSON");
  }
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& inst : catalog.instances()) {
    out += inst.provider_id;
    out += ',';
    out += inst.sku;
    for (double v : inst.capacities) {
      out += ',';
      out += internal::format_double(v);
    }
    out += ',';
    out += internal::format_double(inst.hourly_cost);
    out += '\n';
  }
  return out;
}

std::string to_json(const InstanceCatalog& catalog) {
  json doc;
  json schema = json::array();
  for (const auto& spec : catalog.schema().resources())
    schema.push_back({{"name", spec.name}, {"unit", spec.unit}});
  json list = json::array();
  for (const auto& inst : catalog.instances()) {
    list.push_back({{"provider_id", inst.provider_id},
                    {"sku", inst.sku},
                    {"capacities", inst.capacities},
                    {"hourly_cost", inst.hourly_cost}});
  }
  doc["schema"] = std::move(schema);
  doc["instances"] = std::move(list);
  return doc.dump(2) + "\n";
}

}  // namespace

CatalogFormat parse_catalog_format(std::string_view name) {
  if (name == "csv") return CatalogFormat::kCsv;
  if (name == "json") return CatalogFormat::kJson;
  throw ValidationError("unknown catalog format '" + std::string(name) + "'");
}

CatalogFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".csv") return CatalogFormat::kCsv;
  if (ext == ".json") return CatalogFormat::kJson;
  throw ValidationError("cannot infer catalog format from '" + path.string() +
                        "'");
}

ResourceSchema::ResourceSchema(std::vector<ResourceSpec> resources)
    : resources_(std::move(resources)) {
  if (resources_.empty())
    throw ValidationError("resource schema needs at least one resource");
  std::set<std::string> seen;
  for (const auto& spec : resources_) {
    if (spec.name.empty())
      throw ValidationError("resource schema has an empty resource name");
    if (!seen.insert(spec.name).second)
      throw ValidationError("duplicate resource name '" + spec.name + "'");
  }
}

ResourceSchema ResourceSchema::standard() {
  return ResourceSchema({{"cpu_cores", "cores"},
                         {"memory_gb", "GB"},
                         {"network_units", "units"},
                         {"storage_gb", "GB"}});
}

std::optional<std::size_t> ResourceSchema::find(std::string_view name) const {
  for (std::size_t r = 0; r < resources_.size(); ++r)
    if (resources_[r].name == name) return r;
  return std::nullopt;
}

InstanceCatalog::InstanceCatalog(ResourceSchema schema,
                                 std::vector<InstanceType> instances)
    : schema_(std::move(schema)), instances_(std::move(instances)) {
  if (instances_.empty())
    throw ValidationError("catalog must contain at least one instance type");
  const std::size_t m = schema_.size();
  std::set<std::pair<std::string, std::string>> keys;
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& inst = instances_[i];
    const std::string where = "instance " + std::to_string(i) + " (" +
                              inst.provider_id + "/" + inst.sku + ")";
    if (inst.provider_id.empty() || inst.sku.empty())
      throw ValidationError(where + ": provider and sku must be nonempty");
    if (inst.capacities.size() != m)
      throw ValidationError(where + ": expected " + std::to_string(m) +
                            " capacities, found " +
                            std::to_string(inst.capacities.size()));
    bool any_positive = false;
    for (double v : inst.capacities) {
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError(where + ": negative or non-finite capacity");
      any_positive = any_positive || v > 0.0;
    }
    if (!any_positive)
      throw ValidationError(where + ": all capacities are zero");
    if (!std::isfinite(inst.hourly_cost) || inst.hourly_cost < 0.0)
      throw ValidationError(where + ": negative or non-finite hourly cost");
    if (!keys.emplace(inst.provider_id, inst.sku).second)
      throw ValidationError(where + ": duplicate (provider, sku)");

    auto it = std::find(providers_.begin(), providers_.end(), inst.provider_id);
    if (it == providers_.end()) {
      provider_of_.push_back(providers_.size());
      providers_.push_back(inst.provider_id);
    } else {
      provider_of_.push_back(static_cast<std::size_t>(it - providers_.begin()));
    }
  }

  const auto n = static_cast<Eigen::Index>(instances_.size());
  composition_.resize(static_cast<Eigen::Index>(m), n);
  selector_ = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(providers_.size()), n);
  costs_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& inst = instances_[static_cast<std::size_t>(i)];
    for (std::size_t r = 0; r < m; ++r)
      composition_(static_cast<Eigen::Index>(r), i) = inst.capacities[r];
    selector_(static_cast<Eigen::Index>(provider_of_[static_cast<std::size_t>(i)]), i) = 1.0;
    costs_(i) = inst.hourly_cost;
  }
}

std::optional<std::size_t> InstanceCatalog::find(std::string_view provider,
                                                 std::string_view sku) const {
  for (std::size_t i = 0; i < instances_.size(); ++i)
    if (instances_[i].provider_id == provider && instances_[i].sku == sku)
      return i;
  return std::nullopt;
}

CatalogPtr parse_catalog(std::string_view text, CatalogFormat format) {
  return format == CatalogFormat::kCsv ? parse_csv(text) : parse_json(text);
}

CatalogPtr load_catalog(const std::filesystem::path& path,
                        CatalogFormat format) {
  return parse_catalog(internal::read_file(path), format);
}

std::string serialize_catalog(const InstanceCatalog& catalog,
                              CatalogFormat format) {
  return format == CatalogFormat::kCsv ? to_csv(catalog) : to_json(catalog);
}

void save_catalog(const InstanceCatalog& catalog,
                  const std::filesystem::path& path, CatalogFormat format) {
  internal::write_file_atomic(path, serialize_catalog(catalog, format));
}

Eigen::MatrixXd composition_matrix(const InstanceCatalog& catalog) {
  return catalog.composition();
}

Eigen::MatrixXd selector_matrix(const InstanceCatalog& catalog) {
  return catalog.selector();
}

SynthOptions SynthOptions::standard() {
  SynthOptions opts;
  // cpu anchor in {1..32} cores; memory 1-8 GB per core; one network unit
  // per two cores; 4-20 GB storage per core.
  opts.ranges = {{1.0, 32.0, 1.0, 0.02},
                 {1.0, 8.0, 0.5, 0.004},
                 {0.5, 0.5, 0.5, 0.0},
                 {4.0, 20.0, 1.0, 0.0002}};
  opts.provider_names = {"azure", "linode"};
  return opts;
}

CatalogPtr synth_catalog(std::uint64_t seed, std::size_t n, std::size_t p,
                         const ResourceSchema& schema,
                         const SynthOptions& options) {
  if (p < 1 || n < p)
    throw ValidationError("synth_catalog requires n >= p >= 1");
  const std::size_t m = schema.size();
  if (options.ranges.size() != m)
    throw ValidationError("synth_catalog: need one range per resource");
  for (const auto& range : options.ranges) {
    if (!(range.min > 0.0) || range.max < range.min || !(range.granularity > 0.0))
      throw ValidationError("synth_catalog: invalid resource range");
  }

  internal::Rng rng(seed);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) {
    names.push_back(j < options.provider_names.size()
                        ? options.provider_names[j]
                        : "provider-" + std::to_string(j));
  }
  std::vector<double> provider_factor;
  for (std::size_t j = 0; j < p; ++j)
    provider_factor.push_back(1.0 + options.provider_spread * rng.uniform(-1.0, 1.0));

  // Powers of two inside the anchor range.
  std::vector<double> sizes;
  for (double s = 1.0; s <= options.ranges[0].max; s *= 2.0)
    if (s >= options.ranges[0].min) sizes.push_back(s);
  if (sizes.empty()) sizes.push_back(options.ranges[0].min);

  std::vector<InstanceType> instances;
  std::vector<std::size_t> per_provider(p, 0);
  for (std::size_t i = 0; i < n; ++i) {
    // First p instances seed every provider; the rest are drawn.
    std::size_t j = i < p ? i : static_cast<std::size_t>(rng.below(p));
    double anchor = sizes[rng.below(sizes.size())];
    InstanceType inst;
    inst.provider_id = names[j];
    inst.sku = names[j] + "-" + std::to_string(per_provider[j]++);
    inst.capacities.resize(m);
    inst.capacities[0] = anchor;
    double price = options.base_price + options.ranges[0].price_weight * anchor;
    for (std::size_t r = 1; r < m; ++r) {
      const SynthRange& range = options.ranges[r];
      double ratio = range.min == range.max ? range.min
                                            : rng.uniform(range.min, range.max);
      double value = std::round(anchor * ratio / range.granularity) * range.granularity;
      value = std::max(value, range.granularity);
      inst.capacities[r] = value;
      price += range.price_weight * value;
    }
    price *= provider_factor[j] * (1.0 + options.noise * rng.uniform(-1.0, 1.0));
    inst.hourly_cost = std::max(1e-4, std::round(price * 1e4) / 1e4);
    instances.push_back(std::move(inst));
  }
  return std::make_shared<const InstanceCatalog>(schema, std::move(instances));
}

CatalogPtr bundled_catalog() {
  static const CatalogPtr catalog = synth_catalog(
      42, 30, 2, ResourceSchema::standard(), SynthOptions::standard());
  return catalog;
}

}  // namespace nodemix
