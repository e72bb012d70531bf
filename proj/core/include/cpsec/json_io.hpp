#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "cpsec/analysis.hpp"
#include "cpsec/model.hpp"
#include "cpsec/retrieval.hpp"

// JSON encodings shared by the CLI and the HTTP service. Decoders throw
// Error(kBadRequest) on shape errors and Error(kConfig) on bad values.

namespace cpsec::json_io {

using nlohmann::json;

/// {top_k, threshold, crossref_depth, kinds}; absent fields keep defaults.
json to_json(const AssociationConfig& config);
AssociationConfig config_from_json(const json& j);

json to_json(const Match& match);
json to_json(const AttackSurface& surface);
AttackSurface surface_from_json(const json& j);

json to_json(const ExposureReport& report);
json to_json(const SurfaceDiff& diff);
json to_json(const std::map<SeverityBand, std::vector<SeverityEntry>>& view);

json to_json(const SystemModel& model);
json to_json(const ModelDiff& diff);
json to_json(const Violation& v);
json to_json(const Warning& w);

/// {"op": "add_component" | "remove_component" | "add_connection" |
///  "remove_connection" | "set_attribute" | "remove_attribute", ...}.
/// Attribute ops name their owner with "component" or "connection".
Mutation mutation_from_json(const json& j);
/// Accepts an array or {"mutations": [...]}.
std::vector<Mutation> mutations_from_json(const json& j);

/// {kinds?, keyword?, min_severity?, components?}
FilterSpec filter_from_json(const json& j);

}  // namespace cpsec::json_io
