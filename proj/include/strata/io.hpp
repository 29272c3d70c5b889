#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "strata/idset.hpp"
#include "strata/inference.hpp"
#include "strata/model.hpp"

namespace strata::io {

using json = nlohmann::ordered_json;

/// CSV observations. Two schemas, detected from the header:
///   y,d,z         one row per observation
///   y,d,z,count   aggregated cells
ObservedDistribution load_csv(const std::string& path, const Support& support);
ObservedDistribution parse_csv(const std::string& text, const Support& support,
                               const std::string& origin = "<csv>");

struct ModelFile {
  StrataModel model;
  std::optional<ParameterSpec> parameter;
};

ModelFile load_model(const std::string& path);
ModelFile parse_model(const json& j);

/// 64-bit FNV-1a content digest, hex encoded.
std::string digest(const std::string& content);
std::string digest_file(const std::string& path);

json manifest(const json& resolved_config,
              const std::vector<std::pair<std::string, std::string>>& input_digests,
              std::uint64_t seed, double wall_ms);

json bound_result_to_json(const BoundResult& r, const SystemMatrix& sys);
json test_outcome_to_json(const TestOutcome& t);
json confidence_region_to_json(const ConfidenceRegion& r);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace strata::io
