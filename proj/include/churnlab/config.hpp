#pragma once

#include "churnlab/experiments.hpp"

#include <json.hpp>

#include <string>

namespace churnlab {

using Json = nlohmann::ordered_json;

Json load_json_file(const std::string& path);

/// Strict parsers: unknown keys are rejected, seeds must be explicit, and no
/// value is ever drawn from time or machine state.
ChurnExperimentConfig parse_churn_config(const Json& j);
RetrievalExperimentConfig parse_retrieval_config(const Json& j);

/// Output directory named in the config ("out"), empty if absent.
std::string config_out_dir(const Json& j);

}  // namespace churnlab
