#pragma once

#include <json.hpp>

#include "dnslsh/features.hpp"

namespace dnslsh {

nlohmann::json metadata_json(const FeatureMetadata& meta);
/// Throws CorruptFileError on missing or invalid fields.
FeatureMetadata metadata_from(const nlohmann::json& j);

}  // namespace dnslsh
