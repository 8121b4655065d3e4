#pragma once

#include <filesystem>
#include <string>

#include "dnslsh/forest.hpp"

namespace dnslsh {

inline constexpr int kModelFormatVersion = 1;

/// JSON document with format version, task, classes, hyperparameters,
/// featurization metadata, seed, resolved config and the trees as nested
/// node records. Output is byte-deterministic for a given model.
std::string model_to_json(const ForestModel& model);
/// Throws CorruptFileError on undecodable input and FormatVersionError on
/// a version this build does not read.
ForestModel model_from_json(const std::string& text);

void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace dnslsh
