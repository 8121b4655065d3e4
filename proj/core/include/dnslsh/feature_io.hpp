#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dnslsh/features.hpp"
#include "dnslsh/labels.hpp"

namespace dnslsh {

struct FeatureRow {
  StreamKey key;
  std::size_t window_index = 0;
  std::optional<WindowLabel> label;
  std::vector<double> values;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

/// Windows of one featurization run plus the settings that produced them.
struct FeatureSet {
  FeatureMetadata meta;
  std::vector<FeatureRow> rows;
  /// Free-form resolved configuration echoed into the sidecar (JSON text).
  std::string config_json = "{}";
};

inline constexpr int kFeatureFormatVersion = 1;

/// Sidecar path for a feature CSV: "<path>.meta.json".
std::filesystem::path metadata_path(const std::filesystem::path& features_csv);

/// CSV header: stream_key,window_index,label_binary,label_family,
/// label_behavior,f0..f{D-1}. Values use the shortest round-trip decimal
/// form, so writing is deterministic and lossless.
void write_feature_file(const FeatureSet& set, const std::filesystem::path& csv_path);
FeatureSet read_feature_file(const std::filesystem::path& csv_path);

std::string metadata_to_json(const FeatureMetadata& meta, int indent = -1);
FeatureMetadata metadata_from_json(const std::string& json_text);

}  // namespace dnslsh
