#include "dnslsh/feature_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dnslsh/csv.hpp"
#include "dnslsh/error.hpp"
#include "json_meta.hpp"

namespace dnslsh {

using nlohmann::json;

json metadata_json(const FeatureMetadata& meta) {
  json j;
  j["window_size"] = meta.window_size;
  j["segments"] = meta.hash.segment_count;
  j["include_global"] = meta.hash.include_global;
  j["threshold_mode"] = to_string(meta.hash.threshold_mode);
  j["delimiters"] = meta.hash.delimiters;
  j["slot_layout"] = slot_layout(meta.hash);
  j["stat_layout"] = std::vector<std::string>(kStatNames.begin(), kStatNames.end());
  j["dimension"] = meta.dimension();
  return j;
}

FeatureMetadata metadata_from(const json& j) {
  try {
    FeatureMetadata meta;
    meta.window_size = j.at("window_size").get<int>();
    meta.hash.segment_count = j.at("segments").get<int>();
    meta.hash.include_global = j.at("include_global").get<bool>();
    meta.hash.threshold_mode = threshold_mode_from_string(j.at("threshold_mode").get<std::string>());
    meta.hash.delimiters = j.at("delimiters").get<std::string>();
    meta.validate();
    if (j.contains("slot_layout") &&
        j["slot_layout"].get<std::vector<std::string>>() != slot_layout(meta.hash)) {
      throw MetadataMismatch("slot layout in metadata does not match its segment settings");
    }
    return meta;
  } catch (const json::exception& e) {
    throw CorruptFileError(std::string("bad featurization metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptFileError(std::string("bad featurization metadata: ") + e.what());
  }
}

std::string metadata_to_json(const FeatureMetadata& meta, int indent) {
  return metadata_json(meta).dump(indent);
}

FeatureMetadata metadata_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CorruptFileError(std::string("metadata is not valid JSON: ") + e.what());
  }
  return metadata_from(j);
}

std::filesystem::path metadata_path(const std::filesystem::path& features_csv) {
  return std::filesystem::path(features_csv.string() + ".meta.json");
}

void write_feature_file(const FeatureSet& set, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + csv_path.string() + "' for writing");
  const std::size_t dim = set.meta.dimension();
  std::vector<std::string> fields = {"stream_key", "window_index", "label_binary", "label_family",
                                     "label_behavior"};
  for (std::size_t i = 0; i < dim; ++i) fields.push_back("f" + std::to_string(i));
  write_csv_row(out, fields);
  for (const auto& row : set.rows) {
    if (row.values.size() != dim) {
      throw std::invalid_argument("feature row has " + std::to_string(row.values.size()) +
                                  " values, expected " + std::to_string(dim));
    }
    fields.assign(5 + dim, {});
    fields[0] = row.key.to_string();
    fields[1] = std::to_string(row.window_index);
    if (row.label) {
      fields[2] = row.label->binary;
      fields[3] = row.label->family;
      fields[4] = row.label->behavior.value_or("");
    }
    for (std::size_t i = 0; i < dim; ++i) fields[5 + i] = format_double(row.values[i]);
    write_csv_row(out, fields);
  }
  if (!out) throw IoError("write to '" + csv_path.string() + "' failed");

  json sidecar;
  sidecar["format"] = "dnslsh-features";
  sidecar["format_version"] = kFeatureFormatVersion;
  sidecar["featurization"] = metadata_json(set.meta);
  try {
    sidecar["config"] = json::parse(set.config_json);
  } catch (const json::exception&) {
    sidecar["config"] = set.config_json;
  }
  sidecar["windows"] = set.rows.size();
  std::ofstream meta_out(metadata_path(csv_path), std::ios::binary);
  if (!meta_out) throw IoError("cannot write '" + metadata_path(csv_path).string() + "'");
  meta_out << sidecar.dump(2) << '\n';
}

FeatureSet read_feature_file(const std::filesystem::path& csv_path) {
  FeatureSet set;
  {
    const auto mpath = metadata_path(csv_path);
    std::ifstream min(mpath, std::ios::binary);
    if (!min) throw IoError("missing metadata sidecar '" + mpath.string() + "'");
    std::stringstream buf;
    buf << min.rdbuf();
    json sidecar;
    try {
      sidecar = json::parse(buf.str());
    } catch (const json::exception& e) {
      throw CorruptFileError("metadata sidecar '" + mpath.string() + "' is not valid JSON: " +
                             e.what());
    }
    const int version = sidecar.value("format_version", 0);
    if (version != kFeatureFormatVersion) throw FormatVersionError(version, kFeatureFormatVersion);
    if (!sidecar.contains("featurization")) {
      throw CorruptFileError("metadata sidecar lacks 'featurization'");
    }
    set.meta = metadata_from(sidecar["featurization"]);
    if (sidecar.contains("config")) set.config_json = sidecar["config"].dump();
  }

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + csv_path.string() + "' for reading");
  CsvReader reader(in);
  CsvRow row;
  if (!reader.next(row)) throw SchemaError("feature file is empty (header row required)");
  const std::size_t dim = set.meta.dimension();
  const char* fixed[] = {"stream_key", "window_index", "label_binary", "label_family",
                         "label_behavior"};
  if (row.fields.size() != 5 + dim) {
    throw SchemaError("feature file has " + std::to_string(row.fields.size()) +
                      " columns, metadata implies " + std::to_string(5 + dim));
  }
  for (std::size_t i = 0; i < 5; ++i) {
    if (row.fields[i] != fixed[i]) throw SchemaError(std::string("missing column '") + fixed[i] + "'");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (row.fields[5 + i] != "f" + std::to_string(i)) {
      throw SchemaError("missing column 'f" + std::to_string(i) + "'");
    }
  }

  while (reader.next(row)) {
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;
    if (row.fields.size() != 5 + dim) {
      throw RowError(row.line, "expected " + std::to_string(5 + dim) + " fields, found " +
                                   std::to_string(row.fields.size()));
    }
    FeatureRow fr;
    try {
      fr.key = StreamKey::parse(row.fields[0]);
      fr.window_index = std::stoul(row.fields[1]);
      if (!row.fields[3].empty()) {
        WindowLabel label;
        label.binary = row.fields[2];
        label.family = row.fields[3];
        if (!row.fields[4].empty()) label.behavior = row.fields[4];
        fr.label = std::move(label);
      }
      fr.values.reserve(dim);
      for (std::size_t i = 0; i < dim; ++i) fr.values.push_back(parse_double(row.fields[5 + i]));
    } catch (const DataError& e) {
      throw RowError(row.line, e.what());
    } catch (const std::exception& e) {
      throw RowError(row.line, e.what());
    }
    set.rows.push_back(std::move(fr));
  }
  return set;
}

}  // namespace dnslsh
