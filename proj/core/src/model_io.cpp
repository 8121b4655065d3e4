#include "dnslsh/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dnslsh/error.hpp"
#include "json_meta.hpp"

namespace dnslsh {

using nlohmann::json;

namespace {

json node_json(const DecisionTree& tree, std::size_t id) {
  const TreeNode& n = tree.nodes[id];
  if (n.is_leaf()) return json{{"counts", n.counts}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"left", node_json(tree, static_cast<std::size_t>(n.left))},
              {"right", node_json(tree, static_cast<std::size_t>(n.right))}};
}

void parse_node(const json& j, DecisionTree& tree, std::size_t id, std::size_t dim,
                std::size_t classes, int depth) {
  if (depth > 10000) throw CorruptFileError("tree nesting too deep");
  if (j.contains("counts")) {
    auto counts = j.at("counts").get<std::vector<std::uint32_t>>();
    if (counts.size() != classes) throw CorruptFileError("leaf count vector has wrong length");
    tree.nodes[id].counts = std::move(counts);
    return;
  }
  const int feature = j.at("feature").get<int>();
  const double threshold = j.at("threshold").get<double>();
  if (feature < 0 || static_cast<std::size_t>(feature) >= dim) {
    throw CorruptFileError("split feature index out of range");
  }
  if (!std::isfinite(threshold)) throw CorruptFileError("non-finite split threshold");
  const auto left = tree.nodes.size();
  tree.nodes.emplace_back();
  const auto right = tree.nodes.size();
  tree.nodes.emplace_back();
  tree.nodes[id].feature = feature;
  tree.nodes[id].threshold = threshold;
  tree.nodes[id].left = static_cast<int>(left);
  tree.nodes[id].right = static_cast<int>(right);
  parse_node(j.at("left"), tree, left, dim, classes, depth + 1);
  parse_node(j.at("right"), tree, right, dim, classes, depth + 1);
}

}  // namespace

std::string model_to_json(const ForestModel& model) {
  json j;
  j["format"] = "dnslsh-forest";
  j["format_version"] = kModelFormatVersion;
  j["task"] = model.task ? json(to_string(*model.task)) : json(nullptr);
  j["classes"] = model.classes;
  j["dimension"] = model.dimension;
  j["seed"] = model.seed;
  j["hyperparameters"] = {{"tree_count", model.params.tree_count},
                          {"max_depth", model.params.max_depth},
                          {"min_samples_leaf", model.params.min_samples_leaf},
                          {"features_per_split", model.params.features_per_split},
                          {"bootstrap", model.params.bootstrap}};
  j["featurization"] = model.featurization ? metadata_json(*model.featurization) : json(nullptr);
  try {
    j["config"] = json::parse(model.config_json);
  } catch (const json::exception&) {
    j["config"] = model.config_json;
  }
  json trees = json::array();
  for (const auto& t : model.trees) trees.push_back(node_json(t, 0));
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

ForestModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CorruptFileError(std::string("model file is not valid JSON (truncated?): ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", std::string{}) != "dnslsh-forest") {
      throw CorruptFileError("not a dnslsh forest model");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) throw FormatVersionError(version, kModelFormatVersion);

    ForestModel m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.dimension = j.at("dimension").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("task").is_null()) m.task = task_from_string(j["task"].get<std::string>());
    const auto& hp = j.at("hyperparameters");
    m.params.tree_count = hp.at("tree_count").get<int>();
    m.params.max_depth = hp.at("max_depth").get<int>();
    m.params.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
    m.params.features_per_split = hp.at("features_per_split").get<int>();
    m.params.bootstrap = hp.at("bootstrap").get<bool>();
    if (!j.at("featurization").is_null()) m.featurization = metadata_from(j["featurization"]);
    if (j.contains("config")) m.config_json = j["config"].dump();
    if (m.classes.size() < 2) throw CorruptFileError("model lists fewer than two classes");
    for (const auto& tj : j.at("trees")) {
      DecisionTree tree;
      tree.nodes.emplace_back();
      parse_node(tj, tree, 0, m.dimension, m.classes.size(), 0);
      m.trees.push_back(std::move(tree));
    }
    if (m.trees.empty()) throw CorruptFileError("model has no trees");
    return m;
  } catch (const json::exception& e) {
    throw CorruptFileError(std::string("model file is missing fields: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptFileError(std::string("model file has invalid values: ") + e.what());
  }
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << model_to_json(model);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace dnslsh
