#include "dnslsh/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "dnslsh/error.hpp"

namespace dnslsh {

Metrics compute_metrics(Task task, std::span<const std::string> y_true,
                        std::span<const std::string> y_pred, std::vector<std::string> classes) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("label and prediction counts differ");
  }
  auto add_missing = [&classes](std::span<const std::string> ys) {
    for (const auto& y : ys) {
      if (std::find(classes.begin(), classes.end(), y) == classes.end()) classes.push_back(y);
    }
  };
  add_missing(y_true);
  add_missing(y_pred);
  sort_classes(classes);

  Metrics m;
  m.task = task;
  m.classes = classes;
  const std::size_t k = classes.size();
  m.confusion.assign(k, std::vector<std::size_t>(k, 0));
  auto idx = [&classes](const std::string& y) {
    return static_cast<std::size_t>(std::find(classes.begin(), classes.end(), y) - classes.begin());
  };
  for (std::size_t i = 0; i < y_true.size(); ++i) ++m.confusion[idx(y_true[i])][idx(y_pred[i])];

  m.total = y_true.size();
  std::size_t trace = 0;
  for (std::size_t c = 0; c < k; ++c) trace += m.confusion[c][c];
  m.accuracy = m.total ? static_cast<double>(trace) / static_cast<double>(m.total) : 0.0;

  double weighted = 0.0;
  double macro = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = m.confusion[c][c];
    std::size_t support = 0, predicted = 0;
    for (std::size_t o = 0; o < k; ++o) {
      support += m.confusion[c][o];
      predicted += m.confusion[o][c];
    }
    ClassMetrics cm;
    cm.label = classes[c];
    cm.support = support;
    cm.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    cm.recall = support ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
    cm.f1 = cm.precision + cm.recall > 0.0
                ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                : 0.0;
    weighted += cm.f1 * static_cast<double>(support);
    if (support > 0 || predicted > 0) {
      macro += cm.f1;
      ++present;
    }
    if (task == Task::Binary && cm.label == kMalicious) m.f1_binary = cm.f1;
    m.per_class.push_back(std::move(cm));
  }
  m.f1_weighted = m.total ? weighted / static_cast<double>(m.total) : 0.0;
  m.f1_macro = present ? macro / static_cast<double>(present) : 0.0;
  if (task == Task::Binary && !m.f1_binary) m.f1_binary = 0.0;

  const auto legit = std::find(classes.begin(), classes.end(), kLegitimate);
  if (legit != classes.end()) {
    const auto l = static_cast<std::size_t>(legit - classes.begin());
    std::size_t false_pos = 0;
    for (std::size_t o = 0; o < k; ++o) {
      m.legitimate_windows += m.confusion[l][o];
      if (o != l) false_pos += m.confusion[l][o];
    }
    m.false_positive_rate = m.legitimate_windows ? static_cast<double>(false_pos) /
                                                       static_cast<double>(m.legitimate_windows)
                                                 : 0.0;
  }
  return m;
}

std::vector<std::optional<std::string>> task_labels(const FeatureSet& set, Task task) {
  std::vector<std::optional<std::string>> out;
  out.reserve(set.rows.size());
  for (const auto& row : set.rows) {
    if (!row.label) {
      throw DataError("window " + row.key.to_string() + "#" + std::to_string(row.window_index) +
                      " has no label");
    }
    auto label = task_label(*row.label, task);
    if (label && !is_task_label(task, *label)) {
      throw DataError("label '" + *label + "' of window " + row.key.to_string() + "#" +
                      std::to_string(row.window_index) + " is not a " + to_string(task) +
                      " class");
    }
    out.push_back(std::move(label));
  }
  return out;
}

Metrics evaluate(const ForestModel& model, const FeatureSet& set, Task task) {
  model.check_compatible(set.meta);
  std::vector<std::string> y_true, y_pred;
  const auto labels = task_labels(set, task);
  for (std::size_t i = 0; i < set.rows.size(); ++i) {
    if (!labels[i]) continue;
    y_true.push_back(*labels[i]);
    y_pred.push_back(model.predict(set.rows[i].values).label);
  }
  return compute_metrics(task, y_true, y_pred, model.classes);
}

std::string two_step_classify(const ForestModel& binary_model, const ForestModel& family_model,
                              std::span<const double> x) {
  const auto detected = binary_model.predict(x);
  if (detected.label == kLegitimate) return kLegitimate;
  return family_model.predict(x).label;
}

Metrics evaluate_two_step(const ForestModel& binary_model, const ForestModel& family_model,
                          const FeatureSet& set) {
  binary_model.check_compatible(set.meta);
  family_model.check_compatible(set.meta);
  std::vector<std::string> y_true, y_pred;
  const auto labels = task_labels(set, Task::Family);
  for (std::size_t i = 0; i < set.rows.size(); ++i) {
    if (!labels[i]) continue;
    y_true.push_back(*labels[i]);
    y_pred.push_back(two_step_classify(binary_model, family_model, set.rows[i].values));
  }
  auto classes = family_model.classes;
  if (std::find(classes.begin(), classes.end(), kLegitimate) == classes.end()) {
    classes.emplace_back(kLegitimate);
  }
  return compute_metrics(Task::Family, y_true, y_pred, classes);
}

std::map<std::string, Metrics> evaluate_per_source(const ForestModel& model,
                                                   const ForestModel* family_model,
                                                   const FeatureSet& set, Task task) {
  std::map<std::string, FeatureSet> parts;
  for (const auto& row : set.rows) {
    auto& part = parts[row.key.source];
    part.meta = set.meta;
    part.rows.push_back(row);
  }
  std::map<std::string, Metrics> out;
  for (const auto& [source, part] : parts) {
    out.emplace(source, family_model ? evaluate_two_step(model, *family_model, part)
                                     : evaluate(model, part, task));
  }
  return out;
}

std::string metrics_to_json(const Metrics& m, int indent) {
  nlohmann::json j;
  j["task"] = to_string(m.task);
  j["classes"] = m.classes;
  j["confusion_matrix"] = m.confusion;
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& c : m.per_class) {
    per_class.push_back({{"label", c.label},
                         {"precision", c.precision},
                         {"recall", c.recall},
                         {"f1", c.f1},
                         {"support", c.support}});
  }
  j["per_class"] = per_class;
  j["windows"] = m.total;
  j["accuracy"] = m.accuracy;
  j["f1_weighted"] = m.f1_weighted;
  j["f1_macro"] = m.f1_macro;
  if (m.f1_binary) j["f1_binary"] = *m.f1_binary;
  j["f1"] = m.headline_f1();
  j["false_positive_rate"] = m.false_positive_rate;
  j["legitimate_windows"] = m.legitimate_windows;
  return j.dump(indent);
}

}  // namespace dnslsh
