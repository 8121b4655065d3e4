#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dnslsh/feature_io.hpp"
#include "dnslsh/forest.hpp"
#include "dnslsh/labels.hpp"

namespace dnslsh {

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct Metrics {
  Task task = Task::Binary;
  std::vector<std::string> classes;
  /// confusion[true][predicted], indexed like `classes`.
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<ClassMetrics> per_class;
  std::size_t total = 0;
  double accuracy = 0.0;
  double f1_weighted = 0.0;
  double f1_macro = 0.0;
  /// F1 of "malicious" as the positive class (binary task only).
  std::optional<double> f1_binary;
  /// true-legitimate windows predicted as anything else / true-legitimate
  /// windows; 0 when there are none.
  double false_positive_rate = 0.0;
  std::size_t legitimate_windows = 0;

  /// Binary-task F1 for the binary task, weighted F1 otherwise.
  double headline_f1() const { return f1_binary.value_or(f1_weighted); }
};

/// Builds the confusion matrix over `classes` extended by any label seen in
/// y_true or y_pred but not listed. Precision, recall and F1 use 0 when
/// their denominator is 0.
Metrics compute_metrics(Task task, std::span<const std::string> y_true,
                        std::span<const std::string> y_pred, std::vector<std::string> classes);

/// Window labels of `set` under `task`; excluded windows get nullopt.
/// Throws DataError for unlabeled rows or labels outside the taxonomy.
std::vector<std::optional<std::string>> task_labels(const FeatureSet& set, Task task);

/// Direct evaluation of one model. Throws MetadataMismatch when the model
/// was trained under different featurization settings.
Metrics evaluate(const ForestModel& model, const FeatureSet& set, Task task);

/// Family label when the binary model flags the vector, "legitimate"
/// otherwise. The family model is not consulted for legitimate vectors.
std::string two_step_classify(const ForestModel& binary_model, const ForestModel& family_model,
                              std::span<const double> x);

/// Two-step detection then identification, scored against family labels.
Metrics evaluate_two_step(const ForestModel& binary_model, const ForestModel& family_model,
                          const FeatureSet& set);

/// Metrics per capture source (the stream key's source part). With a family
/// model the two-step route is used, otherwise `model` directly.
std::map<std::string, Metrics> evaluate_per_source(const ForestModel& model,
                                                   const ForestModel* family_model,
                                                   const FeatureSet& set, Task task);

/// Serializes the report (confusion matrix, per-class table, aggregates).
std::string metrics_to_json(const Metrics& metrics, int indent = 2);

}  // namespace dnslsh
