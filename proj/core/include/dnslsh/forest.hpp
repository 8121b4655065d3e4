#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dnslsh/features.hpp"
#include "dnslsh/labels.hpp"

namespace dnslsh {

/// Dense row-major sample matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  /// Appends a row; the first row fixes the column count.
  void push_row(std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct ForestParams {
  int tree_count = 100;
  int max_depth = 0;  ///< 0 = unlimited
  int min_samples_leaf = 1;
  int features_per_split = 0;  ///< 0 = ceil(sqrt(D))
  bool bootstrap = true;

  void validate() const;
  int resolved_features_per_split(std::size_t dimension) const;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Internal node when `feature >= 0` (x[feature] <= threshold goes left),
/// leaf otherwise. Children are indices into the owning tree's node list.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::uint32_t> counts;  ///< leaf class counts, in class-list order

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  ///< nodes[0] is the root
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct Prediction {
  std::size_t class_index = 0;
  std::string label;
  std::vector<double> probabilities;
};

/// Trained Random Forest. Immutable after training; prediction is thread-safe.
struct ForestModel {
  std::vector<std::string> classes;
  std::vector<DecisionTree> trees;
  ForestParams params;
  std::size_t dimension = 0;
  std::uint64_t seed = 0;
  std::optional<Task> task;
  std::optional<FeatureMetadata> featurization;
  /// Resolved configuration echoed into the model file (JSON text).
  std::string config_json = "{}";

  /// Mean of the per-tree leaf class frequencies; the class is the argmax,
  /// ties resolved by class-list order. Throws std::invalid_argument when
  /// |x| != dimension.
  Prediction predict(std::span<const double> x) const;

  /// Throws MetadataMismatch unless `meta` equals the training featurization.
  void check_compatible(const FeatureMetadata& meta) const;
};

struct TrainOptions {
  /// Class order; derived from the labels (lexicographic, "legitimate"
  /// last) when empty. Every label must be listed.
  std::vector<std::string> classes;
  unsigned workers = 0;  ///< 0 = hardware concurrency
};

/// Bagged CART trees with Gini splits over a random feature subset per
/// node. Per-tree randomness derives from (seed, tree index), so the forest
/// does not depend on the worker count. Throws std::invalid_argument on
/// dimension mismatch or fewer than two distinct classes.
ForestModel train_forest(const FeatureMatrix& features, std::span<const std::string> labels,
                         const ForestParams& params, std::uint64_t seed,
                         const TrainOptions& options = {});

/// Single-tree variant used for the depth-limited oracle checks.
DecisionTree train_tree(const FeatureMatrix& features, std::span<const std::size_t> label_index,
                        std::size_t class_count, const ForestParams& params, std::uint64_t tree_seed);

}  // namespace dnslsh
