#include "dnslsh/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "dnslsh/error.hpp"
#include "dnslsh/random.hpp"

namespace dnslsh {

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix m;
  for (const auto& r : rows) m.push_row(r);
  return m;
}

void FeatureMatrix::push_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw std::invalid_argument("row has " + std::to_string(values.size()) + " values, expected " +
                                std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void ForestParams::validate() const {
  if (tree_count < 1) throw std::invalid_argument("tree count must be >= 1");
  if (max_depth < 0) throw std::invalid_argument("max depth must be >= 0 (0 = unlimited)");
  if (min_samples_leaf < 1) throw std::invalid_argument("min samples per leaf must be >= 1");
  if (features_per_split < 0) throw std::invalid_argument("features per split must be >= 0");
}

int ForestParams::resolved_features_per_split(std::size_t dimension) const {
  if (features_per_split > 0) {
    return std::min<int>(features_per_split, static_cast<int>(dimension));
  }
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dimension)))));
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const std::size_t> y, std::size_t classes,
              const ForestParams& params, Rng& rng)
      : x_(x),
        y_(y),
        classes_(classes),
        params_(params),
        mtry_(params.resolved_features_per_split(x.cols())),
        rng_(rng),
        order_(x.cols()) {
    for (std::size_t f = 0; f < order_.size(); ++f) order_[f] = f;
  }

  DecisionTree build(std::vector<std::size_t> samples) {
    DecisionTree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, samples, 0);
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0;
  };

  std::vector<std::uint32_t> class_counts(const std::vector<std::size_t>& samples) const {
    std::vector<std::uint32_t> counts(classes_, 0);
    for (auto s : samples) ++counts[y_[s]];
    return counts;
  }

  void grow(DecisionTree& tree, std::size_t node, std::vector<std::size_t>& samples, int depth) {
    auto counts = class_counts(samples);
    const auto nonzero = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
    const auto n = samples.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    const bool depth_reached = params_.max_depth > 0 && depth >= params_.max_depth;
    if (nonzero <= 1 || depth_reached || n < 2 * min_leaf) {
      tree.nodes[node].counts = std::move(counts);
      return;
    }

    const Split best = find_split(samples);
    if (best.feature < 0) {
      tree.nodes[node].counts = std::move(counts);
      return;
    }

    std::vector<std::size_t> left, right;
    left.reserve(n);
    right.reserve(n);
    for (auto s : samples) {
      (x_(s, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    const auto left_id = tree.nodes.size();
    tree.nodes.emplace_back();
    const auto right_id = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes[node].feature = best.feature;
    tree.nodes[node].threshold = best.threshold;
    tree.nodes[node].left = static_cast<int>(left_id);
    tree.nodes[node].right = static_cast<int>(right_id);
    grow(tree, left_id, left, depth + 1);
    grow(tree, right_id, right, depth + 1);
  }

  // Maximizes sum_c L_c^2 / |L| + sum_c R_c^2 / |R|, which is equivalent to
  // minimizing the weighted Gini impurity of the children.
  Split find_split(const std::vector<std::size_t>& samples) {
    shuffle(order_.begin(), order_.end(), rng_);
    const auto n = samples.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);

    Split best;
    int examined = 0;
    std::vector<std::pair<double, std::size_t>> column(n);
    std::vector<double> left(classes_), right(classes_);
    for (std::size_t f : order_) {
      if (examined >= mtry_ && best.feature >= 0) break;
      for (std::size_t i = 0; i < n; ++i) column[i] = {x_(samples[i], f), y_[samples[i]]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;  // constant here
      ++examined;

      std::fill(left.begin(), left.end(), 0.0);
      std::fill(right.begin(), right.end(), 0.0);
      for (const auto& [v, c] : column) right[c] += 1.0;
      double left_sq = 0.0;
      double right_sq = 0.0;
      for (double r : right) right_sq += r * r;

      for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t c = column[i].second;
        left_sq += 2.0 * left[c] + 1.0;
        right_sq -= 2.0 * right[c] - 1.0;
        left[c] += 1.0;
        right[c] -= 1.0;
        const std::size_t n_left = i + 1;
        if (n_left < min_leaf || n - n_left < min_leaf) continue;
        if (column[i].first == column[i + 1].first) continue;
        const double score = left_sq / static_cast<double>(n_left) +
                             right_sq / static_cast<double>(n - n_left);
        if (score > best.score) {
          const double a = column[i].first;
          const double b = column[i + 1].first;
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best = {static_cast<int>(f), mid, score};
        }
      }
      if (examined >= mtry_ && best.feature >= 0) break;
    }
    return best;
  }

  const FeatureMatrix& x_;
  std::span<const std::size_t> y_;
  std::size_t classes_;
  const ForestParams& params_;
  int mtry_;
  Rng& rng_;
  std::vector<std::size_t> order_;
};

const TreeNode& leaf_for(const DecisionTree& tree, std::span<const double> x) {
  const TreeNode* node = &tree.nodes[0];
  while (!node->is_leaf()) {
    const auto f = static_cast<std::size_t>(node->feature);
    node = &tree.nodes[static_cast<std::size_t>(x[f] <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

}  // namespace

DecisionTree train_tree(const FeatureMatrix& features, std::span<const std::size_t> label_index,
                        std::size_t class_count, const ForestParams& params,
                        std::uint64_t tree_seed) {
  Rng rng = make_rng(tree_seed);
  std::vector<std::size_t> samples(features.rows());
  if (params.bootstrap) {
    for (auto& s : samples) s = static_cast<std::size_t>(uniform_below(rng, features.rows()));
  } else {
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = i;
  }
  TreeBuilder builder(features, label_index, class_count, params, rng);
  return builder.build(std::move(samples));
}

ForestModel train_forest(const FeatureMatrix& features, std::span<const std::string> labels,
                         const ForestParams& params, std::uint64_t seed,
                         const TrainOptions& options) {
  params.validate();
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("feature rows (" + std::to_string(features.rows()) +
                                ") and labels (" + std::to_string(labels.size()) + ") differ");
  }
  if (features.rows() == 0 || features.cols() == 0) {
    throw std::invalid_argument("cannot train on an empty feature matrix");
  }

  ForestModel model;
  model.params = params;
  model.dimension = features.cols();
  model.seed = seed;
  model.classes = options.classes;
  if (model.classes.empty()) {
    model.classes.assign(labels.begin(), labels.end());
    sort_classes(model.classes);
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                        model.classes.end());
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < model.classes.size(); ++i) index[model.classes[i]] = i;
  std::vector<std::size_t> y(labels.size());
  std::vector<bool> present(model.classes.size(), false);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = index.find(labels[i]);
    if (it == index.end()) throw std::invalid_argument("label '" + labels[i] + "' not in class list");
    y[i] = it->second;
    present[it->second] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw std::invalid_argument("training data must contain at least two classes");
  }

  const auto tree_count = static_cast<std::size_t>(params.tree_count);
  model.trees.resize(tree_count);
  unsigned workers = options.workers ? options.workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(tree_count));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tree_count;) {
      try {
        model.trees[t] = train_tree(features, y, model.classes.size(), params,
                                    splitmix64(seed) ^ splitmix64(t + 1));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return model;
}

Prediction ForestModel::predict(std::span<const double> x) const {
  if (x.size() != dimension) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                " features, model expects " + std::to_string(dimension));
  }
  Prediction p;
  p.probabilities.assign(classes.size(), 0.0);
  for (const auto& tree : trees) {
    const auto& leaf = leaf_for(tree, x);
    double total = 0.0;
    for (auto c : leaf.counts) total += c;
    if (total <= 0.0) continue;
    for (std::size_t c = 0; c < leaf.counts.size(); ++c) p.probabilities[c] += leaf.counts[c] / total;
  }
  for (auto& v : p.probabilities) v /= static_cast<double>(trees.size());
  p.class_index = 0;
  for (std::size_t c = 1; c < p.probabilities.size(); ++c) {
    if (p.probabilities[c] > p.probabilities[p.class_index]) p.class_index = c;
  }
  p.label = classes[p.class_index];
  return p;
}

void ForestModel::check_compatible(const FeatureMetadata& meta) const {
  if (!featurization) {
    throw MetadataMismatch("model carries no featurization metadata");
  }
  if (auto why = describe_mismatch(*featurization, meta); !why.empty()) {
    throw MetadataMismatch("feature/model mismatch: " + why);
  }
  if (meta.dimension() != dimension) {
    throw MetadataMismatch("feature dimension " + std::to_string(meta.dimension()) +
                           " differs from model dimension " + std::to_string(dimension));
  }
}

}  // namespace dnslsh
