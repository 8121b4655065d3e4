#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dnslsh/feature_io.hpp"
#include "dnslsh/forest.hpp"
#include "dnslsh/ingest.hpp"
#include "dnslsh/labels.hpp"
#include "dnslsh/records.hpp"
#include "dnslsh/suffix.hpp"

namespace dnslsh {

struct FeaturizeOptions {
  FeatureMetadata meta;
  /// Attach window labels; every query must then carry a family label.
  bool labeled = true;
  unsigned workers = 0;  ///< 0 = hardware concurrency
};

struct StreamWindowCount {
  std::string stream_key;
  std::size_t queries = 0;
  std::size_t windows = 0;
  std::size_t discarded = 0;
};

struct FeaturizeReport {
  std::vector<StreamWindowCount> streams;
  std::size_t windows = 0;
  std::size_t discarded = 0;  ///< trailing queries dropped across all streams
  std::size_t excluded = 0;   ///< records without a registered domain
};

/// Non-overlapping windows of every stream, featurized in stream order.
/// Output is identical for any worker count.
FeatureSet featurize_streams(const std::vector<DomainStream>& streams,
                             const FeaturizeOptions& options, FeaturizeReport* report = nullptr);

/// ingest -> features: groups records by registered domain and featurizes.
FeatureSet featurize_records(const std::vector<DnsQueryRecord>& records, const SuffixRules& rules,
                             const FeaturizeOptions& options, FeaturizeReport* report = nullptr);

/// True when every record carries a family label.
bool all_labeled(const std::vector<DnsQueryRecord>& records);

/// Rows of `set` usable for `task` with their class labels.
struct TaskDataset {
  FeatureMatrix x;
  std::vector<std::string> y;
  std::vector<std::size_t> rows;  ///< indices into the source set
};

TaskDataset task_dataset(const FeatureSet& set, Task task);
FeatureSet subset(const FeatureSet& set, std::span<const std::size_t> rows);

/// Trains a forest on all usable rows of `set` and stamps task, featurization
/// metadata and the resolved config onto the model.
ForestModel train_task_model(const FeatureSet& set, Task task, const ForestParams& params,
                             std::uint64_t seed, unsigned workers = 0,
                             const std::string& config_json = "{}");

/// Equal-sized seeded sample of legitimate windows from `benign_pool`
/// (fewer if the pool is smaller), appended to `set`. Used to complement
/// malicious-only evaluation sets. Throws MetadataMismatch when the pool
/// was featurized differently.
void supplement_benign(FeatureSet& set, const FeatureSet& benign_pool, std::uint64_t seed);

}  // namespace dnslsh
