#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dnslsh/nilsimsa.hpp"
#include "dnslsh/records.hpp"
#include "dnslsh/segment.hpp"

namespace dnslsh {

/// Order of the descriptors inside each per-slot block.
inline constexpr std::array<const char*, 8> kStatNames = {
    "mean", "median", "q1", "q3", "variance", "min", "max", "range"};
inline constexpr std::size_t kStatsPerSlot = kStatNames.size();

using StatsBlock = std::array<double, kStatsPerSlot>;

/// Everything that determines the layout and meaning of a feature vector.
struct FeatureMetadata {
  int window_size = 20;
  HashConfig hash;

  std::size_t slot_count() const { return hash.slot_count(); }
  std::size_t dimension() const { return kStatsPerSlot * slot_count(); }
  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;

  friend bool operator==(const FeatureMetadata&, const FeatureMetadata&) = default;
};

/// Human-readable description of the first difference, empty if equal.
std::string describe_mismatch(const FeatureMetadata& expected, const FeatureMetadata& actual);

/// n consecutive queries of one stream with their digests. `queries` views
/// the stream the window was cut from.
struct Window {
  StreamKey key;
  std::size_t index = 0;
  std::span<const CleanQuery> queries;
  std::vector<QueryDigests> digests;
};

struct WindowSplit {
  std::vector<Window> windows;
  std::size_t discarded = 0;  ///< trailing queries that did not fill a window
};

/// Cuts the stream into floor(len / n) non-overlapping windows. Throws
/// std::invalid_argument when n < 2.
WindowSplit make_windows(const DomainStream& stream, int n, const HashConfig& config);

/// Scores of every pair i < j in lexicographic (i, j) order for one slot.
std::vector<int> pairwise_scores(std::span<const QueryDigests> digests, std::size_t slot);
inline std::vector<int> pairwise_scores(const Window& window, std::size_t slot) {
  return pairwise_scores(window.digests, slot);
}

/// mean, median, Q1, Q3, population variance, min, max, range. Quantiles
/// interpolate linearly at position p * (m - 1) of the sorted scores.
/// Throws std::invalid_argument on an empty list.
StatsBlock stats_block(std::span<const int> scores);

struct FeatureVector {
  std::vector<double> values;
  StreamKey key;
  std::size_t window_index = 0;
};

FeatureVector featurize_window(const Window& window, const FeatureMetadata& meta);
/// Featurizes bare digests (all with meta.slot_count() slots).
std::vector<double> featurize_digests(std::span<const QueryDigests> digests,
                                      const FeatureMetadata& meta);

}  // namespace dnslsh
