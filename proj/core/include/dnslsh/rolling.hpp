#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dnslsh/features.hpp"

namespace dnslsh {

/// Stride-1 sliding window over one stream. Each update compares the new
/// query with the n-1 queries it will share the window with and retires
/// the scores of the evicted query, so an update costs n-1 comparisons
/// per slot instead of n(n-1)/2.
///
/// Scores of the active window are kept in one 257-bucket histogram per
/// slot; statistics are read off the histograms with the same formulas as
/// stats_block, so emitted vectors equal batch featurization exactly.
/// Single writer: one state per stream.
class RollingState {
 public:
  explicit RollingState(const FeatureMetadata& meta);

  /// Pushes one query. Returns a vector once at least n queries have been
  /// seen, on every update thereafter. Throws std::invalid_argument when
  /// the slot count does not match.
  std::optional<std::vector<double>> update(const QueryDigests& query);

  std::size_t seen() const { return seen_; }
  /// Active pairwise scores per slot; n(n-1)/2 once warm.
  std::size_t active_scores() const { return active_; }
  std::uint64_t compare_calls() const { return compare_calls_; }
  /// Active scores of `slot` in ascending order.
  std::vector<int> active_score_multiset(std::size_t slot) const;

 private:
  using Histogram = std::array<std::uint32_t, 257>;

  std::vector<double> emit() const;
  int& score(std::size_t slot, std::size_t a, std::size_t b) {
    return scores_[(slot * n_ + a) * n_ + b];
  }

  FeatureMetadata meta_;
  std::size_t n_;
  std::size_t slots_;
  std::vector<QueryDigests> ring_;
  std::vector<bool> occupied_;
  std::size_t head_ = 0;  ///< ring position of the next insert (= oldest when full)
  std::vector<int> scores_;  ///< per slot, n x n symmetric matrix over ring positions
  std::vector<Histogram> histograms_;
  std::vector<std::int64_t> sums_;
  std::vector<std::int64_t> sums_sq_;
  std::size_t seen_ = 0;
  std::size_t active_ = 0;
  std::uint64_t compare_calls_ = 0;
};

}  // namespace dnslsh
