#include "dnslsh/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace dnslsh {

void FeatureMetadata::validate() const {
  if (window_size < 2 || window_size > 1000) {
    throw std::invalid_argument("window size must be in [2, 1000], got " +
                                std::to_string(window_size));
  }
  hash.validate();
}

std::string describe_mismatch(const FeatureMetadata& e, const FeatureMetadata& a) {
  auto diff = [](const char* what, const std::string& x, const std::string& y) {
    return std::string(what) + " differs: expected " + x + ", found " + y;
  };
  if (e.window_size != a.window_size) {
    return diff("window size", std::to_string(e.window_size), std::to_string(a.window_size));
  }
  if (e.hash.segment_count != a.hash.segment_count) {
    return diff("segment count", std::to_string(e.hash.segment_count),
                std::to_string(a.hash.segment_count));
  }
  if (e.hash.include_global != a.hash.include_global) {
    return diff("include_global", e.hash.include_global ? "true" : "false",
                a.hash.include_global ? "true" : "false");
  }
  if (e.hash.threshold_mode != a.hash.threshold_mode) {
    return diff("threshold mode", to_string(e.hash.threshold_mode),
                to_string(a.hash.threshold_mode));
  }
  if (e.hash.delimiters != a.hash.delimiters) {
    return diff("delimiter set", "'" + e.hash.delimiters + "'", "'" + a.hash.delimiters + "'");
  }
  return {};
}

WindowSplit make_windows(const DomainStream& stream, int n, const HashConfig& config) {
  if (n < 2) throw std::invalid_argument("window size must be >= 2, got " + std::to_string(n));
  const auto size = static_cast<std::size_t>(n);
  WindowSplit out;
  const std::size_t count = stream.queries.size() / size;
  out.discarded = stream.queries.size() - count * size;
  out.windows.reserve(count);
  const std::span<const CleanQuery> all(stream.queries);
  for (std::size_t w = 0; w < count; ++w) {
    Window window;
    window.key = stream.key;
    window.index = w;
    window.queries = all.subspan(w * size, size);
    window.digests.reserve(size);
    for (const auto& q : window.queries) {
      window.digests.push_back(digest_query(q.subdomain_clean, config));
    }
    out.windows.push_back(std::move(window));
  }
  return out;
}

std::vector<int> pairwise_scores(std::span<const QueryDigests> digests, std::size_t slot) {
  for (const auto& d : digests) {
    if (slot >= d.slots.size()) {
      throw std::invalid_argument("slot " + std::to_string(slot) + " out of range (" +
                                  std::to_string(d.slots.size()) + " slots)");
    }
  }
  std::vector<int> scores;
  const std::size_t n = digests.size();
  scores.reserve(n * (n > 0 ? n - 1 : 0) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      scores.push_back(compare(digests[i].slots[slot], digests[j].slots[slot]));
    }
  }
  return scores;
}

StatsBlock stats_block(std::span<const int> scores) {
  if (scores.empty()) throw std::invalid_argument("stats_block needs at least one score");
  std::vector<int> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());

  const auto m = static_cast<std::int64_t>(sorted.size());
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
  for (int v : sorted) {
    sum += v;
    sum_sq += std::int64_t{v} * v;
  }
  // Integer numerators keep mean and variance exact up to the final division.
  const double mean = static_cast<double>(sum) / static_cast<double>(m);
  const double variance =
      static_cast<double>(m * sum_sq - sum * sum) / (static_cast<double>(m) * static_cast<double>(m));

  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(m - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  };

  const double lo = sorted.front();
  const double hi = sorted.back();
  return {mean, quantile(0.5), quantile(0.25), quantile(0.75), variance, lo, hi, hi - lo};
}

std::vector<double> featurize_digests(std::span<const QueryDigests> digests,
                                      const FeatureMetadata& meta) {
  std::vector<double> values;
  values.reserve(meta.dimension());
  for (std::size_t slot = 0; slot < meta.slot_count(); ++slot) {
    const auto block = stats_block(pairwise_scores(digests, slot));
    values.insert(values.end(), block.begin(), block.end());
  }
  return values;
}

FeatureVector featurize_window(const Window& window, const FeatureMetadata& meta) {
  if (window.digests.size() != static_cast<std::size_t>(meta.window_size)) {
    throw std::invalid_argument("window holds " + std::to_string(window.digests.size()) +
                                " queries, expected " + std::to_string(meta.window_size));
  }
  FeatureVector fv;
  fv.values = featurize_digests(window.digests, meta);
  fv.key = window.key;
  fv.window_index = window.index;
  return fv;
}

}  // namespace dnslsh
