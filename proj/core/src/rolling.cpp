#include "dnslsh/rolling.hpp"

#include <stdexcept>

namespace dnslsh {

RollingState::RollingState(const FeatureMetadata& meta)
    : meta_(meta),
      n_(static_cast<std::size_t>(meta.window_size)),
      slots_(meta.slot_count()),
      ring_(n_),
      occupied_(n_, false),
      scores_(slots_ * n_ * n_, 0),
      histograms_(slots_, Histogram{}),
      sums_(slots_, 0),
      sums_sq_(slots_, 0) {
  meta_.validate();
}

std::optional<std::vector<double>> RollingState::update(const QueryDigests& query) {
  if (query.slots.size() != slots_) {
    throw std::invalid_argument("query has " + std::to_string(query.slots.size()) +
                                " digest slots, rolling state expects " + std::to_string(slots_));
  }
  const std::size_t pos = head_;
  if (occupied_[pos]) {
    for (std::size_t s = 0; s < slots_; ++s) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == pos || !occupied_[j]) continue;
        const int v = score(s, pos, j);
        --histograms_[s][static_cast<std::size_t>(v + 128)];
        sums_[s] -= v;
        sums_sq_[s] -= std::int64_t{v} * v;
      }
    }
    active_ -= n_ - 1;
  }

  ring_[pos] = query;
  std::size_t added = 0;
  for (std::size_t j = 0; j < n_; ++j) {
    if (j == pos || !occupied_[j]) continue;
    for (std::size_t s = 0; s < slots_; ++s) {
      const int v = compare(query.slots[s], ring_[j].slots[s]);
      ++compare_calls_;
      score(s, pos, j) = v;
      score(s, j, pos) = v;
      ++histograms_[s][static_cast<std::size_t>(v + 128)];
      sums_[s] += v;
      sums_sq_[s] += std::int64_t{v} * v;
    }
    ++added;
  }
  active_ += added;
  occupied_[pos] = true;
  head_ = (head_ + 1) % n_;
  ++seen_;

  if (seen_ < n_) return std::nullopt;
  return emit();
}

std::vector<int> RollingState::active_score_multiset(std::size_t slot) const {
  std::vector<int> out;
  out.reserve(active_);
  for (std::size_t b = 0; b < 257; ++b) {
    out.insert(out.end(), histograms_[slot][b], static_cast<int>(b) - 128);
  }
  return out;
}

std::vector<double> RollingState::emit() const {
  std::vector<double> values;
  values.reserve(meta_.dimension());
  const auto m = static_cast<std::int64_t>(active_);
  for (std::size_t s = 0; s < slots_; ++s) {
    const Histogram& h = histograms_[s];
    // k-th smallest active score (0-based).
    auto kth = [&h](std::size_t k) {
      std::size_t cum = 0;
      for (std::size_t b = 0; b < 257; ++b) {
        cum += h[b];
        if (cum > k) return static_cast<int>(b) - 128;
      }
      return 128;
    };
    auto quantile = [&](double p) {
      const double pos = p * static_cast<double>(m - 1);
      const auto lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, active_ - 1);
      const double frac = pos - static_cast<double>(lo);
      const int lo_v = kth(lo);
      const int hi_v = kth(hi);
      return lo_v + frac * (hi_v - lo_v);
    };
    const std::int64_t sum = sums_[s];
    const std::int64_t sum_sq = sums_sq_[s];
    const double mean = static_cast<double>(sum) / static_cast<double>(m);
    const double variance = static_cast<double>(m * sum_sq - sum * sum) /
                            (static_cast<double>(m) * static_cast<double>(m));
    const double lo = kth(0);
    const double hi = kth(active_ - 1);
    const StatsBlock block{mean, quantile(0.5), quantile(0.25), quantile(0.75), variance, lo, hi,
                           hi - lo};
    values.insert(values.end(), block.begin(), block.end());
  }
  return values;
}

}  // namespace dnslsh
