#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "dnslsh/digest.hpp"

namespace dnslsh {

enum class ThresholdMode {
  /// Bit set iff the bucket count strictly exceeds the lower median of
  /// the 256 bucket counts.
  Median,
  /// Bit set iff the bucket count strictly exceeds total trigrams / 256,
  /// as in the reference Nilsimsa implementations.
  CanonicalMean,
};

std::string to_string(ThresholdMode mode);
ThresholdMode threshold_mode_from_string(std::string_view name);

/// Default delimiters stripped from subdomains before hashing.
inline constexpr std::string_view kDefaultDelimiters = ".-_";

struct HashConfig {
  /// Width of the sliding trigram window. Fixed by the algorithm.
  static constexpr int kWindowWidth = 5;

  ThresholdMode threshold_mode = ThresholdMode::Median;
  int segment_count = 2;
  bool include_global = true;
  std::string delimiters{kDefaultDelimiters};

  std::size_t slot_count() const {
    return static_cast<std::size_t>(segment_count) + (include_global ? 1U : 0U);
  }

  /// Throws std::invalid_argument unless segment_count is 1, 2 or 3 and '.'
  /// is among the delimiters.
  void validate() const;

  friend bool operator==(const HashConfig&, const HashConfig&) = default;
};

using Accumulator = std::array<std::uint32_t, 256>;

/// Bucket counts after sliding the width-5 window over `input`.
Accumulator nilsimsa_accumulate(std::string_view input);

Digest nilsimsa_digest(std::string_view input, ThresholdMode mode);

inline Digest nilsimsa_digest(std::string_view input, const HashConfig& config) {
  return nilsimsa_digest(input, config.threshold_mode);
}

}  // namespace dnslsh
