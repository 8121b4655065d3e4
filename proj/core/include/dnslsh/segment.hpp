#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dnslsh/digest.hpp"
#include "dnslsh/nilsimsa.hpp"

namespace dnslsh {

/// Splits `s` into `k` contiguous pieces whose lengths differ by at most
/// one. The first (|s| mod k) pieces receive the extra character. Pieces
/// are empty when |s| < k. Throws std::invalid_argument for k == 0.
std::vector<std::string_view> segment_string(std::string_view s, int k);

/// Digests of one cleaned subdomain. When the config includes the global
/// digest it occupies slot 0, followed by the segment digests left to right.
struct QueryDigests {
  std::vector<Digest> slots;
  std::size_t subdomain_length = 0;

  friend bool operator==(const QueryDigests&, const QueryDigests&) = default;
};

QueryDigests digest_query(std::string_view subdomain, const HashConfig& config);

/// Names of the digest slots, e.g. {"global", "segment_1", "segment_2"}.
std::vector<std::string> slot_layout(const HashConfig& config);

}  // namespace dnslsh
