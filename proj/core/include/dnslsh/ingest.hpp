#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dnslsh/records.hpp"
#include "dnslsh/suffix.hpp"

namespace dnslsh {

/// Removes every character of `delimiters` from `subdomain`.
std::string strip_delimiters(std::string_view subdomain, std::string_view delimiters);

struct ExcludedRecord {
  std::size_t index;  ///< position in the input list
  ExclusionReason reason;
};

struct GroupResult {
  /// One stream per (source, registered domain), in order of first appearance.
  std::vector<DomainStream> streams;
  std::vector<ExcludedRecord> excluded;
};

/// Cleans each record's subdomain and groups records into per-domain
/// streams. Input order is preserved inside every stream.
GroupResult group_by_domain(const std::vector<DnsQueryRecord>& records, const SuffixRules& rules,
                            std::string_view delimiters);

}  // namespace dnslsh
