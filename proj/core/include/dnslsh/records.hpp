#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dnslsh {

inline constexpr const char* kLegitimate = "legitimate";

/// One observed DNS query.
struct DnsQueryRecord {
  double timestamp = 0.0;  ///< seconds since epoch
  std::string qname;
  std::string qtype;  ///< mnemonic, e.g. "A", "TXT", "TYPE65"
  std::optional<std::string> family_label;
  std::optional<std::string> behavior_label;  ///< handshake | idle | download | upload
  std::string source;  ///< capture identifier

  friend bool operator==(const DnsQueryRecord&, const DnsQueryRecord&) = default;
};

/// Throws DataError when the record violates its invariants (empty qname,
/// negative timestamp, unknown behavior, behavior without a malicious family).
void validate_record(const DnsQueryRecord& record);

bool is_known_behavior(const std::string& behavior);

struct CleanQuery {
  DnsQueryRecord record;
  std::string registered_domain;
  std::string subdomain_clean;
};

struct StreamKey {
  std::string source;
  std::string registered_domain;

  /// "source|registered_domain"; registered domains never contain '|'.
  std::string to_string() const { return source + "|" + registered_domain; }
  static StreamKey parse(const std::string& text);

  friend auto operator<=>(const StreamKey&, const StreamKey&) = default;
};

struct DomainStream {
  StreamKey key;
  std::vector<CleanQuery> queries;
};

}  // namespace dnslsh
