#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

namespace dnslsh {

/// Public-suffix rule set (publicsuffix.org list format) used to find the
/// registered domain (eTLD+1) of a query name.
///
/// Rules containing non-ASCII labels are converted to their punycode
/// A-label form on load, so they match names as they appear on the wire.
class SuffixRules {
 public:
  struct Options {
    /// Also load the PRIVATE DOMAINS section (e.g. blogspot.com). Off by
    /// default: provider subdomains such as CDN edges stay in the subdomain.
    bool include_private = false;
  };

  SuffixRules() = default;

  static SuffixRules parse(std::string_view list_text, Options options);
  static SuffixRules parse(std::string_view list_text) { return parse(list_text, Options{}); }
  static SuffixRules load(const std::filesystem::path& path, Options options);
  static SuffixRules load(const std::filesystem::path& path) { return load(path, Options{}); }
  /// The snapshot compiled into the library.
  static const SuffixRules& bundled();
  static const SuffixRules& bundled(Options options);

  /// Number of labels of the public suffix of `lower_labels_name`, which
  /// must already be lowercase. At least 1 (implicit "*" rule).
  std::size_t public_suffix_labels(std::string_view lower_name) const;

  /// "VERSION:" header of the list, empty if absent.
  const std::string& version() const { return version_; }
  std::size_t rule_count() const { return exact_.size() + wildcard_.size() + exception_.size(); }

 private:
  std::unordered_set<std::string> exact_;
  std::unordered_set<std::string> wildcard_;   ///< "*.x.y" stored as "x.y"
  std::unordered_set<std::string> exception_;  ///< "!a.x.y" stored as "a.x.y"
  std::string version_;
};

struct SubdomainSplit {
  std::string subdomain;          ///< may be empty
  std::string registered_domain;  ///< eTLD+1, case preserved

  friend bool operator==(const SubdomainSplit&, const SubdomainSplit&) = default;
};

enum class ExclusionReason { NoRegisteredDomain, InvalidName };

/// Splits a query name into subdomain and registered domain. Matching is
/// case-insensitive; output preserves the input case. A trailing dot is
/// ignored. Returns nullopt (with `reason` set when non-null) if the name
/// is a public suffix itself or is not a valid dotted name.
std::optional<SubdomainSplit> extract_subdomain(std::string_view qname, const SuffixRules& rules,
                                                ExclusionReason* reason = nullptr);

/// RFC 3492 encoding of one label; ASCII labels are returned unchanged,
/// others as "xn--...". Input is UTF-8. Throws std::invalid_argument on
/// malformed UTF-8.
std::string to_a_label(std::string_view utf8_label);

}  // namespace dnslsh
