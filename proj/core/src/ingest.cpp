#include "dnslsh/ingest.hpp"

#include <map>

namespace dnslsh {

std::string strip_delimiters(std::string_view subdomain, std::string_view delimiters) {
  std::string out;
  out.reserve(subdomain.size());
  for (char c : subdomain) {
    if (delimiters.find(c) == std::string_view::npos) out.push_back(c);
  }
  return out;
}

GroupResult group_by_domain(const std::vector<DnsQueryRecord>& records, const SuffixRules& rules,
                            std::string_view delimiters) {
  GroupResult result;
  std::map<StreamKey, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ExclusionReason reason{};
    auto split = extract_subdomain(records[i].qname, rules, &reason);
    if (!split) {
      result.excluded.push_back({i, reason});
      continue;
    }
    // Resolution is case-insensitive, so the stream key is too.
    std::string domain_key = split->registered_domain;
    for (auto& c : domain_key) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    StreamKey key{records[i].source, std::move(domain_key)};
    auto [it, inserted] = index.try_emplace(key, result.streams.size());
    if (inserted) result.streams.push_back(DomainStream{key, {}});
    result.streams[it->second].queries.push_back(
        CleanQuery{records[i], std::move(split->registered_domain),
                   strip_delimiters(split->subdomain, delimiters)});
  }
  return result;
}

}  // namespace dnslsh
