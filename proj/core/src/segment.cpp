#include "dnslsh/segment.hpp"

#include <stdexcept>

namespace dnslsh {

std::vector<std::string_view> segment_string(std::string_view s, int k) {
  if (k <= 0) {
    throw std::invalid_argument("segment count must be >= 1, got " + std::to_string(k));
  }
  const auto parts = static_cast<std::size_t>(k);
  const std::size_t base = s.size() / parts;
  const std::size_t extra = s.size() % parts;

  std::vector<std::string_view> out;
  out.reserve(parts);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    out.push_back(s.substr(pos, len));
    pos += len;
  }
  return out;
}

QueryDigests digest_query(std::string_view subdomain, const HashConfig& config) {
  QueryDigests q;
  q.subdomain_length = subdomain.size();
  q.slots.reserve(config.slot_count());
  if (config.include_global) {
    q.slots.push_back(nilsimsa_digest(subdomain, config.threshold_mode));
  }
  for (auto piece : segment_string(subdomain, config.segment_count)) {
    q.slots.push_back(nilsimsa_digest(piece, config.threshold_mode));
  }
  return q;
}

std::vector<std::string> slot_layout(const HashConfig& config) {
  std::vector<std::string> names;
  if (config.include_global) names.emplace_back("global");
  for (int i = 1; i <= config.segment_count; ++i) {
    names.push_back("segment_" + std::to_string(i));
  }
  return names;
}

}  // namespace dnslsh
