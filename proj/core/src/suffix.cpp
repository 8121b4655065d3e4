#include "dnslsh/suffix.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dnslsh/error.hpp"

namespace dnslsh {
namespace detail {
std::string_view bundled_suffix_list();
}

namespace {

std::vector<std::uint32_t> decode_utf8(std::string_view s) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw std::invalid_argument("malformed UTF-8");
    }
    if (i + len > s.size()) throw std::invalid_argument("truncated UTF-8");
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) throw std::invalid_argument("malformed UTF-8");
      cp = (cp << 6) | (b & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

char encode_digit(std::uint32_t d) {
  return static_cast<char>(d < 26 ? 'a' + d : '0' + (d - 26));
}

std::uint32_t adapt(std::uint32_t delta, std::uint32_t points, bool first) {
  constexpr std::uint32_t base = 36, tmin = 1, tmax = 26, skew = 38, damp = 700;
  delta = first ? delta / damp : delta / 2;
  delta += delta / points;
  std::uint32_t k = 0;
  while (delta > ((base - tmin) * tmax) / 2) {
    delta /= base - tmin;
    k += base;
  }
  return k + (base - tmin + 1) * delta / (delta + skew);
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string normalize_rule_name(std::string_view name) {
  std::string out;
  std::size_t start = 0;
  while (start <= name.size()) {
    auto dot = name.find('.', start);
    if (dot == std::string_view::npos) dot = name.size();
    if (!out.empty() || start > 0) out.push_back('.');
    out += ascii_lower(to_a_label(name.substr(start, dot - start)));
    start = dot + 1;
  }
  return out;
}

}  // namespace

std::string to_a_label(std::string_view utf8_label) {
  if (std::all_of(utf8_label.begin(), utf8_label.end(),
                  [](char c) { return static_cast<unsigned char>(c) < 0x80; })) {
    return std::string(utf8_label);
  }
  constexpr std::uint32_t base = 36, tmin = 1, tmax = 26;
  const auto input = decode_utf8(utf8_label);
  std::string output;
  for (auto cp : input) {
    if (cp < 0x80) output.push_back(static_cast<char>(cp));
  }
  const auto basic = static_cast<std::uint32_t>(output.size());
  std::uint32_t handled = basic;
  if (basic > 0) output.push_back('-');

  std::uint32_t n = 0x80, delta = 0, bias = 72;
  while (handled < input.size()) {
    std::uint32_t m = UINT32_MAX;
    for (auto cp : input) {
      if (cp >= n && cp < m) m = cp;
    }
    delta += (m - n) * (handled + 1);
    n = m;
    for (auto cp : input) {
      if (cp < n) ++delta;
      if (cp == n) {
        std::uint32_t q = delta;
        for (std::uint32_t k = base;; k += base) {
          const std::uint32_t t = k <= bias ? tmin : (k >= bias + tmax ? tmax : k - bias);
          if (q < t) break;
          output.push_back(encode_digit(t + (q - t) % (base - t)));
          q = (q - t) / (base - t);
        }
        output.push_back(encode_digit(q));
        bias = adapt(delta, handled + 1, handled == basic);
        delta = 0;
        ++handled;
      }
    }
    ++delta;
    ++n;
  }
  return "xn--" + output;
}

SuffixRules SuffixRules::parse(std::string_view text, Options options) {
  SuffixRules rules;
  bool in_private = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;

    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty()) continue;
    if (line.starts_with("//")) {
      if (line.find("===BEGIN PRIVATE DOMAINS===") != std::string_view::npos) in_private = true;
      if (line.find("===END PRIVATE DOMAINS===") != std::string_view::npos) in_private = false;
      if (auto v = line.find("VERSION:"); v != std::string_view::npos && rules.version_.empty()) {
        auto value = line.substr(v + 8);
        while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
        rules.version_ = std::string(value);
      }
      continue;
    }
    if (in_private && !options.include_private) continue;
    // A rule ends at the first whitespace.
    if (auto ws = line.find_first_of(" \t"); ws != std::string_view::npos) line = line.substr(0, ws);

    if (line.starts_with("!")) {
      rules.exception_.insert(normalize_rule_name(line.substr(1)));
    } else if (line.starts_with("*.")) {
      rules.wildcard_.insert(normalize_rule_name(line.substr(2)));
    } else {
      rules.exact_.insert(normalize_rule_name(line));
    }
  }
  return rules;
}

SuffixRules SuffixRules::load(const std::filesystem::path& path, Options options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open suffix list '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), options);
}

const SuffixRules& SuffixRules::bundled() {
  static const SuffixRules rules = parse(detail::bundled_suffix_list(), Options{});
  return rules;
}

const SuffixRules& SuffixRules::bundled(Options options) {
  if (!options.include_private) return bundled();
  static const SuffixRules rules = parse(detail::bundled_suffix_list(), options);
  return rules;
}

std::size_t SuffixRules::public_suffix_labels(std::string_view name) const {
  // Offsets of each candidate suffix: suffixes[j] is the last j+1 labels.
  std::vector<std::size_t> starts;
  starts.push_back(name.size());
  std::size_t label_count = 0;
  for (std::size_t i = name.size(); i > 0; --i) {
    if (name[i - 1] == '.') {
      starts.push_back(i);
      ++label_count;
    }
  }
  starts.push_back(0);
  ++label_count;
  // starts[j] (j >= 1) is the start offset of the suffix with j labels.

  auto suffix = [&](std::size_t labels) { return std::string(name.substr(starts[labels])); };

  for (std::size_t j = label_count; j >= 1; --j) {
    if (exception_.count(suffix(j))) return j - 1;
  }
  std::size_t best = 1;
  for (std::size_t j = 1; j <= label_count; ++j) {
    if (exact_.count(suffix(j))) best = std::max(best, j);
    if (j >= 2 && wildcard_.count(suffix(j - 1))) best = std::max(best, j);
  }
  return best;
}

std::optional<SubdomainSplit> extract_subdomain(std::string_view qname, const SuffixRules& rules,
                                                ExclusionReason* reason) {
  auto fail = [&](ExclusionReason r) -> std::optional<SubdomainSplit> {
    if (reason) *reason = r;
    return std::nullopt;
  };
  if (!qname.empty() && qname.back() == '.') qname.remove_suffix(1);
  if (qname.empty() || qname.front() == '.' || qname.find("..") != std::string_view::npos) {
    return fail(ExclusionReason::InvalidName);
  }

  // Matching form: lowercase, non-ASCII labels as A-labels. Label
  // boundaries are kept so we can map back onto the original string.
  std::vector<std::string_view> labels;
  for (std::size_t start = 0;;) {
    auto dot = qname.find('.', start);
    if (dot == std::string_view::npos) {
      labels.push_back(qname.substr(start));
      break;
    }
    labels.push_back(qname.substr(start, dot - start));
    start = dot + 1;
  }
  std::string lower;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) lower.push_back('.');
    try {
      lower += ascii_lower(to_a_label(labels[i]));
    } catch (const std::invalid_argument&) {
      lower += ascii_lower(labels[i]);
    }
  }

  const std::size_t suffix_labels = rules.public_suffix_labels(lower);
  if (labels.size() <= suffix_labels) return fail(ExclusionReason::NoRegisteredDomain);

  const std::size_t first_registered = labels.size() - suffix_labels - 1;
  const auto reg_offset = static_cast<std::size_t>(labels[first_registered].data() - qname.data());
  SubdomainSplit out;
  out.registered_domain = std::string(qname.substr(reg_offset));
  if (reg_offset > 0) out.subdomain = std::string(qname.substr(0, reg_offset - 1));
  return out;
}

}  // namespace dnslsh
