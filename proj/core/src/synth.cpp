#include "dnslsh/synth.hpp"

#include <array>
#include <stdexcept>

#include "dnslsh/random.hpp"

namespace dnslsh {
namespace {

// Alphanumeric subset; no delimiter characters.
constexpr std::string_view kBase64Url =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
constexpr std::string_view kBase32 = "abcdefghijklmnopqrstuvwxyz234567";
constexpr std::string_view kHexLetters = "0123456789abcdef";
constexpr std::string_view kCdnAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";

constexpr std::array<std::string_view, 10> kVocabulary = {
    "www", "mail", "api", "static", "img", "login", "smtp", "news", "assets", "auth"};

std::string_view alphabet_chars(SynthAlphabet a) {
  switch (a) {
    case SynthAlphabet::Base64Url: return kBase64Url;
    case SynthAlphabet::Base32: return kBase32;
    case SynthAlphabet::HexLetters: return kHexLetters;
  }
  return kBase32;
}

std::size_t draw_length(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform_below(rng, hi - lo + 1));
}

std::string random_string(Rng& rng, std::string_view alphabet, std::size_t len) {
  std::string s(len, 'a');
  for (auto& c : s) c = alphabet[uniform_below(rng, alphabet.size())];
  return s;
}

// Splits a payload into DNS labels of at most 63 characters.
std::string to_labels(const std::string& payload) {
  std::string out;
  for (std::size_t pos = 0; pos < payload.size(); pos += 63) {
    if (pos) out.push_back('.');
    out += payload.substr(pos, 63);
  }
  return out;
}

std::string hex4(std::size_t v) {
  std::string s(4, '0');
  for (int i = 3; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kHexLetters[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace

std::string to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::BenignStatic: return "benign-static";
    case SynthKind::BenignCdn: return "benign-cdn";
    case SynthKind::TunnelUpload: return "tunnel-upload";
    case SynthKind::TunnelDownload: return "tunnel-download";
    case SynthKind::TunnelIdle: return "tunnel-idle";
  }
  return "benign-static";
}

SynthKind synth_kind_from_string(std::string_view name) {
  for (auto k : {SynthKind::BenignStatic, SynthKind::BenignCdn, SynthKind::TunnelUpload,
                 SynthKind::TunnelDownload, SynthKind::TunnelIdle}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown synth kind '" + std::string(name) + "'");
}

std::string to_string(SynthAlphabet a) {
  switch (a) {
    case SynthAlphabet::Base64Url: return "base64url";
    case SynthAlphabet::Base32: return "base32";
    case SynthAlphabet::HexLetters: return "hex";
  }
  return "base32";
}

SynthAlphabet synth_alphabet_from_string(std::string_view name) {
  for (auto a : {SynthAlphabet::Base64Url, SynthAlphabet::Base32, SynthAlphabet::HexLetters}) {
    if (name == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown alphabet '" + std::string(name) +
                              "' (expected base64url, base32 or hex)");
}

void SynthProfile::validate() const {
  if (min_length > max_length) throw std::invalid_argument("min length exceeds max length");
  if (!(repeat_probability >= 0.0 && repeat_probability <= 1.0)) {
    throw std::invalid_argument("repeat probability must be in [0, 1]");
  }
  if (!(payload_randomness >= 0.0 && payload_randomness <= 1.0)) {
    throw std::invalid_argument("payload randomness must be in [0, 1]");
  }
  if (domain.empty()) throw std::invalid_argument("domain must not be empty");
  if (!(interval >= 0.0) || !(start_time >= 0.0)) {
    throw std::invalid_argument("timestamps must be non-negative");
  }
}

std::vector<DnsQueryRecord> generate(const SynthProfile& p) {
  p.validate();
  Rng rng = make_rng(p.seed, static_cast<std::uint64_t>(p.kind));
  const std::string_view alphabet = alphabet_chars(p.alphabet);

  // Low-entropy content the tunnel payloads blend in when randomness < 1.
  const std::string pattern = random_string(rng, alphabet, 16);
  auto payload = [&](std::size_t len, std::size_t offset) {
    std::string s(len, 'a');
    for (std::size_t i = 0; i < len; ++i) {
      s[i] = uniform01(rng) < p.payload_randomness ? alphabet[uniform_below(rng, alphabet.size())]
                                                   : pattern[(offset + i) % pattern.size()];
    }
    return s;
  };

  std::vector<DnsQueryRecord> out;
  out.reserve(p.query_count);
  std::string previous;
  std::size_t vocab_size = 2 + static_cast<std::size_t>(uniform_below(rng, 7));  // 2..8 names
  const std::size_t vocab_offset = static_cast<std::size_t>(uniform_below(rng, kVocabulary.size()));
  const std::string idle_base = random_string(rng, alphabet, draw_length(rng, p.min_length, p.max_length));
  std::size_t sent = 0;

  for (std::size_t i = 0; i < p.query_count; ++i) {
    DnsQueryRecord r;
    r.timestamp = p.start_time + p.interval * static_cast<double>(i);
    r.source = p.source;
    std::string sub;
    switch (p.kind) {
      case SynthKind::BenignStatic: {
        if (previous.empty() || uniform01(rng) >= p.repeat_probability) {
          const auto pick = (vocab_offset + uniform_below(rng, vocab_size)) % kVocabulary.size();
          sub = std::string(kVocabulary[pick]);
        } else {
          sub = previous;
        }
        previous = sub;
        r.qtype = uniform01(rng) < 0.7 ? "A" : "AAAA";
        r.family_label = kLegitimate;
        break;
      }
      case SynthKind::BenignCdn: {
        sub = random_string(rng, kCdnAlphabet, draw_length(rng, p.min_length, p.max_length));
        r.qtype = "A";
        r.family_label = kLegitimate;
        break;
      }
      case SynthKind::TunnelUpload: {
        const std::size_t len = draw_length(rng, p.min_length, p.max_length);
        sub = to_labels(payload(len, sent));
        sent += len;
        r.qtype = "TXT";
        r.family_label = kSyntheticFamily;
        r.behavior_label = "upload";
        break;
      }
      case SynthKind::TunnelDownload: {
        // Sequence tag followed by a short request token.
        const std::size_t len = draw_length(rng, p.min_length, p.max_length);
        const std::size_t body = len > 4 ? len - 4 : 0;
        sub = to_labels(hex4(i).substr(0, len - body) + payload(body, sent));
        sent += body;
        r.qtype = "TXT";
        r.family_label = kSyntheticFamily;
        r.behavior_label = "download";
        break;
      }
      case SynthKind::TunnelIdle: {
        sub = idle_base + std::to_string(i % 100);
        r.qtype = "A";
        r.family_label = kSyntheticFamily;
        r.behavior_label = "idle";
        break;
      }
    }
    r.qname = sub.empty() ? p.domain : sub + "." + p.domain;
    out.push_back(std::move(r));
  }
  return out;
}

SynthProfile default_profile(SynthKind kind, std::string domain, std::size_t count,
                             std::uint64_t seed) {
  SynthProfile p;
  p.kind = kind;
  p.domain = std::move(domain);
  p.query_count = count;
  p.seed = seed;
  switch (kind) {
    case SynthKind::BenignStatic:
      p.repeat_probability = 0.7;
      break;
    case SynthKind::BenignCdn:
      p.min_length = 6;
      p.max_length = 14;
      break;
    case SynthKind::TunnelUpload:
      p.min_length = 48;
      p.max_length = 63;
      p.alphabet = SynthAlphabet::Base64Url;
      break;
    case SynthKind::TunnelDownload:
      p.min_length = 20;
      p.max_length = 30;
      p.alphabet = SynthAlphabet::Base32;
      break;
    case SynthKind::TunnelIdle:
      p.min_length = 10;
      p.max_length = 14;
      p.alphabet = SynthAlphabet::HexLetters;
      break;
  }
  return p;
}

std::vector<DnsQueryRecord> generate_corpus(std::size_t benign_queries, std::size_t tunnel_queries,
                                            std::uint64_t seed, std::size_t domains_per_class) {
  if (domains_per_class == 0) throw std::invalid_argument("need at least one domain per class");
  std::vector<DnsQueryRecord> out;
  auto emit = [&](SynthKind kind, std::size_t total, std::size_t streams, const char* prefix) {
    for (std::size_t s = 0; s < streams; ++s) {
      const std::size_t count = total / streams + (s < total % streams ? 1 : 0);
      auto p = default_profile(kind, std::string(prefix) + std::to_string(s) + ".com", count,
                               splitmix64(seed) ^ splitmix64(out.size() + 1));
      p.source = "synth-" + std::to_string(seed);
      auto records = generate(p);
      out.insert(out.end(), records.begin(), records.end());
    }
  };
  const std::size_t benign_each = (domains_per_class + 1) / 2;
  const std::size_t tunnel_each = (domains_per_class + 2) / 3;
  emit(SynthKind::BenignStatic, benign_queries / 2, benign_each, "site");
  emit(SynthKind::BenignCdn, benign_queries - benign_queries / 2, benign_each, "cdn");
  emit(SynthKind::TunnelUpload, tunnel_queries / 3, tunnel_each, "exfil");
  emit(SynthKind::TunnelDownload, tunnel_queries / 3, tunnel_each, "stage");
  emit(SynthKind::TunnelIdle, tunnel_queries - 2 * (tunnel_queries / 3), tunnel_each, "beacon");
  return out;
}

}  // namespace dnslsh
