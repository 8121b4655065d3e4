#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dnslsh/records.hpp"

namespace dnslsh {

enum class SynthKind { BenignStatic, BenignCdn, TunnelUpload, TunnelDownload, TunnelIdle };
enum class SynthAlphabet { Base64Url, Base32, HexLetters };

std::string to_string(SynthKind kind);
SynthKind synth_kind_from_string(std::string_view name);
std::string to_string(SynthAlphabet alphabet);
SynthAlphabet synth_alphabet_from_string(std::string_view name);

/// Family assigned to generated tunnel traffic.
inline constexpr const char* kSyntheticFamily = "synthetic";

struct SynthProfile {
  SynthKind kind = SynthKind::BenignStatic;
  std::size_t query_count = 100;
  /// Length of the generated (cleaned) subdomain payload. For benign-static
  /// it bounds the vocabulary names instead and is ignored.
  std::size_t min_length = 8;
  std::size_t max_length = 16;
  SynthAlphabet alphabet = SynthAlphabet::Base32;
  /// benign-static: probability of repeating the previous name.
  double repeat_probability = 0.7;
  /// tunnel kinds: probability that a payload character is random rather
  /// than taken from a fixed low-entropy pattern.
  double payload_randomness = 1.0;
  std::string domain = "example.com";
  std::string source = "synth";
  std::uint64_t seed = 42;
  double start_time = 1700000000.0;
  double interval = 0.5;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Deterministic under the profile's seed. Tunnel kinds carry family
/// "synthetic" with behavior upload / download / idle; benign kinds carry
/// "legitimate" and no behavior.
std::vector<DnsQueryRecord> generate(const SynthProfile& profile);

/// Profile defaults for `kind` (lengths, alphabet) with the given identity.
SynthProfile default_profile(SynthKind kind, std::string domain, std::size_t count,
                             std::uint64_t seed);

/// Mixed corpus: `benign_queries` split over benign-static and benign-cdn
/// streams and `tunnel_queries` over upload / download / idle streams, each
/// stream on its own domain (at least `domains_per_class` per side).
std::vector<DnsQueryRecord> generate_corpus(std::size_t benign_queries,
                                            std::size_t tunnel_queries, std::uint64_t seed,
                                            std::size_t domains_per_class = 6);

}  // namespace dnslsh
