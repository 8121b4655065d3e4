#include "dnslsh/digest.hpp"

#include <stdexcept>

namespace dnslsh {
namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument(std::string("invalid hex character '") + c + "' in digest");
}

void check_length(std::string_view hex) {
  if (hex.size() != 64) {
    throw std::invalid_argument("digest hex must be 64 characters, got " +
                                std::to_string(hex.size()));
  }
}

}  // namespace

std::string Digest::to_hex() const {
  std::string out(64, '0');
  for (std::size_t nibble = 0; nibble < 64; ++nibble) {
    const std::uint64_t w = words_[nibble / 16];
    out[nibble] = kHexDigits[(w >> (60 - 4 * (nibble % 16))) & 0xF];
  }
  return out;
}

Digest Digest::from_hex(std::string_view hex) {
  check_length(hex);
  Digest d;
  for (std::size_t nibble = 0; nibble < 64; ++nibble) {
    const auto v = static_cast<std::uint64_t>(hex_value(hex[nibble]));
    d.words_[nibble / 16] |= v << (60 - 4 * (nibble % 16));
  }
  return d;
}

std::string Digest::to_canonical_hex() const {
  std::string out;
  out.reserve(64);
  for (int byte = 31; byte >= 0; --byte) {
    unsigned v = 0;
    for (int b = 0; b < 8; ++b) {
      if (bit(static_cast<std::size_t>(8 * byte + b))) v |= 1U << b;
    }
    out.push_back(kHexDigits[v >> 4]);
    out.push_back(kHexDigits[v & 0xF]);
  }
  return out;
}

Digest Digest::from_canonical_hex(std::string_view hex) {
  check_length(hex);
  Digest d;
  for (int pair = 0; pair < 32; ++pair) {
    const int v = hex_value(hex[2 * pair]) * 16 + hex_value(hex[2 * pair + 1]);
    const int byte = 31 - pair;
    for (int b = 0; b < 8; ++b) {
      if ((v >> b) & 1) d.set(static_cast<std::size_t>(8 * byte + b));
    }
  }
  return d;
}

}  // namespace dnslsh
