#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace dnslsh {

/// 256-bit Nilsimsa digest. Bit i corresponds to accumulator bucket i.
///
/// Storage is four 64-bit words, bucket 0 in the most significant bit of
/// word 0, so the hex form reads buckets left to right.
class Digest {
 public:
  static constexpr std::size_t kBits = 256;

  constexpr Digest() = default;

  constexpr bool bit(std::size_t bucket) const {
    return (words_[bucket >> 6] >> (63 - (bucket & 63))) & 1U;
  }
  constexpr void set(std::size_t bucket, bool value = true) {
    const std::uint64_t mask = std::uint64_t{1} << (63 - (bucket & 63));
    if (value) {
      words_[bucket >> 6] |= mask;
    } else {
      words_[bucket >> 6] &= ~mask;
    }
  }

  constexpr std::size_t popcount() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  constexpr Digest operator~() const {
    Digest d;
    for (std::size_t i = 0; i < 4; ++i) d.words_[i] = ~words_[i];
    return d;
  }

  constexpr bool is_zero() const { return popcount() == 0; }

  const std::array<std::uint64_t, 4>& words() const { return words_; }

  /// 64 lowercase hex characters; bucket 0 is the MSB of the first pair.
  std::string to_hex() const;
  static Digest from_hex(std::string_view hex);

  /// Byte layout emitted by the reference Nilsimsa implementations
  /// (bucket 255 first, least significant bit first within a byte).
  std::string to_canonical_hex() const;
  static Digest from_canonical_hex(std::string_view hex);

  friend constexpr bool operator==(const Digest&, const Digest&) = default;

 private:
  std::array<std::uint64_t, 4> words_{};
};

/// Nilsimsa compare value: matching bits minus 128, in [-128, 128].
inline int compare(const Digest& a, const Digest& b) {
  int differing = 0;
  for (std::size_t i = 0; i < 4; ++i) differing += std::popcount(a.words()[i] ^ b.words()[i]);
  return 128 - differing;
}

}  // namespace dnslsh
