#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library implementation it checks.

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

inline constexpr std::array<int, 256> kTran = {
    0x02, 0xD6, 0x9E, 0x6F, 0xF9, 0x1D, 0x04, 0xAB, 0xD0, 0x22, 0x16, 0x1F, 0xD8, 0x73, 0xA1, 0xAC,
    0x3B, 0x70, 0x62, 0x96, 0x1E, 0x6E, 0x8F, 0x39, 0x9D, 0x05, 0x14, 0x4A, 0xA6, 0xBE, 0xAE, 0x0E,
    0xCF, 0xB9, 0x9C, 0x9A, 0xC7, 0x68, 0x13, 0xE1, 0x2D, 0xA4, 0xEB, 0x51, 0x8D, 0x64, 0x6B, 0x50,
    0x23, 0x80, 0x03, 0x41, 0xEC, 0xBB, 0x71, 0xCC, 0x7A, 0x86, 0x7F, 0x98, 0xF2, 0x36, 0x5E, 0xEE,
    0x8E, 0xCE, 0x4F, 0xB8, 0x32, 0xB6, 0x5F, 0x59, 0xDC, 0x1B, 0x31, 0x4C, 0x7B, 0xF0, 0x63, 0x01,
    0x6C, 0xBA, 0x07, 0xE8, 0x12, 0x77, 0x49, 0x3C, 0xDA, 0x46, 0xFE, 0x2F, 0x79, 0x1C, 0x9B, 0x30,
    0xE3, 0x00, 0x06, 0x7E, 0x2E, 0x0F, 0x38, 0x33, 0x21, 0xAD, 0xA5, 0x54, 0xCA, 0xA7, 0x29, 0xFC,
    0x5A, 0x47, 0x69, 0x7D, 0xC5, 0x95, 0xB5, 0xF4, 0x0B, 0x90, 0xA3, 0x81, 0x6D, 0x25, 0x55, 0x35,
    0xF5, 0x75, 0x74, 0x0A, 0x26, 0xBF, 0x19, 0x5C, 0x1A, 0xC6, 0xFF, 0x99, 0x5D, 0x84, 0xAA, 0x66,
    0x3E, 0xAF, 0x78, 0xB3, 0x20, 0x43, 0xC1, 0xED, 0x24, 0xEA, 0xE6, 0x3F, 0x18, 0xF3, 0xA0, 0x42,
    0x57, 0x08, 0x53, 0x60, 0xC3, 0xC0, 0x83, 0x40, 0x82, 0xD7, 0x09, 0xBD, 0x44, 0x2A, 0x67, 0xA8,
    0x93, 0xE0, 0xC2, 0x56, 0x9F, 0xD9, 0xDD, 0x85, 0x15, 0xB4, 0x8A, 0x27, 0x28, 0x92, 0x76, 0xDE,
    0xEF, 0xF8, 0xB2, 0xB7, 0xC9, 0x3D, 0x45, 0x94, 0x4B, 0x11, 0x0D, 0x65, 0xD5, 0x34, 0x8B, 0x91,
    0x0C, 0xFA, 0x87, 0xE9, 0x7C, 0x5B, 0xB1, 0x4D, 0xE5, 0xD4, 0xCB, 0x10, 0xA2, 0x17, 0x89, 0xBC,
    0xDB, 0xB0, 0xE2, 0x97, 0x88, 0x52, 0xF7, 0x48, 0xD3, 0x61, 0x2C, 0x3A, 0x2B, 0xD1, 0x8C, 0xFB,
    0xF1, 0xCD, 0xE4, 0x6A, 0xE7, 0xA9, 0xFD, 0xC4, 0x37, 0xC8, 0xD2, 0xF6, 0xDF, 0x58, 0x72, 0x4E,
};

inline int bucket(int a, int b, int c, int n) {
  return ((kTran[(a + n) % 256] ^ (kTran[b] * (2 * n + 1))) + kTran[c ^ kTran[n]]) % 256;
}

/// Brute-force accumulation: for each position i, enumerate the canonical
/// trigram combinations directly from s[i-1..i-4].
inline std::array<long, 256> accumulate(std::string_view s) {
  std::array<long, 256> acc{};
  auto at = [&](long i) { return static_cast<int>(static_cast<unsigned char>(s[static_cast<std::size_t>(i)])); };
  for (long i = 0; i < static_cast<long>(s.size()); ++i) {
    const int c = at(i);
    if (i >= 2) acc[bucket(c, at(i - 1), at(i - 2), 0)]++;
    if (i >= 3) {
      acc[bucket(c, at(i - 1), at(i - 3), 1)]++;
      acc[bucket(c, at(i - 2), at(i - 3), 2)]++;
    }
    if (i >= 4) {
      acc[bucket(c, at(i - 1), at(i - 4), 3)]++;
      acc[bucket(c, at(i - 2), at(i - 4), 4)]++;
      acc[bucket(c, at(i - 3), at(i - 4), 5)]++;
      acc[bucket(at(i - 4), at(i - 1), c, 6)]++;
      acc[bucket(at(i - 4), at(i - 3), c, 7)]++;
    }
  }
  return acc;
}

/// Digest bits as a bitset, thresholded at the lower median (`median`) or at
/// the mean (`!median`). Inputs shorter than 3 bytes give all zeros.
inline std::bitset<256> digest_bits(std::string_view s, bool median) {
  std::bitset<256> bits;
  if (s.size() < 3) return bits;
  const auto acc = accumulate(s);
  if (median) {
    std::vector<long> sorted(acc.begin(), acc.end());
    std::sort(sorted.begin(), sorted.end());
    const long m = sorted[127];
    for (int i = 0; i < 256; ++i) bits[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)] > m;
  } else {
    const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / 256.0;
    for (int i = 0; i < 256; ++i) bits[static_cast<std::size_t>(i)] = static_cast<double>(acc[static_cast<std::size_t>(i)]) > mean;
  }
  return bits;
}

/// Hex with bucket 0 as the most significant bit of the first pair.
inline std::string hex(const std::bitset<256>& bits) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (int nib = 0; nib < 64; ++nib) {
    int v = 0;
    for (int b = 0; b < 4; ++b) v = v * 2 + (bits[static_cast<std::size_t>(4 * nib + b)] ? 1 : 0);
    out.push_back(digits[v]);
  }
  return out;
}

inline std::string digest_hex(std::string_view s, bool median) { return hex(digest_bits(s, median)); }

/// Matching bits minus 128, counted one position at a time from hex strings.
inline int compare_hex(const std::string& a, const std::string& b) {
  auto val = [](char c) { return c <= '9' ? c - '0' : c - 'a' + 10; };
  int equal = 0;
  for (std::size_t i = 0; i < 64; ++i) {
    for (int bit = 3; bit >= 0; --bit) {
      if (((val(a[i]) >> bit) & 1) == ((val(b[i]) >> bit) & 1)) ++equal;
    }
  }
  return equal - 128;
}

struct Stats {
  double mean, median, q1, q3, variance, min, max, range;
};

/// Two-pass statistics in long double; quantiles by explicit rank
/// interpolation over a fully sorted copy.
inline Stats stats(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  const long double m = static_cast<long double>(v.size());
  long double sum = 0;
  for (int x : v) sum += x;
  const long double mean = sum / m;
  long double ss = 0;
  for (int x : v) ss += (x - mean) * (x - mean);
  auto q = [&](long double p) {
    const long double h = p * (m - 1);
    const auto k = static_cast<std::size_t>(std::floor(h));
    if (k + 1 >= v.size()) return static_cast<long double>(v.back());
    return v[k] + (h - k) * (v[k + 1] - v[k]);
  };
  return {static_cast<double>(mean), static_cast<double>(q(0.5L)), static_cast<double>(q(0.25L)),
          static_cast<double>(q(0.75L)), static_cast<double>(ss / m), static_cast<double>(v.front()),
          static_cast<double>(v.back()), static_cast<double>(v.back() - v.front())};
}

inline std::string random_string(std::mt19937_64& rng, std::string_view alphabet, std::size_t len) {
  std::string s(len, ' ');
  for (auto& c : s) c = alphabet[rng() % alphabet.size()];
  return s;
}

inline constexpr std::string_view kBase32 = "abcdefghijklmnopqrstuvwxyz234567";
inline constexpr std::string_view kAlnum =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

}  // namespace oracle
