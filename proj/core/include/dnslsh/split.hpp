#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dnslsh {

struct SplitIndices {
  std::vector<std::size_t> train;  ///< ascending
  std::vector<std::size_t> test;   ///< ascending
};

/// Per-class shuffle (seeded) and cut at round(train_fraction * count).
/// Every class listed in `required_classes` must occur; otherwise a
/// DataError names the missing class.
SplitIndices stratified_split(std::span<const std::string> labels, double train_fraction,
                              std::uint64_t seed,
                              std::span<const std::string> required_classes = {});

}  // namespace dnslsh
