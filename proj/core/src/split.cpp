#include "dnslsh/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "dnslsh/error.hpp"
#include "dnslsh/random.hpp"

namespace dnslsh {

SplitIndices stratified_split(std::span<const std::string> labels, double train_fraction,
                              std::uint64_t seed, std::span<const std::string> required_classes) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("train fraction must be in [0, 1]");
  }
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& c : required_classes) {
    if (!by_class.count(c)) throw DataError("class '" + c + "' has no samples");
  }

  SplitIndices out;
  std::uint64_t stream = 0;
  for (auto& [label, members] : by_class) {
    Rng rng = make_rng(seed, stream++);
    shuffle(members.begin(), members.end(), rng);
    const auto take = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(members.size())));
    out.train.insert(out.train.end(), members.begin(),
                     members.begin() + static_cast<std::ptrdiff_t>(take));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(take),
                    members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace dnslsh
