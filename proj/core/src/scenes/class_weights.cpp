#include "tapverify/scenes/class_weights.hpp"

#include <algorithm>

#include "tapverify/error.hpp"

namespace tapverify::scenes {

ClassWeights class_weights(std::size_t positives, std::size_t negatives) {
  if (positives == 0 || negatives == 0) {
    throw InvalidArgument("class weights need at least one sample of each class");
  }
  const auto total = static_cast<double>(positives + negatives);
  // 1 - n_pos/n == n_neg/n; the ratio form is exact for decimal frequencies.
  return {static_cast<double>(negatives) / total, static_cast<double>(positives) / total};
}

ClassWeights class_weights(std::span<const Label> labels) {
  const auto pos = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), Label::kYes));
  return class_weights(pos, labels.size() - pos);
}

}  // namespace tapverify::scenes
