#pragma once

#include <cstddef>
#include <span>

#include "tapverify/scenes/oracle.hpp"

namespace tapverify::scenes {

struct ClassWeights {
  double positive = 0.5;
  double negative = 0.5;
};

// w_c = 1 - freq_c, which already sums to one: the rarer class gets the
// larger weight. Throws InvalidArgument unless both classes are present.
ClassWeights class_weights(std::size_t positives, std::size_t negatives);
ClassWeights class_weights(std::span<const Label> labels);

}  // namespace tapverify::scenes
