#pragma once

#include <cstddef>
#include <functional>

#include "tapverify/numcore/tensor.hpp"

namespace tapverify::scenes {

inline constexpr double kNormalizeEpsilon = 1e-6;

// Channelwise statistics of [positions x channels] feature maps, pooled
// over positions and samples. Variance is the unbiased estimate.
struct FeatureStats {
  numcore::Tensor mean;      // [channels]
  numcore::Tensor variance;  // [channels]
  std::size_t sample_count = 0;

  std::size_t channels() const { return mean.size(); }
};

// Draws `n_samples` feature maps from `source(i)`, i = 0..n-1.
// Throws InvalidArgument when n_samples < 2 or shapes disagree.
FeatureStats calibrate_feature_stats(
    const std::function<numcore::Tensor(std::size_t)>& source, std::size_t n_samples);

// (x - mean) / sqrt(variance + kNormalizeEpsilon), per channel.
numcore::Tensor normalize(const numcore::Tensor& features, const FeatureStats& stats);

}  // namespace tapverify::scenes
