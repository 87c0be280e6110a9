#include "tapverify/scenes/feature_stats.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "tapverify/error.hpp"

namespace tapverify::scenes {

FeatureStats calibrate_feature_stats(
    const std::function<numcore::Tensor(std::size_t)>& source, std::size_t n_samples) {
  if (n_samples < 2) {
    throw InvalidArgument("feature statistics need at least 2 samples, got " +
                          std::to_string(n_samples));
  }
  std::size_t channels = 0;
  std::size_t count = 0;
  std::vector<double> mean, m2;
  // Welford's update, one position at a time.
  for (std::size_t i = 0; i < n_samples; ++i) {
    const numcore::Tensor f = source(i);
    if (i == 0) {
      channels = f.cols();
      mean.assign(channels, 0.0);
      m2.assign(channels, 0.0);
    } else if (f.cols() != channels) {
      throw ShapeError("feature sample " + std::to_string(i) + " has " +
                       std::to_string(f.cols()) + " channels, expected " +
                       std::to_string(channels));
    }
    for (std::size_t r = 0; r < f.rows(); ++r) {
      ++count;
      const auto row = f.row(r);
      for (std::size_t c = 0; c < channels; ++c) {
        const double delta = row[c] - mean[c];
        mean[c] += delta / static_cast<double>(count);
        m2[c] += delta * (row[c] - mean[c]);
      }
    }
  }
  FeatureStats stats;
  stats.mean = numcore::Tensor({channels}, mean);
  stats.variance = numcore::Tensor({channels});
  for (std::size_t c = 0; c < channels; ++c) {
    stats.variance[c] = count > 1 ? m2[c] / static_cast<double>(count - 1) : 0.0;
  }
  stats.sample_count = n_samples;
  return stats;
}

numcore::Tensor normalize(const numcore::Tensor& features, const FeatureStats& stats) {
  const std::size_t channels = features.cols();
  if (channels != stats.channels()) {
    throw ShapeError("normalize: features have " + std::to_string(channels) +
                     " channels, statistics have " + std::to_string(stats.channels()));
  }
  std::vector<double> inv(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    inv[c] = 1.0 / std::sqrt(stats.variance[c] + kNormalizeEpsilon);
  }
  numcore::Tensor out(features.shape());
  const std::size_t rows = features.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto in = features.row(r);
    auto o = out.row(r);
    for (std::size_t c = 0; c < channels; ++c) o[c] = (in[c] - stats.mean[c]) * inv[c];
  }
  return out;
}

}  // namespace tapverify::scenes
