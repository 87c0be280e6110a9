#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "tapverify/numcore/tensor.hpp"

namespace tapverify::numcore {

// SplitMix64 finalizer; used to derive independent stream keys.
std::uint64_t splitmix64(std::uint64_t x);

// Order-sensitive combination of several keys into one 64-bit seed.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys);

std::uint64_t fnv1a64(std::string_view bytes);

// Deterministic generator. The distributions are implemented here rather
// than taken from <random> so streams are identical across standard
// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();

  Tensor normal_tensor(Shape shape, double stddev);
  Tensor uniform_tensor(Shape shape, double lo, double hi);

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tapverify::numcore
