#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "tapverify/numcore/meter_context.hpp"

namespace tapverify::meter {

struct TimingReport {
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  double coefficient_of_variation = 0.0;
  std::size_t runs = 0;
  std::size_t warmup_runs = 0;
  std::uint64_t flops_total = 0;  // of one run
  std::size_t bytes_peak = 0;     // of one run
  bool flops_invariant = true;    // every run metered the same FLOPs
  std::vector<double> samples_ms;
};

using Runnable = std::function<void(numcore::MeterContext&)>;

// Runs `warmup` unmeasured repetitions, then `runs` timed ones, each with a
// fresh MeterContext. Callers must not run other work concurrently.
// Throws InvalidArgument when runs < 2.
TimingReport time_pipeline(const Runnable& runnable, std::size_t runs = 10,
                           std::size_t warmup = 2,
                           numcore::Precision precision = numcore::Precision::kFloat64);

}  // namespace tapverify::meter
