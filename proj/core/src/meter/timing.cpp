#include "tapverify/meter/timing.hpp"

#include <chrono>
#include <cmath>

#include "tapverify/error.hpp"

namespace tapverify::meter {

TimingReport time_pipeline(const Runnable& runnable, std::size_t runs, std::size_t warmup,
                           numcore::Precision precision) {
  if (runs < 2) throw InvalidArgument("timing needs at least 2 measured runs");
  TimingReport report;
  report.runs = runs;
  report.warmup_runs = warmup;
  for (std::size_t i = 0; i < warmup; ++i) {
    numcore::MeterContext ctx(precision);
    runnable(ctx);
  }
  for (std::size_t i = 0; i < runs; ++i) {
    numcore::MeterContext ctx(precision);
    const auto start = std::chrono::steady_clock::now();
    runnable(ctx);
    const auto stop = std::chrono::steady_clock::now();
    report.samples_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    if (i == 0) {
      report.flops_total = ctx.flops();
      report.bytes_peak = ctx.bytes_peak();
    } else if (ctx.flops() != report.flops_total || ctx.bytes_peak() != report.bytes_peak) {
      report.flops_invariant = false;
    }
  }
  double sum = 0.0;
  for (double t : report.samples_ms) sum += t;
  report.mean_ms = sum / static_cast<double>(runs);
  double var = 0.0;
  for (double t : report.samples_ms) var += (t - report.mean_ms) * (t - report.mean_ms);
  report.stddev_ms = std::sqrt(var / static_cast<double>(runs - 1));
  report.coefficient_of_variation = report.mean_ms > 0.0 ? report.stddev_ms / report.mean_ms : 0.0;
  return report;
}

}  // namespace tapverify::meter
