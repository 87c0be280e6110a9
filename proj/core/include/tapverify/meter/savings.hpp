#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tapverify/meter/timing.hpp"
#include "tapverify/scale/profile.hpp"

namespace tapverify::meter {

struct SavingsRow {
  std::string baseline;
  std::string candidate;
  double time_saved_pct = 0.0;
  std::optional<double> flops_saved_pct;
  std::optional<double> mem_saved_pct;

  friend bool operator==(const SavingsRow&, const SavingsRow&) = default;
};

// 100 * (1 - candidate / baseline). Throws InvalidArgument on a zero
// baseline.
double saved_pct(double baseline, double candidate);

// One row per non-baseline verifier of the profile, compared at Best-of-n
// (Bo1 by default). Columns absent from either side stay empty.
std::vector<SavingsRow> savings_table(const scale::PaperProfile& profile, std::size_t n = 1);

// Savings between two live measurements: mean time, metered FLOPs and peak
// bytes.
SavingsRow savings_row(const std::string& baseline_id, const TimingReport& baseline,
                       const std::string& candidate_id, const TimingReport& candidate);

}  // namespace tapverify::meter
