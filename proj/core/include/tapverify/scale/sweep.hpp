#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tapverify/scale/accuracy.hpp"
#include "tapverify/scale/best_of_n.hpp"
#include "tapverify/scale/cost_model.hpp"

namespace tapverify::scale {

// Runs Best-of-N once per prompt (prompt i uses seed derive(seed, i)) and
// tabulates oracle accuracy of the selected candidates.
AccuracyTable evaluate_best_of_n(std::span<const scenes::Prompt> prompts, std::size_t n,
                                 std::uint64_t seed, const toygen::Generator& generator,
                                 const CandidateVerifier& verifier, Selection selection);

// Metered FLOPs of one Best-of-N run at each N, fitted with fit_affine.
struct FlopsProfile {
  std::vector<CostPoint> points;
  AffineFit fit;
};
FlopsProfile measure_flops_profile(const toygen::Generator& generator,
                                   const CandidateVerifier& verifier,
                                   const scenes::Prompt& prompt, std::uint64_t seed,
                                   std::span<const std::size_t> ns);

// One verifier at one budget: the planned N and the accuracy it reaches.
struct SweepCell {
  double budget = 0.0;
  std::string verifier;
  BudgetPlan plan;
  AccuracyTable accuracy;
};

struct SweepEntry {
  std::string name;
  const CandidateVerifier* verifier = nullptr;
};

// Budgets are FLOPs. Each verifier's FLOPs model is measured on the first
// prompt, N is planned per budget and the resulting Best-of-N is evaluated
// on every prompt with token-probability selection.
std::vector<SweepCell> budget_sweep(std::span<const SweepEntry> entries,
                                    std::span<const double> budgets,
                                    std::span<const scenes::Prompt> prompts, std::uint64_t seed,
                                    const toygen::Generator& generator,
                                    double slack = kDefaultSlack);

// Column headers of per-category accuracy tables, then "Overall".
std::vector<std::string> accuracy_headers();
// Percentages with one decimal in header order; absent categories are empty.
std::vector<std::string> accuracy_cells(const AccuracyTable& table);

}  // namespace tapverify::scale
