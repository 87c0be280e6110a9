#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tapverify::scale {

// T(1) = single; T(N) = fixed + N * marginal for N >= 2.
struct AffineCost {
  double single = 0.0;
  double fixed = 0.0;
  double marginal = 0.0;

  double at(std::size_t n) const;
};

struct CostPoint {
  std::size_t n = 1;
  double value = 0.0;
};

struct AffineFit {
  AffineCost cost;
  std::vector<double> residuals;  // value - prediction, in input order
  double max_abs_residual = 0.0;
};

// Solves fixed and marginal exactly from the two smallest N >= 2 points,
// takes single from the N = 1 point and reports residuals on every point.
// Throws InvalidArgument without an N = 1 point, with fewer than two
// distinct N >= 2 points, with repeated N, or if a coefficient comes out
// negative.
AffineFit fit_affine(std::span<const CostPoint> points);

// Wall-clock, FLOPs and peak-memory models of one generator/verifier pairing.
struct CostModel {
  AffineCost time_ms;
  AffineCost flops;
  AffineCost memory;
};

struct BudgetPlan {
  double budget = 0.0;
  double slack_fraction = 0.025;
  std::size_t chosen_n = 1;
  double predicted = 0.0;
};

inline constexpr double kDefaultSlack = 0.025;
inline constexpr std::size_t kMaxCandidates = 1024;

// Largest N in [1, max_n] with T(N) <= budget * (1 + slack); N = 1 when
// nothing fits. Throws InvalidArgument for a non-positive budget.
BudgetPlan plan_budget(const AffineCost& cost, double budget, double slack = kDefaultSlack,
                       std::size_t max_n = kMaxCandidates);

}  // namespace tapverify::scale
