#include "tapverify/scale/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "tapverify/error.hpp"

namespace tapverify::scale {

double AffineCost::at(std::size_t n) const {
  if (n <= 1) return single;
  return fixed + static_cast<double>(n) * marginal;
}

AffineFit fit_affine(std::span<const CostPoint> points) {
  std::set<std::size_t> seen;
  const CostPoint* one = nullptr;
  std::vector<const CostPoint*> multi;
  for (const auto& p : points) {
    if (p.n == 0) throw InvalidArgument("cost points need N >= 1");
    if (!seen.insert(p.n).second) {
      throw InvalidArgument("degenerate cost points: N=" + std::to_string(p.n) + " repeated");
    }
    if (p.n == 1) {
      one = &p;
    } else {
      multi.push_back(&p);
    }
  }
  if (one == nullptr) throw InvalidArgument("cost fit needs an N = 1 point");
  if (multi.size() < 2) throw InvalidArgument("cost fit needs two points with N >= 2");
  std::sort(multi.begin(), multi.end(),
            [](const CostPoint* a, const CostPoint* b) { return a->n < b->n; });
  const CostPoint& a = *multi[0];
  const CostPoint& b = *multi[1];

  AffineFit fit;
  fit.cost.single = one->value;
  fit.cost.marginal = (b.value - a.value) / static_cast<double>(b.n - a.n);
  fit.cost.fixed = a.value - static_cast<double>(a.n) * fit.cost.marginal;
  // Absorb rounding noise from exact-integer inputs.
  for (double* c : {&fit.cost.fixed, &fit.cost.marginal}) {
    if (std::abs(*c) < 1e-9) *c = 0.0;
  }
  if (fit.cost.single < 0.0 || fit.cost.fixed < 0.0 || fit.cost.marginal < 0.0) {
    throw InvalidArgument("cost fit produced a negative coefficient");
  }
  for (const auto& p : points) {
    const double r = p.value - fit.cost.at(p.n);
    fit.residuals.push_back(r);
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
  }
  return fit;
}

BudgetPlan plan_budget(const AffineCost& cost, double budget, double slack, std::size_t max_n) {
  if (!(budget > 0.0)) throw InvalidArgument("budget must be positive");
  if (slack < 0.0) throw InvalidArgument("slack must be non-negative");
  const double limit = budget * (1.0 + slack);
  BudgetPlan plan{budget, slack, 1, cost.at(1)};
  for (std::size_t n = 2; n <= max_n; ++n) {
    const double t = cost.at(n);
    if (t <= limit) {
      plan.chosen_n = n;
      plan.predicted = t;
    }
  }
  return plan;
}

}  // namespace tapverify::scale
