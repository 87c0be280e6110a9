#include "tapverify/scale/sweep.hpp"

#include <cstdio>

#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"

namespace tapverify::scale {

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * v);
  return buf;
}

}  // namespace

AccuracyTable evaluate_best_of_n(std::span<const scenes::Prompt> prompts, std::size_t n,
                                 std::uint64_t seed, const toygen::Generator& generator,
                                 const CandidateVerifier& verifier, Selection selection) {
  std::vector<Outcome> outcomes;
  outcomes.reserve(prompts.size());
  numcore::MeterContext ctx = numcore::MeterContext::disabled();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const auto r = run_best_of_n(prompts[i], n, numcore::derive_seed({seed, i}), generator,
                                 verifier, selection, ctx);
    outcomes.push_back({prompts[i], r.final_scene});
  }
  return task_accuracy(outcomes);
}

FlopsProfile measure_flops_profile(const toygen::Generator& generator,
                                   const CandidateVerifier& verifier,
                                   const scenes::Prompt& prompt, std::uint64_t seed,
                                   std::span<const std::size_t> ns) {
  FlopsProfile out;
  for (std::size_t n : ns) {
    numcore::MeterContext ctx;
    const auto r =
        run_best_of_n(prompt, n, seed, generator, verifier, Selection::kTokenProbability, ctx);
    out.points.push_back({n, static_cast<double>(r.flops)});
  }
  out.fit = fit_affine(out.points);
  return out;
}

std::vector<SweepCell> budget_sweep(std::span<const SweepEntry> entries,
                                    std::span<const double> budgets,
                                    std::span<const scenes::Prompt> prompts, std::uint64_t seed,
                                    const toygen::Generator& generator, double slack) {
  if (prompts.empty()) throw InvalidArgument("budget sweep needs prompts");
  static constexpr std::size_t kProbe[] = {1, 2, 4};
  std::vector<SweepCell> cells;
  for (const auto& e : entries) {
    const auto profile = measure_flops_profile(generator, *e.verifier, prompts.front(), seed,
                                               kProbe);
    for (double b : budgets) {
      SweepCell cell;
      cell.budget = b;
      cell.verifier = e.name;
      cell.plan = plan_budget(profile.fit.cost, b, slack);
      cell.accuracy = evaluate_best_of_n(prompts, cell.plan.chosen_n, seed, generator,
                                         *e.verifier, Selection::kTokenProbability);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<std::string> accuracy_headers() {
  std::vector<std::string> h;
  for (auto c : scenes::kAllCategories) h.emplace_back(scenes::category_header(c));
  h.emplace_back("Overall");
  return h;
}

std::vector<std::string> accuracy_cells(const AccuracyTable& table) {
  std::vector<std::string> cells;
  for (auto c : scenes::kAllCategories) {
    const auto v = table.category(c);
    cells.push_back(v ? pct(*v) : std::string());
  }
  cells.push_back(table.overall ? pct(*table.overall) : std::string());
  return cells;
}

}  // namespace tapverify::scale
