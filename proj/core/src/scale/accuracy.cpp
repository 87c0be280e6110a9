#include "tapverify/scale/accuracy.hpp"

#include "tapverify/scenes/oracle.hpp"

namespace tapverify::scale {

std::optional<double> AccuracyTable::category(scenes::Category c) const {
  const auto it = per_category.find(c);
  if (it == per_category.end()) return std::nullopt;
  return it->second;
}

AccuracyTable task_accuracy(std::span<const Outcome> outcomes) {
  std::map<scenes::Category, std::size_t> passed;
  AccuracyTable table;
  for (const auto& o : outcomes) {
    const auto c = o.prompt.spec.category;
    ++table.counts[c];
    if (scenes::oracle_check(o.prompt, o.final_scene) == scenes::Label::kYes) ++passed[c];
  }
  double sum = 0.0;
  for (const auto& [c, n] : table.counts) {
    const double acc = static_cast<double>(passed[c]) / static_cast<double>(n);
    table.per_category[c] = acc;
    sum += acc;
  }
  if (!table.counts.empty()) table.overall = sum / static_cast<double>(table.counts.size());
  return table;
}

}  // namespace tapverify::scale
