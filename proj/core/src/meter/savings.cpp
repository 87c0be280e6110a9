#include "tapverify/meter/savings.hpp"

#include "tapverify/error.hpp"

namespace tapverify::meter {

double saved_pct(double baseline, double candidate) {
  if (baseline == 0.0) throw InvalidArgument("savings need a non-zero baseline");
  return 100.0 * (1.0 - candidate / baseline);
}

std::vector<SavingsRow> savings_table(const scale::PaperProfile& profile, std::size_t n) {
  const auto& base = profile.verifier(profile.baseline);
  const scale::ProfilePoint* b = base.at(n);
  if (b == nullptr) {
    throw InvalidArgument("baseline has no Best-of-" + std::to_string(n) + " entry");
  }
  std::vector<SavingsRow> rows;
  for (const auto& v : profile.verifiers) {
    if (v.mode == profile.baseline) continue;
    const scale::ProfilePoint* c = v.at(n);
    if (c == nullptr) continue;
    SavingsRow row{std::string(mode_name(profile.baseline)), std::string(mode_name(v.mode)),
                   saved_pct(b->time_ms, c->time_ms), std::nullopt, std::nullopt};
    if (b->tflops && c->tflops) row.flops_saved_pct = saved_pct(*b->tflops, *c->tflops);
    if (b->vram_gb && c->vram_gb) row.mem_saved_pct = saved_pct(*b->vram_gb, *c->vram_gb);
    rows.push_back(std::move(row));
  }
  return rows;
}

SavingsRow savings_row(const std::string& baseline_id, const TimingReport& baseline,
                       const std::string& candidate_id, const TimingReport& candidate) {
  return {baseline_id, candidate_id, saved_pct(baseline.mean_ms, candidate.mean_ms),
          saved_pct(static_cast<double>(baseline.flops_total),
                    static_cast<double>(candidate.flops_total)),
          saved_pct(static_cast<double>(baseline.bytes_peak),
                    static_cast<double>(candidate.bytes_peak))};
}

}  // namespace tapverify::meter
