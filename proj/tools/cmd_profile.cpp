#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "commands.hpp"
#include "tapverify/error.hpp"
#include "tapverify/meter/report.hpp"
#include "tapverify/meter/savings.hpp"
#include "tapverify/meter/timing.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/scale/profile.hpp"
#include "tapverify/scale/sweep.hpp"

namespace tapverify::cli {

namespace {

void print_rows(const std::string& title, const std::vector<meter::SavingsRow>& rows) {
  std::printf("%s\n", title.c_str());
  for (const auto& r : rows) {
    std::printf("  %-15s vs %-15s time %6s%%  flops %6s%%  mem %6s%%\n", r.candidate.c_str(),
                r.baseline.c_str(), meter::format_pct(r.time_saved_pct).c_str(),
                r.flops_saved_pct ? meter::format_pct(*r.flops_saved_pct).c_str() : "-",
                r.mem_saved_pct ? meter::format_pct(*r.mem_saved_pct).c_str() : "-");
  }
}

}  // namespace

int cmd_profile(RunContext& run) {
  const auto names =
      run.get<std::vector<std::string>>("profiles", std::vector<std::string>{"sana", "pixart"});
  const auto gen_cfg = run.generator_config();
  const auto runs = run.get<std::size_t>("runs", 10);
  const auto warmup = run.get<std::size_t>("warmup", 2);
  const auto live_n = run.get<std::size_t>("live_n", 4);
  const auto fit_ns =
      run.get<std::vector<std::size_t>>("fit_n", std::vector<std::size_t>{1, 2, 4, 6, 8});
  std::vector<scale::PaperProfile> profiles;
  for (const auto& name : names) profiles.push_back(scale::load_named_profile(name));
  run.prepare_output();
  run.write_resolved_config();

  for (const auto& p : profiles) {
    const auto rows = meter::savings_table(p);
    meter::emit_report(run.out(p.name + "_savings"), rows,
                       {{"config", run.section()}, {"source", "profile"}, {"profile", p.name}});
    print_rows(p.name + " (published costs, Best-of-1)", rows);
  }

  // Live measurements on the toy generator with untrained verifiers: costs
  // do not depend on the weights.
  const toygen::Generator generator(gen_cfg);
  const auto prompt = scenes::sample_prompts(1, numcore::derive_seed({run.seed(), 4})).front();
  const VerifierMode modes[] = {VerifierMode::kPixelReencode, VerifierMode::kAeLatent,
                                VerifierMode::kHiddenState};
  std::vector<meter::TimingReport> timings;
  std::ofstream fit_csv(run.out("toy_cost_fit.csv"));
  if (!fit_csv) throw IoError("cannot write toy_cost_fit.csv");
  fit_csv << "verifier,single_flops,fixed_flops,marginal_flops,max_rel_residual\n";
  for (auto mode : modes) {
    const verify::VerifierModel model(verify::VerifierConfig::for_generator(mode, gen_cfg));
    const scale::LearnedVerifier verifier(model);
    timings.push_back(meter::time_pipeline(
        [&](numcore::MeterContext& ctx) {
          scale::run_best_of_n(prompt, live_n, run.seed(), generator, verifier,
                               scale::Selection::kTokenProbability, ctx);
        },
        runs, warmup));
    const auto fp = scale::measure_flops_profile(generator, verifier, prompt, run.seed(), fit_ns);
    double worst = 0.0;
    for (std::size_t i = 0; i < fp.points.size(); ++i) {
      worst = std::max(worst, std::abs(fp.fit.residuals[i]) / fp.points[i].value);
    }
    fit_csv << mode_name(mode) << ',' << fp.fit.cost.single << ',' << fp.fit.cost.fixed << ','
            << fp.fit.cost.marginal << ',' << worst << '\n';
    std::printf("toy %-15s FLOPs T(1)=%.0f  T(N)=%.0f + %.0f N  max residual %.2e\n",
                std::string(mode_name(mode)).c_str(), fp.fit.cost.single, fp.fit.cost.fixed,
                fp.fit.cost.marginal, worst);
  }
  std::vector<meter::SavingsRow> live;
  for (std::size_t i = 1; i < timings.size(); ++i) {
    live.push_back(meter::savings_row(std::string(mode_name(modes[0])), timings[0],
                                      std::string(mode_name(modes[i])), timings[i]));
  }
  meter::emit_report(run.out("toy_savings"), live,
                     {{"config", run.section()}, {"source", "live"}, {"n", live_n}});
  print_rows("toy generator (measured, Best-of-" + std::to_string(live_n) + ")", live);
  return 0;
}

}  // namespace tapverify::cli
