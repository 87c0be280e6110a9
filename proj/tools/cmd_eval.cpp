#include <cstdio>
#include <fstream>
#include <memory>

#include "commands.hpp"
#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/scale/profile.hpp"
#include "tapverify/scale/sweep.hpp"
#include "tapverify/verify/checkpoint.hpp"

namespace tapverify::cli {

namespace {

void write_plan(const std::filesystem::path& path, const scale::PaperProfile& profile,
                double slack) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "profile,verifier,budget_ms,n,predicted_ms\n";
  for (const auto& v : profile.verifiers) {
    const auto model = scale::cost_model_from(v);
    for (double b : profile.budgets_ms) {
      const auto plan = scale::plan_budget(model.time_ms, b, slack);
      out << profile.name << ',' << mode_name(v.mode) << ',' << b << ',' << plan.chosen_n << ','
          << plan.predicted << '\n';
      std::printf("%-8s %-15s budget %6.0f ms -> Best-of-%zu (%.0f ms)\n", profile.name.c_str(),
                  std::string(mode_name(v.mode)).c_str(), b, plan.chosen_n, plan.predicted);
    }
  }
}

// Verifiers named in the config: trained checkpoints or oracles per mode.
struct LoadedVerifiers {
  std::vector<std::unique_ptr<verify::VerifierModel>> models;
  std::vector<std::unique_ptr<scale::CandidateVerifier>> verifiers;
  std::vector<scale::SweepEntry> entries;
};

LoadedVerifiers load_verifiers(const nlohmann::json& list) {
  LoadedVerifiers out;
  for (const auto& item : list) {
    const std::string name = item.at("name").get<std::string>();
    if (item.contains("checkpoint")) {
      auto ckpt = verify::load_checkpoint(item.at("checkpoint").get<std::string>());
      out.models.push_back(std::make_unique<verify::VerifierModel>(std::move(ckpt.model)));
      out.verifiers.push_back(std::make_unique<scale::LearnedVerifier>(*out.models.back()));
    } else if (item.contains("oracle")) {
      const auto mode = parse_mode(item.at("oracle").get<std::string>());
      if (!mode) throw InvalidArgument("unknown oracle mode for verifier '" + name + "'");
      out.verifiers.push_back(std::make_unique<scale::OracleVerifier>(*mode));
    } else {
      throw InvalidArgument("verifier '" + name + "' needs a checkpoint or an oracle mode");
    }
    out.entries.push_back({name, out.verifiers.back().get()});
  }
  return out;
}

}  // namespace

int cmd_eval(RunContext& run) {
  const auto gen_cfg = run.generator_config();
  const auto profile_name = run.get<std::string>("profile", "sana");
  const auto slack = run.get<double>("slack", scale::kDefaultSlack);
  const auto prompt_count = run.get<std::size_t>("prompts", 120);
  const auto multiples =
      run.get<std::vector<std::size_t>>("budget_candidates", std::vector<std::size_t>{2, 4, 6});
  const auto list = run.get<nlohmann::json>(
      "verifiers", nlohmann::json::array({{{"name", "oracle_pixel"}, {"oracle", "pixel_reencode"}},
                                          {{"name", "oracle_ae"}, {"oracle", "ae_latent"}},
                                          {{"name", "oracle_hidden"}, {"oracle", "hidden_state"}}}));
  const auto profile = scale::load_named_profile(profile_name);
  const auto loaded = load_verifiers(list);
  run.prepare_output();
  run.write_resolved_config();

  write_plan(run.out("budget_plan.csv"), profile, slack);

  // Toy budgets mirror the published ones: the FLOPs a pixel re-encoding
  // verifier spends on Best-of-k.
  const toygen::Generator generator(gen_cfg);
  const auto prompts = scenes::sample_prompts(prompt_count, numcore::derive_seed({run.seed(), 3}));
  const verify::VerifierModel pixel(
      verify::VerifierConfig::for_generator(VerifierMode::kPixelReencode, gen_cfg));
  const scale::LearnedVerifier pixel_cost(pixel);
  const std::size_t probe[] = {1, 2, 4};
  const auto anchor =
      scale::measure_flops_profile(generator, pixel_cost, prompts.front(), run.seed(), probe);
  std::vector<double> budgets;
  for (std::size_t k : multiples) budgets.push_back(anchor.fit.cost.at(k));

  const auto cells =
      scale::budget_sweep(loaded.entries, budgets, prompts, run.seed(), generator, slack);
  std::ofstream csv(run.out("toy_sweep.csv"));
  if (!csv) throw IoError("cannot write toy_sweep.csv");
  csv << "budget_flops,verifier,n";
  for (const auto& h : scale::accuracy_headers()) csv << ',' << h;
  csv << '\n';
  for (const auto& cell : cells) {
    csv << static_cast<std::uint64_t>(cell.budget) << ',' << cell.verifier << ','
        << cell.plan.chosen_n;
    for (const auto& v : scale::accuracy_cells(cell.accuracy)) csv << ',' << v;
    csv << '\n';
    std::printf("toy %-15s budget %.3g FLOPs -> Best-of-%zu, overall %.3f\n",
                cell.verifier.c_str(), cell.budget, cell.plan.chosen_n,
                cell.accuracy.overall.value_or(0.0));
  }
  return 0;
}

}  // namespace tapverify::cli
