#include <cstdio>
#include <map>

#include "commands.hpp"
#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/scenes/dataset.hpp"

namespace tapverify::cli {

namespace {

nlohmann::json summarize(const std::vector<scenes::LabeledSample>& samples) {
  std::size_t positives = 0;
  std::map<std::string, std::size_t> per_category;
  for (const auto& s : samples) {
    positives += s.label == scenes::Label::kYes;
    ++per_category[std::string(scenes::category_name(s.category()))];
  }
  return {{"count", samples.size()},
          {"positives", positives},
          {"positive_rate",
           samples.empty() ? 0.0 : static_cast<double>(positives) / samples.size()},
          {"per_category", per_category}};
}

}  // namespace

int cmd_synth(RunContext& run) {
  const auto gen_cfg = run.generator_config();
  const std::string mode_str = run.get<std::string>("mode", "hidden_state");
  const auto mode = parse_mode(mode_str);
  if (!mode) throw InvalidArgument("unknown verifier mode '" + mode_str + "'");
  scenes::SynthesisConfig syn;
  syn.prompt_count = run.get<std::size_t>("prompts", 500);
  syn.candidates_per_prompt = run.get<std::size_t>("candidates_per_prompt", 8);
  syn.seed = numcore::derive_seed({run.seed(), 1});
  const auto alignment_count = run.get<std::size_t>("alignment_samples", 1000);
  run.prepare_output();
  run.write_resolved_config();

  const toygen::Generator generator(gen_cfg);
  const auto finetune = scenes::synthesize_finetune_set(generator, *mode, syn);
  const auto alignment = scenes::synthesize_alignment_set(
      generator, *mode, alignment_count, numcore::derive_seed({run.seed(), 2}));
  scenes::write_dataset(run.out("finetune"), finetune);
  scenes::write_dataset(run.out("alignment"), alignment);

  const nlohmann::json summary{{"mode", mode_str},
                               {"generator", gen_cfg},
                               {"finetune", summarize(finetune)},
                               {"alignment", summarize(alignment)}};
  write_json(run.out("summary.json"), summary);
  std::printf("wrote %zu fine-tuning and %zu alignment samples (positive rate %.3f) to %s\n",
              finetune.size(), alignment.size(),
              summary["finetune"]["positive_rate"].get<double>(), run.out_dir().c_str());
  return 0;
}

}  // namespace tapverify::cli
