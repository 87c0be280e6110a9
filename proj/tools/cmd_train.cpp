#include <cstdio>
#include <filesystem>
#include <map>

#include "commands.hpp"
#include "tapverify/error.hpp"
#include "tapverify/scenes/class_weights.hpp"
#include "tapverify/scenes/dataset.hpp"
#include "tapverify/train/trainer.hpp"
#include "tapverify/verify/checkpoint.hpp"

namespace tapverify::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kAlignedName = "aligned.ckpt";

verify::VerifierConfig verifier_config(RunContext& run, VerifierMode mode,
                                       const toygen::GeneratorConfig& gen) {
  nlohmann::json j = verify::VerifierConfig::for_generator(mode, gen);
  j.update(run.get<nlohmann::json>("verifier", nlohmann::json::object()));
  j["mode"] = mode_name(mode);
  return j.get<verify::VerifierConfig>();
}

train::TrainConfig train_config(RunContext& run, const std::string& key,
                                const train::TrainConfig& defaults) {
  return run.get<nlohmann::json>(key, defaults).get<train::TrainConfig>();
}

train::LossSpec loss_spec(RunContext& run, const std::vector<scenes::LabeledSample>& samples) {
  nlohmann::json j = run.get<nlohmann::json>("loss", {{"kind", "weighted_xe"}});
  const std::string kind = j.value("kind", std::string("weighted_xe"));
  if (kind != "xe" && !j.contains("w_pos")) {
    std::vector<scenes::Label> labels;
    for (const auto& s : samples) labels.push_back(s.label);
    const auto w = scenes::class_weights(labels);
    j["w_pos"] = w.positive;
    j["w_neg"] = w.negative;
  }
  return j.get<train::LossSpec>();
}

nlohmann::json metrics_json(const train::ClassificationMetrics& m) {
  return {{"loss", m.loss},
          {"accuracy", m.accuracy},
          {"recall_yes", m.recall_yes},
          {"recall_no", m.recall_no},
          {"count", m.count}};
}

}  // namespace

int cmd_train(RunContext& run, const TrainOptions& options) {
  const std::string stage =
      options.stage.empty() ? run.get<std::string>("stage", "all") : options.stage;
  if (stage != "all" && stage != "alignment" && stage != "finetune") {
    throw InvalidArgument("stage must be all, alignment or finetune");
  }
  const fs::path data = run.get<std::string>("data", default_output("synth").string());
  const nlohmann::json summary = read_json(data / "summary.json");
  const auto gen = summary.at("generator").get<toygen::GeneratorConfig>();
  const auto mode = parse_mode(summary.at("mode").get<std::string>());
  if (!mode) throw IoError("dataset summary names an unknown mode");

  const auto vcfg = verifier_config(run, *mode, gen);
  train::TrainConfig align_defaults;
  align_defaults.epochs = 2;
  align_defaults.lr_max = 3e-3;
  const auto align_cfg = train_config(run, "alignment", align_defaults);
  const auto ft_cfg = train_config(run, "finetune", train::TrainConfig{});
  std::optional<fs::path> aligned_path;
  if (run.section().contains("aligned_checkpoint")) {
    aligned_path = run.section().at("aligned_checkpoint").get<std::string>();
  }

  // A resumed run continues in its own directory.
  if (options.resume.empty()) run.prepare_output();
  else fs::create_directories(run.out_dir());
  run.write_resolved_config();

  std::optional<verify::VerifierModel> aligned;
  if (stage != "finetune") {
    const auto alignment = scenes::read_dataset(data / "alignment");
    verify::VerifierModel model(vcfg);
    train::ensure_feature_stats(model, alignment);
    const auto result = train::run_alignment(model, alignment, align_cfg);
    verify::save_checkpoint(run.out(kAlignedName), model,
                            {{"stage", "alignment"},
                             {"initial_eval_loss", result.initial_eval_loss},
                             {"epoch_eval_loss", result.epoch_eval_loss}});
    train::write_curve_csv(run.out("alignment_curve.csv"), result.curve);
    std::printf("alignment: eval loss %.4f -> %.4f\n", result.initial_eval_loss,
                result.epoch_eval_loss.empty() ? result.initial_eval_loss
                                               : result.epoch_eval_loss.back());
    aligned = std::move(model);
  }
  if (stage == "alignment") return 0;

  if (!aligned) {
    const fs::path path = aligned_path.value_or(run.out(kAlignedName));
    if (!fs::exists(path)) {
      throw StateError("fine-tuning needs an alignment checkpoint (" + path.string() +
                       "); run the alignment stage first");
    }
    auto ckpt = verify::load_checkpoint(path);
    if (ckpt.metadata.value("stage", std::string()) != "alignment") {
      throw StateError(path.string() + " is not an alignment checkpoint");
    }
    aligned = std::move(ckpt.model);
  }

  const auto samples = scenes::read_dataset(data / "finetune");
  const auto spec = loss_spec(run, samples);
  std::optional<train::ResumePoint> resume;
  if (!options.resume.empty()) resume = train::load_resume_point(options.resume);
  const auto result =
      train::run_finetune(*aligned, samples, spec, ft_cfg, run.out("checkpoints"), resume);
  verify::save_checkpoint(run.out("best.ckpt"), result.best_model,
                          {{"stage", "finetune"},
                           {"best_epoch", result.best_epoch},
                           {"best_eval_loss", result.best_eval_loss}});
  train::write_curve_csv(run.out("finetune_curve.csv"), result.curve);

  const auto inputs = train::prepare_all(result.best_model, samples);
  nlohmann::json per_category = nlohmann::json::object();
  for (auto c : scenes::kAllCategories) {
    std::vector<std::size_t> idx;
    for (std::size_t i : result.split.eval) {
      if (samples[i].category() == c) idx.push_back(i);
    }
    if (idx.empty()) continue;
    per_category[std::string(scenes::category_header(c))] =
        train::evaluate(result.best_model, inputs, samples, idx, spec).accuracy;
  }
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& m : result.epoch_metrics) epochs.push_back(metrics_json(m));
  const auto held_out = train::evaluate(result.best_model, inputs, samples, result.split.eval, spec);
  write_json(run.out("metrics.json"), {{"best_epoch", result.best_epoch},
                                       {"best_eval_loss", result.best_eval_loss},
                                       {"held_out", metrics_json(held_out)},
                                       {"held_out_per_category", per_category},
                                       {"epochs", epochs}});
  std::printf("fine-tune: best epoch %zu, held-out loss %.4f, accuracy %.3f\n",
              result.best_epoch, result.best_eval_loss, held_out.accuracy);
  return 0;
}

}  // namespace tapverify::cli
