#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "commands.hpp"
#include "tapverify/error.hpp"

using namespace tapverify::cli;

namespace {

void add_common(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("--config", opts.config_path, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", opts.seed, "Global seed (overrides the config)");
  sub->add_option("--out", opts.out,
                  std::string("Output directory (relative paths go under $") + kOutputRootEnv +
                      " when set)");
  sub->add_flag("--force", opts.force, "Overwrite a non-empty output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden-state verifiers for Best-of-N scaling of single-step generators"};
  app.require_subcommand(1);
  CommonOptions opts;
  TrainOptions train_opts;

  auto* synth = app.add_subcommand("synth", "Synthesize labeled fine-tuning and alignment sets");
  auto* train = app.add_subcommand("train", "Two-stage verifier training");
  auto* eval = app.add_subcommand("eval", "Budgeted Best-of-N plan and toy accuracy sweep");
  auto* profile = app.add_subcommand("profile", "Savings tables from published and live costs");
  auto* fit = app.add_subcommand("fit-cost", "Fit the affine Best-of-N cost model");
  for (auto* sub : {synth, train, eval, profile, fit}) add_common(sub, opts);
  train->add_option("--stage", train_opts.stage, "all, alignment or finetune")
      ->check(CLI::IsMember({"all", "alignment", "finetune"}));
  train->add_option("--resume", train_opts.resume, "Epoch checkpoint to continue from")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    RunContext run(name, opts);
    if (name == "synth") return cmd_synth(run);
    if (name == "train") return cmd_train(run, train_opts);
    if (name == "eval") return cmd_eval(run);
    if (name == "profile") return cmd_profile(run);
    return cmd_fit_cost(run);
  } catch (const tapverify::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
