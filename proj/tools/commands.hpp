#pragma once

#include <optional>
#include <string>

#include "run_context.hpp"

namespace tapverify::cli {

struct TrainOptions {
  std::string stage;  // empty: take it from the config
  std::string resume;
};

int cmd_synth(RunContext& run);
int cmd_train(RunContext& run, const TrainOptions& options);
int cmd_eval(RunContext& run);
int cmd_profile(RunContext& run);
int cmd_fit_cost(RunContext& run);

}  // namespace tapverify::cli
