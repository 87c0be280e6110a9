#include <cstdio>

#include "commands.hpp"
#include "tapverify/error.hpp"
#include "tapverify/scale/cost_model.hpp"
#include "tapverify/scale/profile.hpp"

namespace tapverify::cli {

namespace {

std::vector<scale::CostPoint> points_from_profile(const std::string& name,
                                                  const std::string& verifier,
                                                  const std::string& column) {
  const auto mode = parse_mode(verifier);
  if (!mode) throw InvalidArgument("unknown verifier '" + verifier + "'");
  const auto profile = scale::load_named_profile(name);
  std::vector<scale::CostPoint> points;
  for (const auto& p : profile.verifier(*mode).points) {
    if (column == "time_ms") {
      points.push_back({p.n, p.time_ms});
    } else if (column == "tflops" && p.tflops) {
      points.push_back({p.n, *p.tflops});
    } else if (column == "vram_gb" && p.vram_gb) {
      points.push_back({p.n, *p.vram_gb});
    } else if (column != "tflops" && column != "vram_gb") {
      throw InvalidArgument("column must be time_ms, tflops or vram_gb");
    }
  }
  return points;
}

}  // namespace

int cmd_fit_cost(RunContext& run) {
  std::vector<scale::CostPoint> points;
  if (run.section().contains("points")) {
    for (const auto& p : run.section().at("points")) {
      points.push_back({p.at("n").get<std::size_t>(), p.at("value").get<double>()});
    }
  } else {
    points = points_from_profile(run.get<std::string>("profile", "sana"),
                                 run.get<std::string>("verifier", "hidden_state"),
                                 run.get<std::string>("column", "time_ms"));
  }
  const auto budgets = run.get<std::vector<double>>("budgets", {});
  const auto slack = run.get<double>("slack", scale::kDefaultSlack);
  const auto fit = scale::fit_affine(points);
  run.prepare_output();
  run.write_resolved_config();

  nlohmann::json plans = nlohmann::json::array();
  for (double b : budgets) {
    const auto plan = scale::plan_budget(fit.cost, b, slack);
    plans.push_back({{"budget", b}, {"n", plan.chosen_n}, {"predicted", plan.predicted}});
  }
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({{"n", p.n}, {"value", p.value}});
  write_json(run.out("fit.json"), {{"points", pts},
                                   {"single", fit.cost.single},
                                   {"fixed", fit.cost.fixed},
                                   {"marginal", fit.cost.marginal},
                                   {"residuals", fit.residuals},
                                   {"max_abs_residual", fit.max_abs_residual},
                                   {"slack", slack},
                                   {"plans", plans}});
  std::printf("T(1) = %g; T(N) = %g + %g N for N >= 2; max |residual| %g\n", fit.cost.single,
              fit.cost.fixed, fit.cost.marginal, fit.max_abs_residual);
  for (const auto& p : plans) {
    std::printf("budget %g -> N = %zu (predicted %g)\n", p["budget"].get<double>(),
                p["n"].get<std::size_t>(), p["predicted"].get<double>());
  }
  return 0;
}

}  // namespace tapverify::cli
