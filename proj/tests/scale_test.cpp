#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "tapverify/error.hpp"
#include "tapverify/scale/accuracy.hpp"
#include "tapverify/scale/best_of_n.hpp"
#include "tapverify/scale/cost_model.hpp"
#include "tapverify/scale/profile.hpp"
#include "tapverify/scenes/oracle.hpp"
#include "tapverify/toygen/generator.hpp"
#include "tapverify/verify/model.hpp"

namespace tv = tapverify;
namespace sc = tapverify::scenes;
namespace sl = tapverify::scale;
using tv::VerifierMode;
using tv::numcore::MeterContext;

namespace {

sl::PaperProfile sana() {
  return sl::load_profile(std::filesystem::path(TAPVERIFY_TEST_DATA_DIR) / "profiles/sana.json");
}

tv::toygen::GeneratorConfig toy(double p) {
  tv::toygen::GeneratorConfig c;
  c.corruption_rate = p;
  return c;
}

}  // namespace

TEST(AffineFit, ExactOnThreePointsWithResiduals) {
  const std::vector<sl::CostPoint> pts{{1, 102}, {2, 363}, {4, 565}, {6, 767}};
  const auto fit = sl::fit_affine(pts);
  EXPECT_DOUBLE_EQ(fit.cost.single, 102);
  EXPECT_DOUBLE_EQ(fit.cost.marginal, 101);
  EXPECT_DOUBLE_EQ(fit.cost.fixed, 161);
  EXPECT_DOUBLE_EQ(fit.cost.at(1), 102);
  EXPECT_DOUBLE_EQ(fit.cost.at(9), 1070);
  ASSERT_EQ(fit.residuals.size(), 4u);
  EXPECT_DOUBLE_EQ(fit.max_abs_residual, 0.0);
}

TEST(AffineFit, RejectsDegenerateInput) {
  const std::vector<sl::CostPoint> no_single{{2, 3}, {4, 5}};
  EXPECT_THROW(sl::fit_affine(no_single), tv::InvalidArgument);
  const std::vector<sl::CostPoint> one_multi{{1, 3}, {2, 5}};
  EXPECT_THROW(sl::fit_affine(one_multi), tv::InvalidArgument);
  const std::vector<sl::CostPoint> repeated{{1, 3}, {2, 5}, {2, 6}};
  EXPECT_THROW(sl::fit_affine(repeated), tv::InvalidArgument);
  const std::vector<sl::CostPoint> decreasing{{1, 3}, {2, 9}, {4, 5}};
  EXPECT_THROW(sl::fit_affine(decreasing), tv::InvalidArgument);
}

TEST(PlanBudget, LargestAffordableN) {
  const sl::AffineCost c{10, 5, 10};
  EXPECT_EQ(sl::plan_budget(c, 45, 0.0).chosen_n, 4u);
  EXPECT_EQ(sl::plan_budget(c, 44, 0.0).chosen_n, 3u);
  EXPECT_EQ(sl::plan_budget(c, 44, 0.025).chosen_n, 4u);
  EXPECT_EQ(sl::plan_budget(c, 1, 0.0).chosen_n, 1u);
  EXPECT_EQ(sl::plan_budget(c, 1e9, 0.0, 16).chosen_n, 16u);
  EXPECT_THROW(sl::plan_budget(c, 0.0), tv::InvalidArgument);
}

TEST(PlanBudget, MonotoneInBudget) {
  const sl::AffineCost c{102, 161, 101};
  std::size_t prev = 0;
  for (double b = 50; b < 3000; b += 37) {
    const auto n = sl::plan_budget(c, b).chosen_n;
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(Profile, SanaNineCellPlan) {
  const auto p = sana();
  const std::vector<std::vector<std::size_t>> expected{{2, 4, 6}, {3, 7, 11}, {4, 9, 15}};
  const VerifierMode modes[] = {VerifierMode::kPixelReencode, VerifierMode::kAeLatent,
                                VerifierMode::kHiddenState};
  for (int m = 0; m < 3; ++m) {
    const auto model = sl::cost_model_from(p.verifier(modes[m]));
    for (int b = 0; b < 3; ++b) {
      EXPECT_EQ(sl::plan_budget(model.time_ms, p.budgets_ms[b]).chosen_n, expected[m][b]);
    }
  }
}

TEST(Profile, StrictRuleMissesTwoCells) {
  // Without slack the hidden-state row falls one short at both ends.
  const auto model = sl::cost_model_from(sana().verifier(VerifierMode::kHiddenState));
  EXPECT_EQ(sl::plan_budget(model.time_ms, 554, 0.0).chosen_n, 3u);
  EXPECT_EQ(sl::plan_budget(model.time_ms, 1662, 0.0).chosen_n, 14u);
}

TEST(Profile, FieldsAndLookup) {
  const auto p = sana();
  EXPECT_EQ(p.name, "sana");
  EXPECT_EQ(p.num_layers, 20u);
  EXPECT_EQ(p.verifier(VerifierMode::kHiddenState).tap_layer.value(), 7u);
  EXPECT_EQ(p.verifier(VerifierMode::kAeLatent).at(1)->time_ms, 138);
  EXPECT_EQ(p.verifier(VerifierMode::kAeLatent).at(3), nullptr);
  const auto pix = sl::load_profile(std::filesystem::path(TAPVERIFY_TEST_DATA_DIR) /
                                    "profiles/pixart.json");
  EXPECT_EQ(pix.verifier(VerifierMode::kHiddenState).at(1)->time_ms, 76);
}

TEST(Profile, MalformedFilesThrow) {
  const auto path = std::filesystem::temp_directory_path() / "tapverify_bad_profile.json";
  {
    std::ofstream out(path);
    out << "{\"name\": 3";
  }
  EXPECT_THROW(sl::load_profile(path), tv::IoError);
  EXPECT_THROW(sl::load_profile(path.string() + ".missing"), tv::IoError);
}

TEST(BestOfN, SingleCandidateSkipsVerification) {
  const tv::toygen::Generator gen(toy(0.4));
  const sl::OracleVerifier oracle;
  const auto prompt = sc::sample_prompts(1, 1).front();
  MeterContext ctx;
  const auto r = sl::run_best_of_n(prompt, 1, 5, gen, oracle, sl::Selection::kTokenProbability,
                                   ctx);
  EXPECT_TRUE(r.scores.empty());
  EXPECT_EQ(r.flops, gen.full_flops());
  EXPECT_THROW(sl::run_best_of_n(prompt, 0, 5, gen, oracle, sl::Selection::kRandom, ctx),
               tv::InvalidArgument);
}

TEST(BestOfN, HiddenModeResumesOnlyTheWinner) {
  const tv::toygen::Generator gen(toy(0.4));
  const tv::verify::VerifierModel model(
      tv::verify::VerifierConfig::for_generator(VerifierMode::kHiddenState, gen.config()));
  const sl::LearnedVerifier verifier(model);
  const auto prompt = sc::sample_prompts(1, 2).front();
  MeterContext ctx;
  const auto r = sl::run_best_of_n(prompt, 4, 5, gen, verifier,
                                   sl::Selection::kTokenProbability, ctx);
  EXPECT_EQ(r.resume_calls, 1u);
  EXPECT_EQ(r.scores.size(), 4u);
  const auto per = sl::measure_candidate_cost(gen, verifier, prompt, 5);
  EXPECT_EQ(r.flops, 4 * per.flops + gen.resume_flops());
}

TEST(BestOfN, OracleWinnerIsCorrectWhenAnyCandidateIs) {
  const tv::toygen::Generator gen(toy(0.5));
  const sl::OracleVerifier oracle;
  const auto prompts = sc::sample_prompts(60, 3);
  MeterContext ctx = MeterContext::disabled();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const auto r = sl::run_best_of_n(prompts[i], 4, i, gen, oracle,
                                     sl::Selection::kTokenProbability, ctx);
    bool any = false;
    for (const auto& s : r.scores) any |= s.decision == sc::Label::kYes;
    EXPECT_EQ(sc::oracle_check(prompts[i], r.final_scene) == sc::Label::kYes, any);
  }
}

TEST(BestOfN, OracleAccuracyFollowsPlantedLaw) {
  // 600 prompts: binomial standard error at p^N = 0.16 is about 0.015.
  const double p = 0.4;
  const tv::toygen::Generator gen(toy(p));
  const sl::OracleVerifier oracle;
  const auto prompts = sc::sample_prompts(600, 4);
  for (std::size_t n : {1u, 2u, 4u}) {
    std::vector<sl::Outcome> outcomes;
    MeterContext ctx = MeterContext::disabled();
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      const auto r = sl::run_best_of_n(prompts[i], n, 1000 + i, gen, oracle,
                                       sl::Selection::kTokenProbability, ctx);
      outcomes.push_back({prompts[i], r.final_scene});
    }
    const auto table = sl::task_accuracy(outcomes);
    EXPECT_NEAR(*table.overall, 1.0 - std::pow(p, static_cast<double>(n)), 0.05) << n;
  }
}

TEST(Accuracy, PerCategoryAndUnweightedOverall) {
  const auto prompts = sc::sample_prompts(12, 5);
  std::vector<sl::Outcome> outcomes;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    sc::Scene s = prompts[i].target;
    if (i == 0) s.objects.clear();  // first single-object prompt fails
    outcomes.push_back({prompts[i], s});
  }
  const auto t = sl::task_accuracy(outcomes);
  EXPECT_DOUBLE_EQ(*t.category(sc::Category::kSingleObject), 0.5);
  EXPECT_DOUBLE_EQ(*t.category(sc::Category::kCounting), 1.0);
  EXPECT_DOUBLE_EQ(*t.overall, (0.5 + 5.0) / 6.0);
  EXPECT_FALSE(sl::task_accuracy({}).overall.has_value());
}
