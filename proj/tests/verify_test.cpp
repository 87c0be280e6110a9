#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/scale/best_of_n.hpp"
#include "tapverify/scenes/prompt.hpp"
#include "tapverify/toygen/generator.hpp"
#include "tapverify/verify/checkpoint.hpp"
#include "tapverify/verify/features.hpp"
#include "tapverify/verify/model.hpp"
#include "tapverify/verify/score.hpp"

namespace tv = tapverify;
namespace sc = tapverify::scenes;
namespace vf = tapverify::verify;
using tv::VerifierMode;
using tv::numcore::MeterContext;
using tv::numcore::Rng;
using tv::numcore::Tensor;

namespace {

tv::toygen::GeneratorConfig toy() {
  tv::toygen::GeneratorConfig c;
  c.corruption_rate = 0.4;
  return c;
}

vf::VerifierModel model_for(VerifierMode mode) {
  return vf::VerifierModel(vf::VerifierConfig::for_generator(mode, toy()));
}

}  // namespace

TEST(VerifierConfig, WidthsFollowTheGenerator) {
  const auto g = toy();
  EXPECT_EQ(vf::VerifierConfig::for_generator(VerifierMode::kHiddenState, g).in_dim, 64u);
  EXPECT_EQ(vf::VerifierConfig::for_generator(VerifierMode::kAeLatent, g).in_dim, 48u);
  const auto pix = vf::VerifierConfig::for_generator(VerifierMode::kPixelReencode, g);
  EXPECT_EQ(pix.in_dim, pix.encoder_width);
  EXPECT_EQ(pix.sequence_length(), 16u + sc::kPromptLength + 1u);
}

TEST(VerifierConfig, JsonRoundTripAndValidation) {
  auto c = vf::VerifierConfig::for_generator(VerifierMode::kAeLatent, toy());
  c.scorer_blocks = 3;
  const nlohmann::json j = c;
  EXPECT_EQ(j.get<vf::VerifierConfig>(), c);
  nlohmann::json bad = j;
  bad["mode"] = "clip";
  EXPECT_THROW(bad.get<vf::VerifierConfig>(), tv::InvalidArgument);
  bad = j;
  bad["scorer_width"] = 0;
  EXPECT_THROW(bad.get<vf::VerifierConfig>(), tv::InvalidArgument);
}

TEST(VerifierModel, EncoderOnlyInPixelMode) {
  EXPECT_FALSE(model_for(VerifierMode::kHiddenState).encoder.has_value());
  const auto pix = model_for(VerifierMode::kPixelReencode);
  ASSERT_TRUE(pix.encoder.has_value());
  std::size_t frozen = 0;
  pix.for_each_frozen([&](const std::string&, const Tensor& t) { frozen += t.size(); });
  EXPECT_GT(frozen, 0u);
  // Trainable stacks are identical across modes with equal widths.
  auto a = vf::VerifierConfig::for_generator(VerifierMode::kPixelReencode, toy());
  auto b = a;
  b.mode = VerifierMode::kAeLatent;
  EXPECT_EQ(vf::VerifierModel(a).scorer.head_w, vf::VerifierModel(b).scorer.head_w);
}

TEST(VerifierModel, LogitsShapeAndInputChecks) {
  const auto m = model_for(VerifierMode::kAeLatent);
  Rng rng(1);
  const Tensor x = rng.normal_tensor({16, 48}, 1.0);
  const auto prompt = sc::sample_prompts(1, 1).front();
  MeterContext ctx;
  const Tensor logits = vf::verifier_logits(m, x, prompt.tokens(), ctx);
  EXPECT_EQ(logits.shape(), (tv::numcore::Shape{1, 2}));
  EXPECT_THROW(vf::verifier_logits(m, rng.normal_tensor({15, 48}, 1.0), prompt.tokens(), ctx),
               tv::ShapeError);
  EXPECT_THROW(vf::verifier_logits(m, rng.normal_tensor({16, 40}, 1.0), prompt.tokens(), ctx),
               tv::ShapeError);
  EXPECT_THROW(vf::verifier_logits(m, x, {1, 2}, ctx), tv::ShapeError);
  EXPECT_THROW(vf::verifier_logits(m, x, {3, 4, 5, 6, 999}, ctx), tv::InvalidArgument);
}

TEST(Features, ModesNeedTheRightStage) {
  const tv::toygen::Generator gen(toy());
  const auto prompt = sc::sample_prompts(1, 2).front();
  MeterContext ctx;
  const auto tapped = gen.generate_tapped(prompt, 5, ctx);
  EXPECT_EQ(vf::raw_features(VerifierMode::kHiddenState, gen, tapped, ctx).shape(),
            (tv::numcore::Shape{16, 64}));
  EXPECT_THROW(vf::raw_features(VerifierMode::kAeLatent, gen, tapped, ctx), tv::StateError);
  const auto done = gen.complete_latent(tapped, ctx);
  EXPECT_EQ(vf::raw_features(VerifierMode::kAeLatent, gen, done, ctx).shape(),
            (tv::numcore::Shape{16, 48}));
  EXPECT_EQ(vf::raw_features(VerifierMode::kPixelReencode, gen, done, ctx).shape(),
            (tv::numcore::Shape{16, 48}));
  EXPECT_THROW(vf::raw_features(VerifierMode::kHiddenState, gen, done, ctx), tv::StateError);
}

TEST(Features, HiddenInputsAreNormalized) {
  auto m = model_for(VerifierMode::kHiddenState);
  sc::FeatureStats stats;
  stats.mean = Tensor::full({64}, 2.0);
  stats.variance = Tensor::full({64}, 4.0);
  stats.sample_count = 10;
  m.stats = stats;
  MeterContext ctx;
  const Tensor x = Tensor::full({16, 64}, 6.0);
  const Tensor y = vf::prepare_inputs(m, x, ctx);
  EXPECT_NEAR(y[0], 4.0 / std::sqrt(4.0 + 1e-6), 1e-12);
}

TEST(Score, TieResolvesToYesHalf) {
  const auto s = vf::score_from_logits(0.3, 0.3);
  EXPECT_EQ(s.decision, sc::Label::kYes);
  EXPECT_DOUBLE_EQ(s.value, 0.5);
}

TEST(Score, InvariantsOverRandomLogits) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(-20, 20), b = rng.uniform(-20, 20);
    const auto s = vf::score_from_logits(a, b);
    EXPECT_EQ(s.decision == sc::Label::kYes, s.value > 0.0);
    EXPECT_GE(std::abs(s.value), 0.5);
    EXPECT_LE(std::abs(s.value), 1.0);
    const double p_yes = 1.0 / (1.0 + std::exp(b - a));
    EXPECT_NEAR(s.value, a >= b ? p_yes : -(1.0 - p_yes), 1e-12);
  }
}

TEST(Score, SelectBestIsPermutationEquivariant) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<vf::Score> scores;
    for (int i = 0; i < 6; ++i) {
      scores.push_back(vf::score_from_logits(rng.normal(), rng.normal()));
    }
    const std::size_t best = vf::select_best(scores);
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    std::vector<vf::Score> shuffled;
    for (auto p : perm) shuffled.push_back(scores[p]);
    EXPECT_EQ(perm[vf::select_best(shuffled)], best);
  }
  const std::vector<vf::Score> ties{{sc::Label::kYes, 0.7}, {sc::Label::kYes, 0.9},
                                    {sc::Label::kYes, 0.9}};
  EXPECT_EQ(vf::select_best(ties), 1u);
  EXPECT_THROW(vf::select_best(std::vector<vf::Score>{}), tv::InvalidArgument);
}

TEST(Score, RandomPositivePicksAmongYes) {
  const std::vector<vf::Score> scores{{sc::Label::kNo, -0.9},
                                      {sc::Label::kYes, 0.6},
                                      {sc::Label::kNo, -0.7},
                                      {sc::Label::kYes, 0.99}};
  std::vector<int> hits(4, 0);
  for (std::uint64_t s = 0; s < 400; ++s) ++hits[vf::select_random_positive(scores, s)];
  EXPECT_EQ(hits[0] + hits[2], 0);
  EXPECT_GT(hits[1], 150);
  EXPECT_GT(hits[3], 150);
  const std::vector<vf::Score> none{{sc::Label::kNo, -0.9}, {sc::Label::kNo, -0.6}};
  EXPECT_LT(vf::select_random_positive(none, 1), 2u);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  auto m = model_for(VerifierMode::kPixelReencode);
  const auto path = std::filesystem::temp_directory_path() / "tapverify_verify_rt.ckpt";
  std::map<std::string, Tensor> extras{{"m.x", Tensor::vector({1.5, -2.0})}};
  vf::save_checkpoint(path, m, {{"epoch", 3}}, extras);
  const auto back = vf::load_checkpoint(path);
  EXPECT_EQ(back.model.config(), m.config());
  EXPECT_EQ(back.metadata.at("epoch"), 3);
  EXPECT_EQ(back.extras.at("m.x"), extras.at("m.x"));
  std::vector<Tensor> a, b;
  m.for_each_trainable([&](const std::string&, const Tensor& t) { a.push_back(t); });
  back.model.for_each_trainable([&](const std::string&, const Tensor& t) { b.push_back(t); });
  EXPECT_EQ(a, b);
  m.for_each_frozen([&](const std::string&, const Tensor& t) { a.push_back(t); });
  back.model.for_each_frozen([&](const std::string&, const Tensor& t) { b.push_back(t); });
  EXPECT_EQ(a, b);
}

TEST(Checkpoint, RejectsForeignFiles) {
  const auto path = std::filesystem::temp_directory_path() / "tapverify_verify_bad.ckpt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTACKPT0000000000";
  }
  EXPECT_THROW(vf::load_checkpoint(path), tv::IoError);
  EXPECT_THROW(vf::load_checkpoint(path.string() + ".missing"), tv::IoError);
}

TEST(VerificationCost, HiddenBelowAeBelowPixel) {
  const tv::toygen::Generator gen(toy());
  const auto prompt = sc::sample_prompts(1, 4).front();
  std::vector<std::uint64_t> flops;
  for (auto mode : {VerifierMode::kHiddenState, VerifierMode::kAeLatent,
                    VerifierMode::kPixelReencode}) {
    const auto model = model_for(mode);
    const tv::scale::LearnedVerifier v(model);
    flops.push_back(tv::scale::measure_candidate_cost(gen, v, prompt, 9).flops);
  }
  EXPECT_LT(flops[0], flops[1]);
  EXPECT_LT(flops[1], flops[2]);
}
