#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/scenes/class_weights.hpp"
#include "tapverify/scenes/dataset.hpp"
#include "tapverify/scenes/feature_stats.hpp"
#include "tapverify/scenes/oracle.hpp"
#include "tapverify/scenes/prompt.hpp"
#include "tapverify/scenes/render.hpp"
#include "tapverify/toygen/generator.hpp"

namespace tv = tapverify;
namespace sc = tapverify::scenes;
using tv::numcore::Rng;
using tv::numcore::Tensor;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tapverify_scenes_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Prompt, TargetsPassTheOracle) {
  const auto prompts = sc::sample_prompts(600, 5);
  for (const auto& p : prompts) {
    EXPECT_EQ(sc::oracle_check(p, p.target), sc::Label::kYes) << p.text();
  }
}

TEST(Prompt, CategoryMixIsUniform) {
  const auto prompts = sc::sample_prompts(600, 6);
  std::map<sc::Category, int> counts;
  for (const auto& p : prompts) ++counts[p.spec.category];
  for (auto c : sc::kAllCategories) EXPECT_EQ(counts[c], 100);
}

TEST(Prompt, CorruptionAlwaysFailsTheOracle) {
  Rng rng(7);
  const auto prompts = sc::sample_prompts(1200, 7);
  for (const auto& p : prompts) {
    for (int k = 0; k < 3; ++k) {
      const sc::Scene s = sc::corrupt_scene(p, rng);
      EXPECT_NO_THROW(s.validate());
      EXPECT_EQ(sc::oracle_check(p, s), sc::Label::kNo) << p.text();
    }
  }
}

TEST(Prompt, TokensAreFixedLengthAndInVocabulary) {
  for (const auto& p : sc::sample_prompts(60, 8)) {
    const auto t = p.tokens();
    ASSERT_EQ(t.size(), sc::kPromptLength);
    EXPECT_EQ(t[0], sc::vocab::category(p.spec.category));
    for (int x : t) {
      EXPECT_GE(x, 0);
      EXPECT_LT(x, sc::vocab::kSize);
    }
  }
}

TEST(Prompt, KeyDependsOnLayout) {
  auto p = sc::sample_prompts(1, 9).front();
  const auto k = sc::prompt_key(p);
  p.target.objects[0].cell.col = (p.target.objects[0].cell.col + 1) % 4;
  if (p.target.objects.size() == 1) EXPECT_NE(sc::prompt_key(p), k);
}

TEST(Oracle, RulesPerCategory) {
  sc::Prompt p;
  p.spec.category = sc::Category::kCounting;
  p.spec.shape_a = sc::ShapeId::kBall;
  p.spec.count = 3;
  sc::Scene s;
  s.objects = {{sc::ShapeId::kBall, sc::ColorId::kRed, {0, 0}},
               {sc::ShapeId::kBall, sc::ColorId::kRed, {0, 1}},
               {sc::ShapeId::kCube, sc::ColorId::kRed, {0, 2}}};
  EXPECT_EQ(sc::oracle_check(p, s), sc::Label::kNo);
  s.objects.push_back({sc::ShapeId::kBall, sc::ColorId::kBlue, {3, 3}});
  EXPECT_EQ(sc::oracle_check(p, s), sc::Label::kYes);

  p.spec.category = sc::Category::kPosition;
  p.spec.shape_b = sc::ShapeId::kCube;
  p.spec.relation = sc::Relation::kLeftOf;
  EXPECT_EQ(sc::oracle_check(p, s), sc::Label::kYes);  // ball (0,0) left of cube (0,2)
  p.spec.relation = sc::Relation::kRightOf;
  EXPECT_EQ(sc::oracle_check(p, s), sc::Label::kYes);  // ball (3,3) right of cube (0,2)
  p.spec.relation = sc::Relation::kAbove;
  EXPECT_EQ(sc::oracle_check(p, s), sc::Label::kNo);
}

TEST(Scene, ValidateRejectsOverlapAndOffBoard) {
  sc::Scene s;
  s.objects = {{sc::ShapeId::kBall, sc::ColorId::kRed, {1, 1}},
               {sc::ShapeId::kCube, sc::ColorId::kRed, {1, 1}}};
  EXPECT_THROW(s.validate(), tv::InvalidArgument);
  s.objects = {{sc::ShapeId::kBall, sc::ColorId::kRed, {4, 0}}};
  EXPECT_THROW(s.validate(), tv::InvalidArgument);
}

TEST(Render, PerceiveInvertsRendering) {
  for (const auto& p : sc::sample_prompts(300, 10)) {
    const Tensor img = sc::render_image(p.target, 4);
    sc::Scene back = sc::perceive(img, 4);
    auto key = [](const sc::SceneObject& o) { return o.cell.row * 4 + o.cell.col; };
    auto sorted = p.target.objects;
    std::sort(sorted.begin(), sorted.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
    std::sort(back.objects.begin(), back.objects.end(),
              [&](auto& a, auto& b) { return key(a) < key(b); });
    EXPECT_EQ(back.objects, sorted);
  }
}

TEST(Render, PatchifyRoundTrip) {
  Rng rng(11);
  const Tensor img = rng.uniform_tensor({16, 16, 3}, 0.0, 1.0);
  const Tensor patches = sc::patchify(img, 4);
  EXPECT_EQ(patches.rows(), 16u);
  EXPECT_EQ(patches.cols(), 48u);
  EXPECT_EQ(sc::unpatchify(patches, 4, 4), img);
}

TEST(Render, ShapeMasksAreDistinct) {
  std::set<std::vector<double>> masks;
  for (int s = 0; s < sc::kNumShapes; ++s) {
    masks.insert(sc::shape_mask(static_cast<sc::ShapeId>(s), 4));
  }
  EXPECT_EQ(masks.size(), static_cast<std::size_t>(sc::kNumShapes));
}

TEST(ClassWeights, InverseFrequency) {
  const auto w = sc::class_weights(63, 37);
  EXPECT_EQ(w.positive, 0.37);
  EXPECT_EQ(w.negative, 0.63);
  EXPECT_THROW(sc::class_weights(5, 0), tv::InvalidArgument);
  const std::vector<sc::Label> labels{sc::Label::kYes, sc::Label::kNo, sc::Label::kYes,
                                      sc::Label::kYes};
  const auto w2 = sc::class_weights(labels);
  EXPECT_DOUBLE_EQ(w2.positive, 0.25);
  EXPECT_DOUBLE_EQ(w2.negative, 0.75);
}

TEST(FeatureStats, PooledMeanAndUnbiasedVariance) {
  const std::vector<Tensor> maps{Tensor::matrix({{1, 10}, {3, 10}}),
                                 Tensor::matrix({{5, 14}, {7, 14}})};
  const auto stats = sc::calibrate_feature_stats([&](std::size_t i) { return maps[i]; }, 2);
  EXPECT_DOUBLE_EQ(stats.mean[0], 4.0);
  EXPECT_DOUBLE_EQ(stats.mean[1], 12.0);
  EXPECT_DOUBLE_EQ(stats.variance[0], 20.0 / 3.0);
  EXPECT_DOUBLE_EQ(stats.variance[1], 16.0 / 3.0);
  const Tensor n = sc::normalize(maps[0], stats);
  EXPECT_NEAR(n(0, 0), (1.0 - 4.0) / std::sqrt(20.0 / 3.0 + 1e-6), 1e-12);
  EXPECT_THROW(sc::calibrate_feature_stats([&](std::size_t i) { return maps[i]; }, 1),
               tv::InvalidArgument);
}

TEST(Split, DisjointCoverAndDeterministic) {
  const auto a = sc::split_indices(101, 0.8, 3), b = sc::split_indices(101, 0.8, 3);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.train.size() + a.eval.size(), 101u);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  for (auto i : a.eval) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 101u);
}

class DatasetTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    tv::toygen::GeneratorConfig cfg;
    cfg.corruption_rate = 0.37;
    generator_ = new tv::toygen::Generator(cfg);
  }
  static void TearDownTestSuite() { delete generator_; }
  static tv::toygen::Generator* generator_;
};
tv::toygen::Generator* DatasetTest::generator_ = nullptr;

TEST_F(DatasetTest, FinetuneSetLabelsFollowTheOracle) {
  const auto set = sc::synthesize_finetune_set(*generator_, tv::VerifierMode::kHiddenState,
                                               {60, 8, 1});
  ASSERT_EQ(set.size(), 480u);
  std::size_t yes = 0;
  for (const auto& s : set) {
    tv::numcore::MeterContext ctx = tv::numcore::MeterContext::disabled();
    const auto state = generator_->generate_tapped(s.prompt, s.seed, ctx);
    EXPECT_EQ(s.label, sc::oracle_check(s.prompt, state.rendered_scene));
    yes += s.label == sc::Label::kYes;
  }
  // Positive rate is 1 - p in expectation; 480 draws give a standard error near 0.022.
  EXPECT_NEAR(static_cast<double>(yes) / 480.0, 0.63, 0.08);
}

TEST_F(DatasetTest, WriteReadRoundTripAndByteDeterminism) {
  const auto set = sc::synthesize_finetune_set(*generator_, tv::VerifierMode::kAeLatent,
                                               {6, 2, 4});
  const auto dir = temp_dir("roundtrip");
  sc::write_dataset(dir / "a", set);
  sc::write_dataset(dir / "b", sc::synthesize_finetune_set(
                                   *generator_, tv::VerifierMode::kAeLatent, {6, 2, 4}));
  EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
  EXPECT_EQ(slurp(dir / "a.bin"), slurp(dir / "b.bin"));

  const auto back = sc::read_dataset(dir / "a");
  ASSERT_EQ(back.size(), set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(back[i].id, set[i].id);
    EXPECT_EQ(back[i].prompt, set[i].prompt);
    EXPECT_EQ(back[i].label, set[i].label);
    EXPECT_EQ(back[i].targets.shapes, set[i].targets.shapes);
    ASSERT_EQ(back[i].features.shape(), set[i].features.shape());
    // Features are stored as f32.
    EXPECT_LT(tv::numcore::max_abs_diff(back[i].features, set[i].features), 1e-6);
  }
  EXPECT_THROW(sc::read_dataset(dir / "missing"), tv::IoError);
}

TEST(AttributeTargets, EmptyCellsAndObjects) {
  sc::Scene s;
  s.objects = {{sc::ShapeId::kRing, sc::ColorId::kCyan, {1, 2}}};
  const auto t = sc::attribute_targets(s);
  ASSERT_EQ(t.shapes.size(), 16u);
  EXPECT_EQ(t.shapes[6], sc::vocab::shape(sc::ShapeId::kRing));
  EXPECT_EQ(t.colors[6], sc::vocab::color(sc::ColorId::kCyan));
  EXPECT_EQ(t.shapes[0], sc::vocab::kEmpty);
}
