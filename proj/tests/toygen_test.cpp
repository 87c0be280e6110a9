#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/scenes/dataset.hpp"
#include "tapverify/scenes/oracle.hpp"
#include "tapverify/scenes/render.hpp"
#include "tapverify/toygen/generator.hpp"

namespace tv = tapverify;
namespace sc = tapverify::scenes;
using tv::numcore::MeterContext;
using tv::numcore::Tensor;
using tv::toygen::Generator;
using tv::toygen::GeneratorConfig;

namespace {

GeneratorConfig with_rate(double p, std::size_t tap = 3) {
  GeneratorConfig c;
  c.corruption_rate = p;
  c.tap_layer = tap;
  return c;
}

// Solves (A^T A + lambda I) w = A^T y by Gaussian elimination.
std::vector<std::vector<double>> ridge(const std::vector<std::vector<double>>& x,
                                       const std::vector<std::vector<double>>& y,
                                       double lambda) {
  const std::size_t d = x[0].size(), k = y[0].size();
  std::vector<std::vector<double>> a(d, std::vector<double>(d + k, 0.0));
  for (std::size_t n = 0; n < x.size(); ++n) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) a[i][j] += x[n][i] * x[n][j];
      for (std::size_t j = 0; j < k; ++j) a[i][d + j] += x[n][i] * y[n][j];
    }
  }
  for (std::size_t i = 0; i < d; ++i) a[i][i] += lambda;
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < d; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < d + k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<std::vector<double>> w(d, std::vector<double>(k));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < k; ++j) w[i][j] = a[i][d + j] / a[i][i];
  return w;
}

}  // namespace

TEST(GeneratorConfig, Validation) {
  GeneratorConfig c;
  c.tap_layer = 8;
  EXPECT_THROW(Generator{c}, tv::InvalidArgument);
  c = GeneratorConfig{};
  c.corruption_rate = 1.5;
  EXPECT_THROW(Generator{c}, tv::InvalidArgument);
  c = GeneratorConfig{};
  c.image_size = 15;
  EXPECT_THROW(Generator{c}, tv::InvalidArgument);
  c = GeneratorConfig{};
  c.model_width = 40;
  EXPECT_THROW(Generator{c}, tv::InvalidArgument);
  EXPECT_EQ(GeneratorConfig{}.num_tokens(), 21u);
  EXPECT_EQ(tv::toygen::ae_latent_tokens(1024, 32), 1024u);
  EXPECT_THROW(tv::toygen::ae_latent_tokens(1000, 32), tv::InvalidArgument);
}

TEST(Generator, TruncateResumeEqualsFullRun) {
  tv::numcore::Rng rng(3);
  const auto prompts = sc::sample_prompts(24, 3);
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const std::size_t tap = rng.below(8);
    const Generator gen(with_rate(0.4, tap));
    const std::uint64_t seed = rng.next_u64();
    MeterContext full_ctx, split_ctx;
    const auto full = gen.generate_full(prompts[i], seed, full_ctx);
    const auto tapped = gen.generate_tapped(prompts[i], seed, split_ctx);
    const auto image = gen.resume_and_decode(tapped, split_ctx);
    EXPECT_EQ(tv::numcore::max_abs_diff(full.image.pixels, image.pixels), 0.0);
    EXPECT_EQ(full_ctx.flops(), split_ctx.flops());
    EXPECT_EQ(full_ctx.flops(), gen.full_flops());
  }
}

TEST(Generator, StageFlopsMatchMeter) {
  const Generator gen(with_rate(0.0));
  const auto prompt = sc::sample_prompts(1, 4).front();
  MeterContext ctx;
  const auto tapped = gen.generate_tapped(prompt, 1, ctx);
  EXPECT_EQ(ctx.flops(), gen.tapped_flops());
  MeterContext resume_ctx;
  gen.resume_and_decode(tapped, resume_ctx);
  EXPECT_EQ(resume_ctx.flops(), gen.resume_flops());
  EXPECT_EQ(gen.tapped_flops() + gen.resume_flops(), gen.full_flops());
}

TEST(Generator, LifecycleErrors) {
  const Generator gen(with_rate(0.0));
  const auto prompt = sc::sample_prompts(1, 5).front();
  MeterContext ctx;
  const auto tapped = gen.generate_tapped(prompt, 2, ctx);
  EXPECT_THROW(gen.decode(tapped, ctx), tv::StateError);
  EXPECT_THROW(gen.export_ae_latent(tapped), tv::StateError);
  const auto done = gen.complete_latent(tapped, ctx);
  EXPECT_THROW(gen.complete_latent(done, ctx), tv::StateError);
  EXPECT_THROW(gen.tapped_features(done, ctx), tv::StateError);
  const Generator other(with_rate(0.0, 5));
  EXPECT_THROW(other.complete_latent(tapped, ctx), tv::StateError);
}

TEST(Generator, DecodedImagesDepictTheRenderedScene) {
  const Generator gen(with_rate(0.4));
  const auto prompts = sc::sample_prompts(240, 6);
  MeterContext ctx = MeterContext::disabled();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const auto run = gen.generate_full(prompts[i], 1000 + i, ctx);
    const sc::Scene seen = sc::perceive(run.image.pixels, gen.config().patch_size);
    EXPECT_EQ(sc::oracle_check(prompts[i], seen),
              sc::oracle_check(prompts[i], run.state.rendered_scene));
  }
}

TEST(Generator, CorruptionRateMatchesP) {
  // Binomial(4800, 0.3): three standard errors are about 0.02.
  const Generator gen(with_rate(0.3));
  const auto prompts = sc::sample_prompts(600, 7);
  int fired = 0, labelled_no = 0;
  for (const auto& p : prompts) {
    for (std::uint64_t s = 0; s < 8; ++s) {
      const bool f = gen.corruption_fires(p, s);
      fired += f;
      labelled_no += sc::oracle_check(p, gen.candidate_scene(p, s)) == sc::Label::kNo;
    }
  }
  EXPECT_NEAR(fired / 4800.0, 0.3, 0.02);
  EXPECT_EQ(fired, labelled_no);
}

TEST(Generator, CorruptionExtremes) {
  const auto prompts = sc::sample_prompts(60, 8);
  const Generator never(with_rate(0.0)), always(with_rate(1.0));
  for (const auto& p : prompts) {
    EXPECT_EQ(never.candidate_scene(p, 3), p.target);
    EXPECT_EQ(sc::oracle_check(p, always.candidate_scene(p, 3)), sc::Label::kNo);
  }
}

TEST(Generator, SubstitutedShapeIsUniform) {
  // Single-object corruption swaps in one of the three other kinds; chi-square
  // with 2 dof, 13.82 is the 0.999 quantile.
  const Generator gen(with_rate(1.0));
  tv::numcore::Rng rng(9);
  std::map<int, int> counts;
  int n = 0;
  for (int i = 0; i < 3000; ++i) {
    sc::Prompt p = sc::sample_prompt(sc::Category::kSingleObject, rng);
    p.spec.shape_a = sc::ShapeId::kCube;
    p.target.objects[0].shape = sc::ShapeId::kCube;
    ++counts[static_cast<int>(gen.candidate_scene(p, i).objects[0].shape)];
    ++n;
  }
  ASSERT_EQ(counts.size(), 3u);
  EXPECT_EQ(counts.count(static_cast<int>(sc::ShapeId::kCube)), 0u);
  double chi2 = 0.0;
  for (auto [k, c] : counts) chi2 += (c - n / 3.0) * (c - n / 3.0) / (n / 3.0);
  EXPECT_LT(chi2, 13.82);
}

TEST(Generator, DeterministicPerSeed) {
  const Generator gen(with_rate(0.4));
  const auto prompt = sc::sample_prompts(1, 10).front();
  MeterContext ctx;
  const auto a = gen.generate_tapped(prompt, 77, ctx);
  const auto b = gen.generate_tapped(prompt, 77, ctx);
  const auto c = gen.generate_tapped(prompt, 78, ctx);
  EXPECT_EQ(a.hidden, b.hidden);
  EXPECT_NE(a.noise_latent, c.noise_latent);
}

TEST(Generator, TappedFeaturesCarryCellContent) {
  // A linear probe on single tapped rows recovers the cell's shape (or EMPTY)
  // on held-out scenes.
  const Generator gen(with_rate(0.4));
  const auto samples =
      sc::synthesize_finetune_set(gen, tv::VerifierMode::kHiddenState, {120, 2, 11});
  std::vector<std::vector<double>> x_train, y_train, x_test;
  std::vector<int> y_test;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    for (std::size_t cell = 0; cell < 16; ++cell) {
      std::vector<double> row(s.features.row(cell).begin(), s.features.row(cell).end());
      row.push_back(1.0);
      const int cls = s.targets.shapes[cell] == sc::vocab::kEmpty
                          ? 0
                          : 1 + s.targets.shapes[cell] - sc::vocab::kShapeBase;
      if (i % 4 == 3) {
        x_test.push_back(row);
        y_test.push_back(cls);
      } else {
        std::vector<double> onehot(5, 0.0);
        onehot[cls] = 1.0;
        x_train.push_back(row);
        y_train.push_back(onehot);
      }
    }
  }
  const auto w = ridge(x_train, y_train, 1e-3);
  int correct = 0;
  for (std::size_t n = 0; n < x_test.size(); ++n) {
    int best = 0;
    double best_v = -1e300;
    for (int k = 0; k < 5; ++k) {
      double v = 0.0;
      for (std::size_t i = 0; i < x_test[n].size(); ++i) v += x_test[n][i] * w[i][k];
      if (v > best_v) best_v = v, best = k;
    }
    correct += best == y_test[n];
  }
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(x_test.size()), 0.95);
}

TEST(Generator, LinearProbeReadsTheCorruptedBit) {
  // Probe on the tapped image rows summed over cells (a linear map of the
  // hidden state), trained and tested on disjoint seeds.
  const Generator gen(with_rate(0.4));
  auto pooled = [&](std::uint64_t seed, std::vector<std::vector<double>>& x,
                    std::vector<int>& y) {
    for (const auto& s :
         sc::synthesize_finetune_set(gen, tv::VerifierMode::kHiddenState, {150, 2, seed})) {
      std::vector<double> row(s.features.cols() + 1, 0.0);
      for (std::size_t r = 0; r < s.features.rows(); ++r) {
        for (std::size_t k = 0; k < s.features.cols(); ++k) row[k] += s.features(r, k);
      }
      row.back() = 1.0;
      x.push_back(row);
      y.push_back(s.label == sc::Label::kNo ? 1 : 0);
    }
  };
  std::vector<std::vector<double>> x_train, x_test;
  std::vector<int> y_train, y_test;
  pooled(21, x_train, y_train);
  pooled(22, x_test, y_test);
  std::vector<std::vector<double>> targets;
  for (int y : y_train) targets.push_back({y ? 1.0 : -1.0});
  const auto w = ridge(x_train, targets, 1e-3);
  int correct = 0;
  for (std::size_t n = 0; n < x_test.size(); ++n) {
    double v = 0.0;
    for (std::size_t i = 0; i < x_test[n].size(); ++i) v += x_test[n][i] * w[i][0];
    correct += (v > 0.0) == (y_test[n] == 1);
  }
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(x_test.size()), 0.95);
}
