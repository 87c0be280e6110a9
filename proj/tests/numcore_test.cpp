#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "tapverify/error.hpp"
#include "tapverify/numcore/attention.hpp"
#include "tapverify/numcore/flops.hpp"
#include "tapverify/numcore/kernels.hpp"
#include "tapverify/numcore/meter_context.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/numcore/tensor.hpp"

namespace tv = tapverify;
using tv::numcore::MeterContext;
using tv::numcore::Precision;
using tv::numcore::Rng;
using tv::numcore::Tensor;

namespace {

Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor out({a.rows(), b.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

Tensor naive_layer_norm(const Tensor& x, const Tensor& g, const Tensor& b) {
  Tensor out(x.shape());
  const std::size_t n = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 0; c < n; ++c) mean += x(r, c);
    mean /= static_cast<double>(n);
    for (std::size_t c = 0; c < n; ++c) var += (x(r, c) - mean) * (x(r, c) - mean);
    var /= static_cast<double>(n);
    for (std::size_t c = 0; c < n; ++c) {
      out(r, c) = (x(r, c) - mean) / std::sqrt(var + 1e-5) * g[c] + b[c];
    }
  }
  return out;
}

double naive_gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

// Straight transcription of the pre-norm block for comparison.
Tensor reference_block(const Tensor& x, const tv::numcore::BlockParams& p) {
  const std::size_t t = x.rows(), d = x.cols();
  const Tensor n1 = naive_layer_norm(x, p.ln1_gamma, p.ln1_beta);
  const Tensor q = naive_matmul(n1, p.w_q), k = naive_matmul(n1, p.w_k),
               v = naive_matmul(n1, p.w_v);
  Tensor probs({t, t});
  for (std::size_t i = 0; i < t; ++i) {
    std::vector<double> s(t);
    double mx = -1e300;
    for (std::size_t j = 0; j < t; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += q(i, c) * k(j, c);
      s[j] = dot / std::sqrt(static_cast<double>(d));
      mx = std::max(mx, s[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < t; ++j) z += std::exp(s[j] - mx);
    for (std::size_t j = 0; j < t; ++j) probs(i, j) = std::exp(s[j] - mx) / z;
  }
  const Tensor attn = naive_matmul(naive_matmul(probs, v), p.w_o);
  Tensor x1(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) x1[i] = x[i] + attn[i];
  const Tensor n2 = naive_layer_norm(x1, p.ln2_gamma, p.ln2_beta);
  Tensor up = naive_matmul(n2, p.w_up);
  for (std::size_t r = 0; r < up.rows(); ++r)
    for (std::size_t c = 0; c < up.cols(); ++c) up(r, c) = naive_gelu(up(r, c) + p.b_up[c]);
  const Tensor down = naive_matmul(up, p.w_down);
  Tensor out(x.shape());
  for (std::size_t r = 0; r < t; ++r)
    for (std::size_t c = 0; c < d; ++c) out(r, c) = x1(r, c) + down(r, c) + p.b_down[c];
  return out;
}

}  // namespace

TEST(Matmul, MatchesNaiveTripleLoop) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.below(9), k = 1 + rng.below(9), n = 1 + rng.below(9);
    const Tensor a = rng.normal_tensor({m, k}, 1.0), b = rng.normal_tensor({k, n}, 1.0);
    MeterContext ctx;
    EXPECT_LT(tv::numcore::max_abs_diff(tv::numcore::matmul(a, b, ctx), naive_matmul(a, b)),
              1e-12);
    EXPECT_EQ(ctx.flops(), 2 * m * k * n);
  }
}

TEST(Matmul, TransposedVariantsAgree) {
  Rng rng(2);
  const Tensor a = rng.normal_tensor({5, 3}, 1.0), b = rng.normal_tensor({5, 4}, 1.0);
  MeterContext ctx;
  const Tensor at = tv::numcore::transpose(a, ctx);
  EXPECT_LT(tv::numcore::max_abs_diff(tv::numcore::matmul_tn(a, b, ctx), naive_matmul(at, b)),
            1e-12);
  const Tensor c = rng.normal_tensor({4, 3}, 1.0);
  const Tensor ct = tv::numcore::transpose(c, ctx);
  EXPECT_LT(tv::numcore::max_abs_diff(tv::numcore::matmul_nt(a, c, ctx), naive_matmul(a, ct)),
            1e-12);
}

TEST(Matmul, RejectsMismatchedInnerDimension) {
  MeterContext ctx;
  EXPECT_THROW(tv::numcore::matmul(Tensor({2, 3}), Tensor({4, 2}), ctx), tv::ShapeError);
}

TEST(Kernels, LayerNormMatchesReference) {
  Rng rng(3);
  const Tensor x = rng.normal_tensor({6, 10}, 2.0);
  const Tensor g = rng.normal_tensor({10}, 1.0), b = rng.normal_tensor({10}, 1.0);
  MeterContext ctx;
  EXPECT_LT(tv::numcore::max_abs_diff(tv::numcore::layer_norm(x, g, b, ctx),
                                      naive_layer_norm(x, g, b)),
            1e-12);
  EXPECT_EQ(ctx.flops(), 8u * 60u);
}

TEST(Kernels, GeluUsesErfForm) {
  for (double x : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
    EXPECT_NEAR(tv::numcore::gelu_scalar(x), naive_gelu(x), 1e-15);
  }
  EXPECT_NEAR(tv::numcore::gelu_scalar(1.0), 0.8413447460685429, 1e-15);
}

TEST(Kernels, GeluDerivativeMatchesDifferences) {
  for (double x : {-2.0, -0.3, 0.0, 0.4, 1.7}) {
    const double h = 1e-6;
    const double fd = (naive_gelu(x + h) - naive_gelu(x - h)) / (2 * h);
    EXPECT_NEAR(tv::numcore::gelu_derivative(x), fd, 1e-8);
  }
}

TEST(Kernels, SoftmaxRowsSumToOneAndSurviveLargeLogits) {
  MeterContext ctx;
  const Tensor x = Tensor::matrix({{1000.0, 1001.0, 999.0}, {-5.0, 0.0, 5.0}});
  const Tensor p = tv::numcore::softmax_rows(x, ctx);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_NEAR(p(r, 0) + p(r, 1) + p(r, 2), 1.0, 1e-15);
  }
  EXPECT_GT(p(0, 1), p(0, 0));
  EXPECT_EQ(ctx.flops(), 5u * 6u);
}

TEST(Kernels, NonFiniteOutputThrows) {
  MeterContext ctx;
  const Tensor a = Tensor::matrix({{1e308}}), b = Tensor::matrix({{10.0}});
  EXPECT_THROW(tv::numcore::matmul(a, b, ctx), tv::NumericError);
}

TEST(Kernels, Float32ModeRoundsOutputs) {
  MeterContext ctx(Precision::kFloat32);
  const Tensor a = Tensor::matrix({{1.0 / 3.0}}), b = Tensor::matrix({{1.0}});
  const Tensor c = tv::numcore::matmul(a, b, ctx);
  EXPECT_EQ(c[0], static_cast<double>(static_cast<float>(1.0 / 3.0)));
  EXPECT_EQ(tv::numcore::bytes_per_scalar(Precision::kFloat32), 4u);
}

TEST(AttentionBlock, MatchesReferenceImplementation) {
  Rng rng(4);
  const auto params = tv::numcore::BlockParams::random(12, 24, 1.0, rng);
  const Tensor x = rng.normal_tensor({7, 12}, 1.0);
  MeterContext ctx;
  EXPECT_LT(tv::numcore::max_abs_diff(tv::numcore::attention_block(x, params, ctx),
                                      reference_block(x, params)),
            1e-11);
}

TEST(AttentionBlock, IdentityParamsPassInputThrough) {
  Rng rng(5);
  const auto params = tv::numcore::BlockParams::identity(8, 16);
  const Tensor x = rng.normal_tensor({4, 8}, 1.0);
  MeterContext ctx;
  EXPECT_LT(tv::numcore::max_abs_diff(tv::numcore::attention_block(x, params, ctx), x), 1e-15);
}

TEST(AttentionBlock, FlopsMatchFrozenCount) {
  // Hand-summed over the block's kernels for T=16, d=32, m=128.
  constexpr std::uint64_t kFrozen = 455680;
  EXPECT_EQ(tv::numcore::flops_for(tv::numcore::AttentionBlockOp{16, 32, 128}), kFrozen);
  Rng rng(6);
  const auto params = tv::numcore::BlockParams::random(32, 128, 1.0, rng);
  const Tensor x = rng.normal_tensor({16, 32}, 1.0);
  MeterContext ctx;
  tv::numcore::attention_block(x, params, ctx);
  EXPECT_EQ(ctx.flops(), kFrozen);
}

TEST(AttentionBlock, RejectsWidthMismatch) {
  Rng rng(7);
  const auto params = tv::numcore::BlockParams::random(8, 16, 1.0, rng);
  MeterContext ctx;
  EXPECT_THROW(tv::numcore::attention_block(Tensor({3, 6}), params, ctx), tv::ShapeError);
}

TEST(Flops, DescriptorsFromNames) {
  const std::vector<std::uint64_t> mm{8, 4, 8};
  EXPECT_EQ(tv::numcore::flops_for(tv::numcore::make_descriptor("matmul", mm)), 512u);
  const std::vector<std::uint64_t> lin{2, 3, 4};
  EXPECT_EQ(tv::numcore::flops_for(tv::numcore::make_descriptor("linear", lin)), 56u);
  EXPECT_THROW(tv::numcore::make_descriptor("conv", mm), tv::InvalidArgument);
  EXPECT_THROW(tv::numcore::make_descriptor("gelu", mm), tv::InvalidArgument);
}

TEST(MeterContext, TracksPeakAndReleases) {
  MeterContext ctx;
  {
    Tensor a({10, 10});
    ctx.track(a);
    EXPECT_EQ(ctx.bytes_live(), 800u);
    {
      Tensor b({5});
      ctx.track(b);
      EXPECT_EQ(ctx.bytes_peak(), 840u);
    }
    EXPECT_EQ(ctx.bytes_live(), 800u);
  }
  EXPECT_EQ(ctx.bytes_live(), 0u);
  EXPECT_EQ(ctx.bytes_peak(), 840u);
  ctx.reset_peak();
  EXPECT_EQ(ctx.bytes_peak(), 0u);
}

TEST(MeterContext, DisabledRecordsNothing) {
  MeterContext ctx = MeterContext::disabled();
  Rng rng(8);
  const Tensor a = rng.normal_tensor({3, 3}, 1.0);
  tv::numcore::matmul(a, a, ctx);
  EXPECT_EQ(ctx.flops(), 0u);
  EXPECT_EQ(ctx.bytes_peak(), 0u);
}

TEST(Random, DeterministicAndKeyed) {
  Rng a(42), b(42), c(43);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(Rng(42).next_u64(), c.next_u64());
  EXPECT_NE(tv::numcore::derive_seed({1, 2}), tv::numcore::derive_seed({2, 1}));
  EXPECT_EQ(tv::numcore::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(tv::numcore::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Random, UniformBelowIsUnbiased) {
  // Chi-square over 10 bins, 9 dof; 27.88 is the 0.999 quantile.
  Rng rng(9);
  std::vector<int> bins(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++bins[rng.below(10)];
  double chi2 = 0.0;
  for (int c : bins) chi2 += (c - n / 10.0) * (c - n / 10.0) / (n / 10.0);
  EXPECT_LT(chi2, 27.88);
}

TEST(Random, NormalMoments) {
  Rng rng(10);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Tensor, ShapeChecks) {
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0}), tv::ShapeError);
  const Tensor t = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.reshaped({3, 2})(2, 1), 6.0);
  EXPECT_THROW(t.reshaped({4, 2}), tv::ShapeError);
}
