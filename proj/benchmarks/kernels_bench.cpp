#include <benchmark/benchmark.h>

#include "tapverify/numcore/attention.hpp"
#include "tapverify/numcore/kernels.hpp"
#include "tapverify/numcore/random.hpp"

namespace nc = tapverify::numcore;

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  nc::Rng rng(1);
  const auto a = rng.normal_tensor({n, n}, 1.0);
  const auto b = rng.normal_tensor({n, n}, 1.0);
  auto ctx = nc::MeterContext::disabled();
  for (auto _ : state) benchmark::DoNotOptimize(nc::matmul(a, b, ctx));
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

static void BM_AttentionBlock(benchmark::State& state) {
  const auto tokens = static_cast<std::size_t>(state.range(0));
  const std::size_t width = 64;
  nc::Rng rng(2);
  const auto params = nc::BlockParams::random(width, 2 * width, 0.5, rng);
  const auto x = rng.normal_tensor({tokens, width}, 1.0);
  auto ctx = nc::MeterContext::disabled();
  for (auto _ : state) benchmark::DoNotOptimize(nc::attention_block(x, params, ctx));
}
BENCHMARK(BM_AttentionBlock)->Arg(22)->Arg(64);

static void BM_AttentionBlockMetered(benchmark::State& state) {
  nc::Rng rng(3);
  const auto params = nc::BlockParams::random(64, 128, 0.5, rng);
  const auto x = rng.normal_tensor({22, 64}, 1.0);
  nc::MeterContext ctx;
  for (auto _ : state) benchmark::DoNotOptimize(nc::attention_block(x, params, ctx));
  state.counters["flops_per_call"] =
      static_cast<double>(ctx.flops()) / static_cast<double>(state.iterations());
}
BENCHMARK(BM_AttentionBlockMetered);
