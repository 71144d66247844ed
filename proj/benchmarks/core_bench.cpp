#include <benchmark/benchmark.h>

#include "tnp/metrics.hpp"
#include "tnp/noise.hpp"
#include "tnp/purify.hpp"
#include "tnp/putt.hpp"
#include "tnp/qtt_image.hpp"
#include "tnp/synthetic.hpp"
#include "tnp/tensor_train.hpp"

namespace {

using namespace tnp;

TTFormat random_qtt(int d, std::size_t rank) {
  return init_cores(d, rank, matched_init_scale(qtt_rank_bounds(d, rank), 4, 0.3), 1);
}

void BM_TtContract(benchmark::State& state) {
  const TTFormat tt = random_qtt(static_cast<int>(state.range(0)), 32);
  for (auto _ : state) benchmark::DoNotOptimize(tt_contract(tt));
}
BENCHMARK(BM_TtContract)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_MseCoreGradients(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const TTFormat tt = random_qtt(d, 32);
  const DenseTensor residual = quantize(smooth_synthetic_image(std::size_t{1} << d, 2)).tensor;
  for (auto _ : state) benchmark::DoNotOptimize(mse_core_gradients(tt, residual));
}
BENCHMARK(BM_MseCoreGradients)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_TtSvd(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const DenseTensor x = quantize(smooth_synthetic_image(std::size_t{1} << d, 3)).tensor;
  for (auto _ : state) benchmark::DoNotOptimize(tt_svd(x, 64, 1e-8));
}
BENCHMARK(BM_TtSvd)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Prolong(benchmark::State& state) {
  const TTFormat tt = random_qtt(static_cast<int>(state.range(0)), 64);
  for (auto _ : state) benchmark::DoNotOptimize(prolong_image(tt, 64, 0.0));
}
BENCHMARK(BM_Prolong)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_SsimGrad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ImageGrid x = smooth_synthetic_image(n, 4), y = smooth_synthetic_image(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(ssim_grad(x, y));
}
BENCHMARK(BM_SsimGrad)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PuttFit64(benchmark::State& state) {
  const ImageGrid img = smooth_synthetic_image(64, 6);
  FitConfig c;
  c.D = 6;
  c.max_rank = 16;
  for (auto _ : state) benchmark::DoNotOptimize(putt_fit(img, c));
}
BENCHMARK(BM_PuttFit64)->Unit(benchmark::kMillisecond);

void BM_Purify64(benchmark::State& state) {
  const ImageGrid clean = smooth_synthetic_image(64, 7);
  NoiseSpec spec;
  spec.kind = NoiseKind::kStructured;
  const ImageGrid adv = add_clamped(clean, gen_noise(spec, 64, 64));
  PurifyConfig c;
  c.D = 6;
  c.max_rank = 16;
  for (auto _ : state) benchmark::DoNotOptimize(tnp_purify(adv, c));
}
BENCHMARK(BM_Purify64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
