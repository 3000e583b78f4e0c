// Serial reference kernels against their OpenMP counterparts.
//
//   ./bench_kernels --benchmark_filter=Denoise
//
// Set OMP_NUM_THREADS to choose the team size of the omp variants.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vidprnu/denoise.hpp"
#include "vidprnu/fingerprint.hpp"
#include "vidprnu/kernels.hpp"
#include "vidprnu/similarity.hpp"

namespace {

using vidprnu::kernels::Backend;

vidprnu::LumaFrame random_frame(std::size_t w, std::size_t h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pixel(0, 255);
  vidprnu::LumaFrame f(w, h);
  for (auto& v : f.values()) v = static_cast<std::uint8_t>(pixel(rng));
  return f;
}

void BM_Denoise(benchmark::State& state, Backend backend) {
  const auto frame = random_frame(640, 480, 1);
  const vidprnu::WaveletWienerDenoiser denoiser({}, backend);
  for (auto _ : state) benchmark::DoNotOptimize(denoiser.denoise(frame));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frame.size()));
}

void BM_Aggregate(benchmark::State& state, Backend backend) {
  const std::size_t w = 1280, h = 720;
  const auto frame = random_frame(w, h, 2);
  vidprnu::NoiseResidual residual(w, h);
  std::mt19937 rng(3);
  std::normal_distribution<float> gauss(0.0f, 2.0f);
  for (auto& v : residual.values()) v = gauss(rng);
  vidprnu::FrameMask mask(w, h, 1);
  for (auto _ : state) {
    vidprnu::FingerprintAccumulator acc(w, h, backend);
    for (int i = 0; i < 8; ++i) acc.add(frame, residual, mask);
    benchmark::DoNotOptimize(acc.finish());
  }
}

void BM_Gram(benchmark::State& state, Backend backend) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<vidprnu::Fingerprint> fps(n);
  std::mt19937 rng(4);
  std::normal_distribution<float> gauss;
  for (std::size_t i = 0; i < n; ++i) {
    fps[i].values = vidprnu::Plane<float>(320, 240);
    for (auto& v : fps[i].values.values()) v = gauss(rng);
    fps[i].meta.video_id = std::to_string(i);
  }
  for (auto _ : state) benchmark::DoNotOptimize(vidprnu::build_matrix(fps, backend));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Denoise, serial, Backend::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Denoise, omp, Backend::OpenMP)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Aggregate, serial, Backend::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Aggregate, omp, Backend::OpenMP)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Gram, serial, Backend::Serial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Gram, omp, Backend::OpenMP)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
