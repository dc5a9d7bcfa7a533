// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <random>

#include "mlbp/descriptor.hpp"
#include "mlbp/imageprep.hpp"
#include "mlbp/serial.hpp"

namespace {

mlbp::GrayImage noise(int size) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> u(0, 255);
    std::vector<double> px(static_cast<std::size_t>(size) * size);
    for (auto& v : px) v = u(rng);
    return mlbp::GrayImage(size, size, std::move(px));
}

mlbp::NeighborhoodSpec spec_for(int neighbors) {
    return mlbp::NeighborhoodSpec(neighbors, neighbors > 8 ? 2.0 : 1.0);
}

void set_pixels(benchmark::State& state, int size) {
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size) * size);
}

void BM_SmoothSerial(benchmark::State& state) {
    const auto img = noise(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mlbp::serial::gaussian_smooth(img, 1.0, 2));
    set_pixels(state, img.width());
}

void BM_SmoothParallel(benchmark::State& state) {
    const auto img = noise(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mlbp::gaussian_smooth(img, 1.0, 2));
    set_pixels(state, img.width());
}

void BM_LabelSerial(benchmark::State& state) {
    const auto img = noise(static_cast<int>(state.range(0)));
    const auto spec = spec_for(static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(mlbp::serial::label_image(img, spec));
    set_pixels(state, img.width());
}

void BM_LabelParallel(benchmark::State& state) {
    const auto img = noise(static_cast<int>(state.range(0)));
    const auto spec = spec_for(static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(mlbp::label_image(img, spec));
    set_pixels(state, img.width());
}

void BM_HistogramSerial(benchmark::State& state) {
    const mlbp::NeighborhoodSpec spec;
    const auto labels = mlbp::label_image(noise(static_cast<int>(state.range(0))), spec);
    for (auto _ : state) benchmark::DoNotOptimize(mlbp::serial::histogram_features(labels, spec));
}

void BM_HistogramParallel(benchmark::State& state) {
    const mlbp::NeighborhoodSpec spec;
    const auto labels = mlbp::label_image(noise(static_cast<int>(state.range(0))), spec);
    for (auto _ : state) benchmark::DoNotOptimize(mlbp::histogram_features(labels, spec));
}

void BM_Extract(benchmark::State& state) {
    const auto img = noise(static_cast<int>(state.range(0)));
    const mlbp::NeighborhoodSpec spec;
    const mlbp::PreprocessConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(mlbp::extract(img, spec, cfg));
}

}  // namespace

BENCHMARK(BM_SmoothSerial)->Arg(128)->Arg(512)->Arg(2048)->UseRealTime();
BENCHMARK(BM_SmoothParallel)->Arg(128)->Arg(512)->Arg(2048)->UseRealTime();
BENCHMARK(BM_LabelSerial)->ArgsProduct({{128, 512, 2048}, {8, 16}})->UseRealTime();
BENCHMARK(BM_LabelParallel)->ArgsProduct({{128, 512, 2048}, {8, 16}})->UseRealTime();
BENCHMARK(BM_HistogramSerial)->Arg(128)->Arg(2048)->UseRealTime();
BENCHMARK(BM_HistogramParallel)->Arg(128)->Arg(2048)->UseRealTime();
BENCHMARK(BM_Extract)->Arg(128)->Arg(480)->UseRealTime();

BENCHMARK_MAIN();
