#include <benchmark/benchmark.h>

#include "wae/autoencoder.hpp"
#include "wae/baselines.hpp"
#include "wae/corpus_gen.hpp"
#include "wae/nn.hpp"
#include "wae/search_index.hpp"
#include "wae/wirifier.hpp"

namespace {

using namespace wae;

nn::Tensor<float> random_tensor(std::vector<int> shape, std::uint64_t seed) {
  nn::Tensor<float> t(std::move(shape));
  SplitMix64 rng(seed);
  for (auto& v : t.storage()) v = static_cast<float>(rng.uniform() * 2 - 1);
  return t;
}

// The first encoder layer at the default raster, batch of 16.
void BM_Conv2d(benchmark::State& state) {
  const int co = static_cast<int>(state.range(0));
  auto x = random_tensor({16, 3, 64, 48}, 1);
  auto k = random_tensor({co, 3, 3, 3}, 2);
  auto b = random_tensor({co}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(x, k, b));
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_Conv2d)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  auto x = random_tensor({16, 16, 32, 24}, 1);
  auto k = random_tensor({32, 16, 3, 3}, 2);
  auto b = random_tensor({32}, 3);
  auto g = random_tensor({16, 32, 32, 24}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d_backward(x, k, g));
}
BENCHMARK(BM_Conv2dBackward)->Unit(benchmark::kMillisecond);

void BM_Encode(benchmark::State& state) {
  WaeModel model{WaeConfig{}};
  const auto screen = generate_screen(5, TemplateKind::kList);
  for (auto _ : state) benchmark::DoNotOptimize(model.encode(screen));
}
BENCHMARK(BM_Encode)->Unit(benchmark::kMillisecond);

void BM_Knn(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int dim = 192;
  LatentIndex index(dim, {});
  SplitMix64 rng(9);
  std::vector<float> v(dim);
  for (int i = 0; i < n; ++i) {
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    index.add("s" + std::to_string(i), v);
  }
  for (auto _ : state) benchmark::DoNotOptimize(index.knn(v, 10));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Knn)->Arg(500)->Arg(5000)->Arg(50000)->Unit(benchmark::kMicrosecond);

void BM_Hungarian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(3);
  std::vector<std::int64_t> w(static_cast<std::size_t>(n) * n);
  for (auto& x : w) x = static_cast<std::int64_t>(rng.below(5));
  for (auto _ : state) benchmark::DoNotOptimize(max_weight_matching(w, n, n));
}
BENCHMARK(BM_Hungarian)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_GuiFetchSimilarity(benchmark::State& state) {
  const auto a = generate_screen(1, TemplateKind::kForm);
  const auto b = generate_screen(2, TemplateKind::kForm);
  for (auto _ : state) benchmark::DoNotOptimize(guifetch_similarity(a, b));
}
BENCHMARK(BM_GuiFetchSimilarity)->Unit(benchmark::kMicrosecond);

void BM_Render(benchmark::State& state) {
  const auto mode = static_cast<RepresentationMode>(state.range(0));
  const auto screen = generate_screen(4, TemplateKind::kGrid);
  for (auto _ : state) benchmark::DoNotOptimize(render(screen, mode, {48, 64}));
}
BENCHMARK(BM_Render)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_HistogramFeature(benchmark::State& state) {
  const auto img = render(generate_screen(4, TemplateKind::kGrid), RepresentationMode::kColor, {360, 640});
  for (auto _ : state) benchmark::DoNotOptimize(histogram_feature(img));
}
BENCHMARK(BM_HistogramFeature)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
