// Chunked querying and decoder layout microbenchmarks on a small model.

#include <benchmark/benchmark.h>

#include "lte/model.hpp"
#include "lte/rng.hpp"

namespace {

lte::ModelConfig bench_config() {
  lte::ModelConfig c;
  c.encoder.width = 16;
  c.encoder.n_resblocks = 2;
  c.lte.K = 16;
  c.decoder_hidden = 64;
  return c;
}

lte::Tensor bench_input(int h, int w) {
  lte::Rng rng(1);
  std::vector<float> v(static_cast<std::size_t>(3 * h * w));
  for (float& x : v) x = static_cast<float>(rng.uniform(-0.5, 0.5));
  return lte::Tensor::from_vector({3, h, w}, v);
}

// Arg: chunk size; 0 means every query in one launch.
void BM_ChunkedQuery(benchmark::State& state) {
  const lte::SrModel model(bench_config(), 7);
  const lte::Tensor lr = bench_input(48, 48);
  const std::int64_t chunk = state.range(0) == 0 ? 96 * 96 : state.range(0);
  std::int64_t peak = 0;
  for (auto _ : state) {
    const lte::SrOutput out = lte::sr_forward_chunked(model, lr, 96, 96, chunk);
    peak = out.stats.query_peak_bytes;
    benchmark::DoNotOptimize(out.image.data().data());
  }
  state.counters["peak_MiB"] = static_cast<double>(peak) / (1 << 20);
  state.SetItemsProcessed(state.iterations() * 96 * 96);
}
BENCHMARK(BM_ChunkedQuery)->Arg(64)->Arg(1024)->Arg(9216)->Arg(0)->Unit(benchmark::kMillisecond);

// Arg: 0 = mlp decoder, 1 = conv1x1 decoder.
void BM_DecoderLayout(benchmark::State& state) {
  const lte::SrModel mlp(bench_config(), 7);
  const lte::SrModel model = state.range(0) == 0 ? mlp : mlp.to_lteplus();
  const lte::Tensor lr = bench_input(48, 48);
  for (auto _ : state) {
    const lte::SrOutput out = lte::sr_forward_chunked(model, lr, 96, 96, 9216);
    benchmark::DoNotOptimize(out.image.data().data());
  }
  state.SetLabel(state.range(0) == 0 ? "mlp" : "conv1x1");
}
BENCHMARK(BM_DecoderLayout)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Forward pass with graph recording, as in a training step.
void BM_ForwardWithGraph(benchmark::State& state) {
  const lte::SrModel model(bench_config(), 7);
  const lte::Tensor lr = bench_input(24, 24);
  for (auto _ : state) {
    const lte::SrOutput out = lte::sr_forward(model, lr, 48, 48);
    benchmark::DoNotOptimize(out.image.data().data());
  }
}
BENCHMARK(BM_ForwardWithGraph)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
