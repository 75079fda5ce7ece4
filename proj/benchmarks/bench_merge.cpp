// Microbenchmarks for the hot paths: queue insertion under both rule
// extremes, the misfit primitive, placement draws, and XOR combining.

#include <benchmark/benchmark.h>

#include "codedcache/merge_queue.hpp"
#include "codedcache/placement.hpp"
#include "codedcache/simulator.hpp"
#include "codedcache/wire.hpp"

using namespace codedcache;

static void BM_QueueInsert(benchmark::State& state) {
  const int K = 10;
  const unsigned tau = static_cast<unsigned>(state.range(0));
  const uint64_t cap = static_cast<uint64_t>(state.range(1));
  const EngineConfig cfg{K, tau};
  SplitMix64 rng{7};
  MergeQueue q;
  // prefill to steady state
  uint64_t i = 0;
  while (q.raw_count() < cap) {
    q.insert(sample_request(rng, K, 0.5, static_cast<Millis>(i), 0), cfg);
    ++i;
  }
  for (auto _ : state) {
    q.insert(sample_request(rng, K, 0.5, static_cast<Millis>(i), 0), cfg);
    ++i;
    while (q.raw_count() > cap) benchmark::DoNotOptimize(q.pop_head());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_QueueInsert)
    ->ArgsProduct({{0, 8}, {1000, 10000, 50000}})
    ->Unit(benchmark::kMicrosecond);

static void BM_Misfit(benchmark::State& state) {
  SplitMix64 rng{3};
  const int K = 10;
  std::vector<MergedRequest> reqs;
  for (int i = 0; i < 256; ++i) {
    reqs.push_back(lift_raw(sample_request(rng, K, 0.5, 0, 0)));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const Misfit m = misfit(reqs[i % 256], reqs[(i * 7 + 1) % 256]);
    benchmark::DoNotOptimize(m);
    ++i;
  }
}
BENCHMARK(BM_Misfit);

static void BM_PlacementDraw(benchmark::State& state) {
  SplitMix64 rng{11};
  for (auto _ : state) {
    benchmark::DoNotOptimize(placement_decision(rng.next(), 0.5));
  }
}
BENCHMARK(BM_PlacementDraw);

static void BM_XorCombine(benchmark::State& state) {
  const std::size_t symbol = static_cast<std::size_t>(state.range(0));
  SplitMix64 rng{13};
  std::vector<Bytes> blocks(4, Bytes(symbol));
  for (auto& b : blocks) {
    for (auto& byte : b) byte = static_cast<uint8_t>(rng.next());
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(xor_combine(blocks));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * 4 * symbol);
}
BENCHMARK(BM_XorCombine)->Arg(1024)->Arg(10240);

BENCHMARK_MAIN();
