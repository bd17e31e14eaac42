#include <benchmark/benchmark.h>

#include "ringsync/csma_arbiter.hpp"
#include "ringsync/metrics.hpp"
#include "ringsync/simulation.hpp"
#include "ringsync/sync_arbiter.hpp"
#include "ringsync/timing.hpp"

namespace {

using namespace ringsync;

template <class Arbiter>
void tick_loop(benchmark::State& st) {
  RingConfig c;
  c.traffic_rate = static_cast<double>(st.range(0)) / 100.0;
  RingState s = build_ring(c);
  Arbiter arb(c, s);
  for (auto _ : st) {
    generate_traffic(s, c);
    arb.step(s);
    advance(s);
  }
  st.SetItemsProcessed(st.iterations());
}

void BM_SyncTick(benchmark::State& st) { tick_loop<sync::SyncArbiter>(st); }
void BM_CsmaTick(benchmark::State& st) { tick_loop<csma::CsmaArbiter>(st); }
BENCHMARK(BM_SyncTick)->Arg(10)->Arg(50)->Arg(99);
BENCHMARK(BM_CsmaTick)->Arg(10)->Arg(50)->Arg(99);

void BM_SyncRun100k(benchmark::State& st) {
  RingConfig c;
  c.traffic_rate = 0.9;
  c.sim_length_words = 100'000;
  RunOptions o;
  o.min_delivered = 0;
  for (auto _ : st) benchmark::DoNotOptimize(run_simulation(c, Protocol::sync, o));
}
BENCHMARK(BM_SyncRun100k)->Unit(benchmark::kMillisecond);

void BM_Summarize(benchmark::State& st) {
  std::vector<metrics::WaitRecord> recs;
  for (int i = 0; i < st.range(0); ++i)
    recs.push_back({i, (i * 7919) % 5000 + 10, (i * 7919) % 5000, 0.5, Protocol::sync});
  for (auto _ : st) benchmark::DoNotOptimize(metrics::summarize(recs, metrics::WaitMetric::wait2));
}
BENCHMARK(BM_Summarize)->Arg(1500)->Arg(100000);

void BM_SkewLabWiwi(benchmark::State& st) {
  timing::ClockModel a, b;
  a.correction_mode = b.correction_mode = timing::CorrectionMode::wiwi;
  a.drift_rate = 2.5e-8;
  for (auto _ : st) benchmark::DoNotOptimize(timing::run_skew_lab(a, b, 600, 6, 1));
}
BENCHMARK(BM_SkewLabWiwi);

}  // namespace

BENCHMARK_MAIN();
