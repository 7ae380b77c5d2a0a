// Serial reference vs OpenMP for the (mass, seed) ensemble kernel.

#include "fallingballs/ensemble.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

using namespace fallingballs;

namespace {

ScanRequest request(std::size_t seeds) {
    ScanRequest r;
    r.masses = {MassVector({2, 1}), MassVector({3, 2, 1}), MassVector({4, 3, 2, 1})};
    for (std::size_t k = 0; k < seeds; ++k) r.seeds.push_back(k + 1);
    r.spectrum_events = 20000;
    r.onset_events = 2000;
    return r;
}

void scan(benchmark::State& state, Execution mode) {
    const auto req = request(static_cast<std::size_t>(state.range(0)));
    const int jobs = mode == Execution::serial ? 1 : omp_get_max_threads();
    for (auto _ : state) benchmark::DoNotOptimize(run_scan(req, {mode, jobs}));
    state.counters["cells"] = static_cast<double>(req.masses.size() * req.seeds.size());
    state.counters["threads"] = jobs;
    state.SetItemsProcessed(state.iterations() * static_cast<long>(req.masses.size() * req.seeds.size()));
}

void BM_ScanSerial(benchmark::State& state) { scan(state, Execution::serial); }
void BM_ScanParallel(benchmark::State& state) { scan(state, Execution::parallel); }

} // namespace

BENCHMARK(BM_ScanSerial)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ScanParallel)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
