// Serial reference kernels against the OpenMP kernels: value tables and brute force.

#include <string>

#include <benchmark/benchmark.h>

#include "ncdp/dp/brute_force.hpp"
#include "ncdp/dp/solver.hpp"
#include "ncdp/io/problem_io.hpp"
#include "ncdp/market/market.hpp"

namespace {

using namespace ncdp;

dp::Problem cash(const std::string& name) {
    const auto m = market::model_from_json(io::read_json_file(std::string(NCDP_FIXTURE_DIR) + "/" + name + ".json"));
    return market::build_problem_cash(m);
}

void tables(benchmark::State& state, bool parallel) {
    const auto p = cash("sshaped_illiquid");
    dp::SolverConfig cfg;
    cfg.parallel = parallel;
    cfg.threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        dp::Solver s(p, cfg);
        s.build_tables();
        benchmark::DoNotOptimize(s.tables().size());
    }
}

void brute(benchmark::State& state, bool parallel) {
    const auto p = cash("two_asset_illiquid");
    const auto grids = dp::uniform_decision_grids(p, -2.0, 2.0, 201);
    for (auto _ : state) {
        const auto r = dp::brute_force(p, grids, parallel, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(r.value);
    }
}

void BM_TablesSerial(benchmark::State& s) { tables(s, false); }
void BM_TablesParallel(benchmark::State& s) { tables(s, true); }
void BM_BruteForceSerial(benchmark::State& s) { brute(s, false); }
void BM_BruteForceParallel(benchmark::State& s) { brute(s, true); }

}  // namespace

BENCHMARK(BM_TablesSerial)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TablesParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BruteForceSerial)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BruteForceParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
