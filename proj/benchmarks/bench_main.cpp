#include <benchmark/benchmark.h>

#include <filesystem>

#include "eon/gpsa.hpp"
#include "eon/heuristic.hpp"
#include "eon/physics.hpp"
#include "eon/rto.hpp"

namespace {

const eon::NetworkInstance& cost239() {
  static const eon::NetworkInstance inst = [] {
    const std::filesystem::path dir = EON_BENCH_DATA_DIR;
    eon::ScenarioConfig cfg;
    return eon::load_instance(dir / "cost239.topo", dir / "cost239_traffic.txt", dir / "table3.cfg", cfg);
  }();
  return inst;
}

std::vector<eon::ConnectionRequest> requests(int count) {
  return eon::select_requests(eon::partition_traffic(cost239().demands, 100.0), count, 1);
}

void BM_KernelExact(benchmark::State& state) {
  double x = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eon::physics::xci_kernel_exact(x));
    x = x < 1.2 ? x + 0.01 : 0.01;
  }
}
BENCHMARK(BM_KernelExact);

void BM_RouteSpr(benchmark::State& state) {
  const auto req = requests(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eon::rto::route_spr(cost239(), req));
}
BENCHMARK(BM_RouteSpr)->Arg(46)->Arg(180);

void BM_RouteScprr(benchmark::State& state) {
  const auto req = requests(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eon::rto::route_scprr(cost239(), req));
}
BENCHMARK(BM_RouteScprr)->Arg(16)->Arg(46)->Unit(benchmark::kMillisecond);

void BM_RelaxedSolve(benchmark::State& state) {
  const auto routing = eon::rto::route_spr(cost239(), requests(static_cast<int>(state.range(0))));
  const auto psa = eon::gpsa::make_psa_instance(cost239(), routing, eon::ScenarioConfig{});
  const auto built = eon::gpsa::build(psa, static_cast<eon::Formulation>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(eon::solve(built.program));
}
BENCHMARK(BM_RelaxedSolve)->Args({16, 1})->Args({46, 1})->Args({46, 6})->Unit(benchmark::kMillisecond);

void BM_Stage2(benchmark::State& state) {
  const auto routing = eon::rto::route_spr(cost239(), requests(static_cast<int>(state.range(0))));
  const auto psa = eon::gpsa::make_psa_instance(cost239(), routing, eon::ScenarioConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(eon::heuristic::run_stage2(psa, eon::heuristic::Stage2Options{}));
}
BENCHMARK(BM_Stage2)->Arg(16)->Arg(46)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
