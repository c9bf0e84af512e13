#include <benchmark/benchmark.h>

#include "ppapep/certificate.hpp"
#include "ppapep/instances.hpp"
#include "ppapep/pep.hpp"
#include "ppapep/ppa.hpp"
#include "ppapep/random.hpp"
#include "ppapep/sdp.hpp"

namespace {

ppapep::StepSchedule schedule_for(std::size_t n) {
  ppapep::Xoshiro256 rng(n);
  return ppapep::random_schedule(rng, n);
}

void BM_SolveFull(benchmark::State& state) {
  const auto inst = ppapep::build_pep(schedule_for(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(ppapep::solve(inst).objective);
}
BENCHMARK(BM_SolveFull)->Arg(2)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_SolveReduced(benchmark::State& state) {
  const auto inst = ppapep::reduce_pep(ppapep::build_pep(schedule_for(state.range(0)), 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(ppapep::solve(inst).objective);
}
BENCHMARK(BM_SolveReduced)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_BuildPep(benchmark::State& state) {
  const auto sched = schedule_for(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ppapep::build_pep(sched, 1.0));
}
BENCHMARK(BM_BuildPep)->Arg(10)->Arg(50);

void BM_Certify(benchmark::State& state) {
  const auto sched = schedule_for(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ppapep::certify(sched).all_ok());
}
BENCHMARK(BM_Certify)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMicrosecond);

void BM_RunPpa(benchmark::State& state) {
  const auto kind = ppapep::kAllFunctionKinds[state.range(0)];
  ppapep::Xoshiro256 rng(11);
  const auto inst = ppapep::random_instance(rng, kind, ppapep::MetricKind::Dense, {30, 4});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ppapep::run_ppa(inst.function, inst.schedule, inst.x0, inst.metric, inst.radius));
  }
  state.SetLabel(std::string(ppapep::to_string(kind)));
}
BENCHMARK(BM_RunPpa)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
