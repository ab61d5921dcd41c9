// Serial against OpenMP realization loops on the same workloads.

#include <benchmark/benchmark.h>

#include "rydberg/montecarlo.hpp"

using namespace rydberg;

namespace {

ExperimentPlan ramsey_plan(bool parallel) {
    ExperimentPlan p;
    p.kind = PlanKind::Ramsey;
    p.sweep = default_sweep(PlanKind::Ramsey);
    p.realizations = 8;
    p.shots = 100;
    p.toggles = ErrorToggles::all_off();
    p.toggles.lightshift = p.toggles.jitter = p.toggles.pulses = p.toggles.readout = true;
    p.parallel = parallel;
    return p;
}

ExperimentPlan adiabatic_plan(bool parallel) {
    ExperimentPlan p;
    p.kind = PlanKind::Adiabatic;
    p.pattern = 1;
    p.sweep = {1.0, 2.0, 3.0};
    p.realizations = 4;
    p.shots = 100;
    p.toggles.lifetime = p.toggles.depumping = false;
    p.parallel = parallel;
    return p;
}

void BM_Ramsey(benchmark::State& state) {
    const ExperimentPlan p = ramsey_plan(state.range(0) != 0);
    for (auto _ : state) benchmark::DoNotOptimize(run_plan(p));
    state.SetLabel(p.parallel ? "parallel" : "serial");
}

void BM_Adiabatic(benchmark::State& state) {
    const ExperimentPlan p = adiabatic_plan(state.range(0) != 0);
    for (auto _ : state) benchmark::DoNotOptimize(adiabatic_experiment(p));
    state.SetLabel(p.parallel ? "parallel" : "serial");
}

// Bare loop overhead with a fixed amount of arithmetic per realization.
void BM_Loop(benchmark::State& state) {
    const bool parallel = state.range(0) != 0;
    auto work = [](int r) {
        double s = r;
        for (int k = 0; k < 20000; ++k) s = s * 0.999999 + 1e-6 * k;
        return s;
    };
    for (auto _ : state) benchmark::DoNotOptimize(realize(256, parallel, work));
    state.SetLabel(parallel ? "parallel" : "serial");
}

} // namespace

BENCHMARK(BM_Ramsey)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Adiabatic)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Loop)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
