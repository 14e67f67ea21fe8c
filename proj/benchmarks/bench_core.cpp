#include "heatgate/gates.hpp"

#include <benchmark/benchmark.h>

using namespace heatgate;

namespace {

struct Problem {
    GateSpec spec = build_and_dirichlet();
    GridMesh mesh{spec.nx, spec.ny};
    OptParams params = gate_params(spec);
    BoundaryConditionSet bcs = encode_inputs(spec, true, true);
    std::vector<double> rho = initial_density(mesh, params).rho;
};

void BM_Assemble(benchmark::State& state) {
    const Problem p;
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble(p.mesh, p.rho, p.params.conductivity, p.bcs));
    }
}
BENCHMARK(BM_Assemble)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
    const Problem p;
    const auto system = assemble(p.mesh, p.rho, p.params.conductivity, p.bcs);
    SolveOptions options;
    options.preconditioner = static_cast<Preconditioner>(state.range(0));
    for (auto _ : state) {
        const auto sol = solve(system, options);
        state.counters["cg_iterations"] = sol.stats.iterations;
    }
    state.SetLabel(std::string(to_string(options.preconditioner)));
}
BENCHMARK(BM_Solve)
    ->Arg(static_cast<int>(Preconditioner::multigrid))
    ->Arg(static_cast<int>(Preconditioner::jacobi))
    ->Unit(benchmark::kMillisecond);

void BM_Step(benchmark::State& state) {
    const Problem p;
    const auto start = initial_density(p.mesh, p.params);
    for (auto _ : state) {
        benchmark::DoNotOptimize(step(start, p.mesh, p.bcs, p.params));
    }
}
BENCHMARK(BM_Step)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
