// Microbenchmarks for the hot paths: forward stepping, G assembly per
// kernel, and one objective gradient evaluation.
#include <benchmark/benchmark.h>

#include <memory>

#include "oedpath/objective.hpp"

using namespace oed;

namespace {

std::shared_ptr<const StateEnsemble> bench_ensemble() {
    static std::shared_ptr<const StateEnsemble> ens = [] {
        const Grid2D g = Grid2D::unit_square(65, 65);
        const VelocityField vel = builtin_velocity(g, BuiltinVelocity::double_gyre, 0.6);
        ForwardOptions opt;
        opt.T = 5.0;
        opt.ds = 2e-2;
        opt.warn_peclet = false;
        return std::make_shared<const StateEnsemble>(
            build_ensemble(vel, two_source_basis({0.1, 0.9}, {0.7, 0.1}), opt));
    }();
    return ens;
}

DesignProblem bench_problem(MeasurementKernel kernel, int n_t) {
    DesignProblem p;
    p.ensemble = bench_ensemble();
    p.kernel = kernel;
    p.n_t = n_t;
    p.dt = 5.0 / (n_t - 1);
    p.noise = build_noise_precision(n_t, p.dt);
    p.prior = GaussianPrior::identity(2);
    p.obstacles = ObstacleSet::for_domain(p.ensemble->grid, 0.02);
    p.start = {0.2, 0.6};
    return p;
}

ControlVector bench_controls(int n_t) {
    return ControlVector::constant({0.2, 0.6}, 0.9, 0.1, 0.3, n_t - 1, true);
}

void BM_forward_solve(benchmark::State& state) {
    const Grid2D g = Grid2D::unit_square(static_cast<int>(state.range(0)),
                                         static_cast<int>(state.range(0)));
    const VelocityField vel = builtin_velocity(g, BuiltinVelocity::double_gyre, 0.6);
    std::vector<double> u0(g.num_nodes(), 0.0);
    u0[g.node(g.nx / 2, g.ny / 2)] = 1.0;
    ForwardOptions opt;
    opt.T = 1.0;
    opt.ds = 1e-2;
    opt.warn_peclet = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_forward(vel, u0, opt));
    }
}
BENCHMARK(BM_forward_solve)->Arg(33)->Arg(65);

void BM_assemble_G(benchmark::State& state) {
    MeasurementKernel kernel;
    switch (state.range(0)) {
        case 0: kernel = MeasurementKernel::pointwise(); break;
        case 1: kernel = MeasurementKernel::gaussian(0.05); break;
        default: kernel = MeasurementKernel::uniform_ball(0.015); break;
    }
    const DesignProblem p = bench_problem(kernel, 501);
    const SensorPath path = rollout(bench_controls(501), 501, p.dt);
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_G(*p.ensemble, p.kernel, path));
    }
}
BENCHMARK(BM_assemble_G)->Arg(0)->Arg(1)->Arg(2);

void BM_objective_gradient(benchmark::State& state) {
    const DesignProblem p = bench_problem(MeasurementKernel::pointwise(), 501);
    const ControlVector c = bench_controls(501);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gradient(p, c));
    }
}
BENCHMARK(BM_objective_gradient);

}  // namespace

BENCHMARK_MAIN();
