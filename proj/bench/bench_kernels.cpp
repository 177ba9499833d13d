#include <benchmark/benchmark.h>

#include "chfh/dct.hpp"
#include "chfh/kernels.hpp"
#include "chfh/random.hpp"
#include "chfh/stepper.hpp"

namespace {

using namespace chfh;

struct Fixture {
    explicit Fixture(int n)
        : grid(make_grid(n, n, 1.0, 1.0)),
          f(band_limited_field(grid, {3, 8, 0.5, 1.0, true})),
          b(MobilitySpec::polynomial({1.0, 0.5}, 0.5, 1.5).faces(f)),
          out(grid.size())
    {
    }
    Grid grid;
    ScalarField f;
    FaceCoeffs b;
    std::vector<double> out;
};

template <bool Serial>
void BM_laplacian(benchmark::State& state)
{
    Fixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        if constexpr (Serial)
            kernels::serial::laplacian(fx.grid, fx.f.values(), fx.out);
        else
            kernels::laplacian(fx.grid, fx.f.values(), fx.out);
        benchmark::DoNotOptimize(fx.out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(fx.grid.size()));
}

template <bool Serial>
void BM_div_b_grad(benchmark::State& state)
{
    Fixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        if constexpr (Serial)
            kernels::serial::div_b_grad(fx.grid, fx.b.x, fx.b.y, fx.f.values(), fx.out);
        else
            kernels::div_b_grad(fx.grid, fx.b.x, fx.b.y, fx.f.values(), fx.out);
        benchmark::DoNotOptimize(fx.out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(fx.grid.size()));
}

template <bool Serial>
void BM_weighted_grad_sq(benchmark::State& state)
{
    Fixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        double v = Serial ? kernels::serial::weighted_grad_sq(fx.grid, fx.b.x, fx.b.y, fx.f.values())
                          : kernels::weighted_grad_sq(fx.grid, fx.b.x, fx.b.y, fx.f.values());
        benchmark::DoNotOptimize(v);
    }
}

template <bool Serial>
void BM_dot(benchmark::State& state)
{
    Fixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        double v = Serial ? kernels::serial::dot(fx.f.values(), fx.f.values())
                          : kernels::dot(fx.f.values(), fx.f.values());
        benchmark::DoNotOptimize(v);
    }
}

void BM_fftw_dct(benchmark::State& state)
{
    Fixture fx(static_cast<int>(state.range(0)));
    const auto t = CosineTransform::for_grid(fx.grid);
    for (auto _ : state) {
        t->forward(fx.f.values(), fx.out);
        benchmark::DoNotOptimize(fx.out.data());
    }
}

void BM_direct_dct(benchmark::State& state)
{
    Fixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        kernels::serial::dct2(fx.grid, fx.f.values(), fx.out);
        benchmark::DoNotOptimize(fx.out.data());
    }
}

void BM_step(benchmark::State& state)
{
    const Grid g = make_grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1.0, 1.0);
    const PotentialParams p{1.0, 2.0};
    const MobilitySpec spec = MobilitySpec::polynomial({1.0, 0.5}, 0.5, 1.5);
    const SimState s0 = make_state(spinodal_datum(g, 1), p);
    StepperConfig cfg;
    cfg.dt = 1e-4;
    for (auto _ : state) {
        SimState s1 = step(s0, cfg, p, spec);
        benchmark::DoNotOptimize(s1.phi.data().data());
    }
}

} // namespace

BENCHMARK(BM_laplacian<true>)->Name("laplacian/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_laplacian<false>)->Name("laplacian/omp")->Arg(128)->Arg(512);
BENCHMARK(BM_div_b_grad<true>)->Name("div_b_grad/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_div_b_grad<false>)->Name("div_b_grad/omp")->Arg(128)->Arg(512);
BENCHMARK(BM_weighted_grad_sq<true>)->Name("weighted_grad_sq/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_weighted_grad_sq<false>)->Name("weighted_grad_sq/omp")->Arg(128)->Arg(512);
BENCHMARK(BM_dot<true>)->Name("dot/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_dot<false>)->Name("dot/omp")->Arg(128)->Arg(512);
BENCHMARK(BM_fftw_dct)->Name("dct/fftw")->Arg(64)->Arg(128);
BENCHMARK(BM_direct_dct)->Name("dct/direct")->Arg(64)->Arg(128);
BENCHMARK(BM_step)->Name("step/spinodal")->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
