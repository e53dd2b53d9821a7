#include <benchmark/benchmark.h>

#include <cmath>

#include "flatgs/groundstate.hpp"
#include "flatgs/parabolic.hpp"
#include "flatgs/tridiagonal.hpp"

using namespace flatgs;

namespace {

ProblemParams params(double a, double b, double lam, int N, DomainSpec d) {
    ProblemParams p;
    p.exponents = ExponentPair::make(a, b);
    p.lambda = lam;
    p.dimension = N;
    p.domain = d;
    return p;
}

void BM_StepperAdvance(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ProblemParams p = params(0.5, 0.75, 2.0, 1, Interval{0.0, M_PI});
    const auto grid = build_grid(p.domain, n);
    const Stepper s(p, grid, 1e-4, 4);
    const Field u0 = sample(grid, [](double x) { return std::sin(x); });
    std::vector<double> u = u0.values;
    for (auto _ : state) {
        s.advance(u);
        benchmark::DoNotOptimize(u.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StepperAdvance)->Arg(257)->Arg(1025)->Arg(4097);

void BM_FlatShot(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const ProblemParams p = params(0.5, 0.75, 2.0, N, N == 1 ? DomainSpec{Interval{-100.0, 100.0}} : DomainSpec{Ball{N, 100.0}});
    for (auto _ : state) benchmark::DoNotOptimize(flat_shot(p).amplitude);
}
BENCHMARK(BM_FlatShot)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Functionals(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ProblemParams p = params(0.5, 0.75, 2.0, 3, Ball{3, 1.0});
    const Field u = sample(build_grid(p.domain, n), [](double r) { return 1.0 - r * r; });
    for (auto _ : state) benchmark::DoNotOptimize(functionals(u, p).E);
}
BENCHMARK(BM_Functionals)->Arg(1025)->Arg(4097);

void BM_TridiagonalSolve(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const TridiagonalSolver s(std::vector<double>(n, -1.0), std::vector<double>(n, 4.0), std::vector<double>(n, -1.0));
    std::vector<double> rhs(n, 1.0);
    for (auto _ : state) {
        s.solve_in_place(rhs.data());
        benchmark::DoNotOptimize(rhs.data());
    }
}
BENCHMARK(BM_TridiagonalSolve)->Arg(1025)->Arg(16385);

}  // namespace

BENCHMARK_MAIN();
