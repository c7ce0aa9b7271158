#include <benchmark/benchmark.h>

#include <cmath>

#include "aphom/corrector.hpp"
#include "aphom/grid.hpp"
#include "aphom/solver.hpp"

using namespace aphom;

namespace {

coeff::CoefficientField laminate() {
    coeff::CoefficientField f;
    f.dim = 2;
    f.m = 1;
    f.mu = 1.0 / 3.0;
    f.constTerm = Tensor4(2, 1);
    f.constTerm(0, 0, 0, 0) = f.constTerm(1, 0, 1, 0) = 2.0;
    coeff::TrigMode mo;
    mo.omega = makeVec(2.0 * M_PI, 0.0);
    mo.cosAmp = Tensor4(2, 1);
    mo.cosAmp(0, 0, 0, 0) = mo.cosAmp(1, 0, 1, 0) = 1.0;
    mo.sinAmp = Tensor4(2, 1);
    f.modes.push_back(mo);
    f.periodLattice = std::vector<double>{1.0, 1.0};
    return f;
}

grid::Grid box2d(int n) {
    grid::Grid g;
    g.dim = 2;
    g.boxSide = 4.0;
    g.n = n;
    g.boundary = grid::Boundary::Periodic;
    return g;
}

}  // namespace

static void BM_CsrApply(benchmark::State& state) {
    const auto f = laminate();
    const auto g = box2d(static_cast<int>(state.range(0)));
    const solver::SparseOperator op = solver::assemble(f, g, 0.0625);
    std::vector<double> x(op.nRows, 1.0), y;
    for (auto _ : state) {
        op.apply(x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * op.nRows);
}
BENCHMARK(BM_CsrApply)->Arg(128)->Arg(256)->Arg(512);

static void BM_Assemble(benchmark::State& state) {
    const auto f = laminate();
    const auto g = box2d(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const solver::SparseOperator op = solver::assemble(f, g, 0.0625);
        benchmark::DoNotOptimize(op.val.data());
    }
}
BENCHMARK(BM_Assemble)->Arg(128)->Arg(256);

static void BM_FftSolve(benchmark::State& state) {
    const auto g = box2d(static_cast<int>(state.range(0)));
    const grid::DiscreteField rhs = grid::sampleScalar(
        g, [](const Vec& x) { return std::sin(2.0 * M_PI * x[0] / 4.0) * std::cos(2.0 * M_PI * x[1] / 4.0); });
    for (auto _ : state) {
        const grid::DiscreteField u = solver::solveFFT(g, 0.0625, rhs);
        benchmark::DoNotOptimize(u.data.data());
    }
}
BENCHMARK(BM_FftSolve)->Arg(256)->Arg(512);

static void BM_WindowedNorm(benchmark::State& state) {
    const auto g = box2d(static_cast<int>(state.range(0)));
    const grid::DiscreteField u =
        grid::sampleScalar(g, [](const Vec& x) { return std::cos(2.0 * M_PI * x[0]) + 0.3 * x[1]; });
    for (auto _ : state) {
        benchmark::DoNotOptimize(grid::windowedNorm(u, 2.0, 1.0));
    }
}
BENCHMARK(BM_WindowedNorm)->Arg(256)->Arg(512);

static void BM_CorrectorSolve(benchmark::State& state) {
    const auto f = laminate();
    const auto g = box2d(static_cast<int>(state.range(0)));
    corrector::CorrectorOptions opts;
    opts.krylov.tol = 1e-8;
    for (auto _ : state) {
        const corrector::CorrectorSet cs = corrector::solveCorrector(f, 4.0, g, opts);
        benchmark::DoNotOptimize(cs.chi.data.data());
    }
}
BENCHMARK(BM_CorrectorSolve)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
