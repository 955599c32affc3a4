#include "sandwich/basis.hpp"
#include "sandwich/glam.hpp"
#include "sandwich/sandwich2d.hpp"
#include "sandwich/simulation.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace sandwich;

namespace {

int segments_for(std::size_t n) {
    if (n <= 80) return AxisSpec::auto_segments(n, 3, 2);
    if (n == 300) return 42;
    if (n == 500) return 57;
    return static_cast<int>(std::lround(std::pow(static_cast<double>(n * n), 0.325)));
}

// Full 20 x 20 GCV search plus the final fit, spectra included.
void BM_SelectLambda(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const GridData data = GridData::on_midpoints(noisy_surface(test_surface(TestFunction::F2, n, n), 0.1, 1));
    const AxisSpec spec{3, 2, segments_for(n)};
    for (auto _ : state) {
        SandwichFit fit = select_lambda(data, spec, spec);
        benchmark::DoNotOptimize(fit.fitted.data());
    }
    state.counters["K"] = spec.segments;
}
BENCHMARK(BM_SelectLambda)->Arg(20)->Arg(40)->Arg(80)->Arg(300)->Arg(500)->Unit(benchmark::kMillisecond);

// GCV surface only, with spectra and the data transform precomputed.
void BM_GcvSurface(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = midpoints(n);
    const AxisSpec spec{3, 2, segments_for(n)};
    const SandwichSmoother sm(x, x, spec, spec);
    const TransformedData t = sm.transform(noisy_surface(test_surface(TestFunction::F2, n, n), 0.1, 1));
    const LambdaGrid grid = LambdaGrid::log_uniform();
    for (auto _ : state) {
        GcvSurface s = sm.gcv_surface(t, grid.axis1, grid.axis2);
        benchmark::DoNotOptimize(s.gcv.data());
    }
}
BENCHMARK(BM_GcvSurface)->Arg(80)->Arg(500)->Unit(benchmark::kMicrosecond);

// Three-way array search on the default 10-per-axis λ grid.
void BM_ArrayFit(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    NdArray y({n, n, n});
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] = std::sin(0.37 * static_cast<double>(i));
    const ArrayData data = ArrayData::on_midpoints(y);
    const std::vector<AxisSpec> specs(3, AxisSpec{3, 2, 8});
    const auto grids = default_lambda_grids(3);
    for (auto _ : state) {
        MultiFit fit = fit_array(data, specs, grids);
        benchmark::DoNotOptimize(fit.fitted.data.data());
    }
}
BENCHMARK(BM_ArrayFit)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
