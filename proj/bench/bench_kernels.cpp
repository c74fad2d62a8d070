#include <benchmark/benchmark.h>

#include "pathint/kernels.hpp"
#include "pathint/stationary_path.hpp"

using namespace pathint;

namespace {

DiscretePath spin_path(int N) { return solve_spin_dtscs(TimeGrid(N, 1.0), {0.3, 0.2}, {-0.1, 0.4}, 3.0).path; }

void BM_gradient_serial(benchmark::State& st) {
    DiscretePath p = spin_path(int(st.range(0)));
    DiscreteModel m = DiscreteModel::spin(3.0);
    for (auto _ : st) benchmark::DoNotOptimize(numerical_gradient_serial(p, m));
}

void BM_gradient_parallel(benchmark::State& st) {
    DiscretePath p = spin_path(int(st.range(0)));
    DiscreteModel m = DiscreteModel::spin(3.0);
    for (auto _ : st) benchmark::DoNotOptimize(numerical_gradient(p, m));
}

std::vector<QuadraticForm> forms() {
    std::vector<QuadraticForm> f;
    for (int k = 0; k < 8; ++k) {
        cplx a(0.1 * k, 0.2), b(0.3, -0.05 * k);
        f.push_back(expand_dtscs(solve_spin_dtscs(TimeGrid(3 + k % 2, 1.0), a, b, 2.0), 2.0));
    }
    return f;
}

void BM_quadrature_serial(benchmark::State& st) {
    auto f = forms();
    for (auto _ : st) benchmark::DoNotOptimize(gaussian_quadrature_batch_serial(f));
}

void BM_quadrature_parallel(benchmark::State& st) {
    auto f = forms();
    for (auto _ : st) benchmark::DoNotOptimize(gaussian_quadrature_batch(f));
}

void BM_band_lu(benchmark::State& st) {
    QuadraticForm f = build_kscs_form(TimeGrid(int(st.range(0)), 1.0), {0.2, 0.1});
    for (auto _ : st) benchmark::DoNotOptimize(form_log_det(f));
}

}  // namespace

BENCHMARK(BM_gradient_serial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_gradient_parallel)->Arg(10000)->Arg(100000);
BENCHMARK(BM_quadrature_serial);
BENCHMARK(BM_quadrature_parallel);
BENCHMARK(BM_band_lu)->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
