#include <benchmark/benchmark.h>

#include "pivotlab/certified.hpp"
#include "pivotlab/elimination.hpp"
#include "pivotlab/exact.hpp"
#include "pivotlab/polytope.hpp"
#include "pivotlab/rng.hpp"
#include "pivotlab/spectral.hpp"
#include "pivotlab/stability.hpp"

using namespace pivotlab;

namespace {

Matrix<Rational> gaussian(std::size_t n) {
    RngStream s = RngStream(1, 0).substream(n);
    return exact_shadow(sample_gaussian_matrix(n, n, s, FpConfig{53}));
}

void BM_GeppExact(benchmark::State& st) {
    const auto a = gaussian(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(gepp_factor(a));
}
BENCHMARK(BM_GeppExact)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_BareissSummary(benchmark::State& st) {
    const auto a = gaussian(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(exact_gepp_summary(a));
}
BENCHMARK(BM_BareissSummary)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_GeppEmulated(benchmark::State& st) {
    const auto a = gaussian(static_cast<std::size_t>(st.range(0)));
    const FpConfig cfg{static_cast<int>(st.range(1))};
    for (auto _ : st) benchmark::DoNotOptimize(fp_gepp(a, cfg));
}
BENCHMARK(BM_GeppEmulated)->Args({32, 24})->Args({32, 53})->Args({100, 53})->Unit(benchmark::kMillisecond);

void BM_GeppDouble(benchmark::State& st) {
    const auto a = to_double(gaussian(static_cast<std::size_t>(st.range(0))));
    for (auto _ : st) benchmark::DoNotOptimize(gepp_factor(a));
}
BENCHMARK(BM_GeppDouble)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_CertifiedGepp(benchmark::State& st) {
    const auto a = gaussian(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(certified_gepp(a));
}
BENCHMARK(BM_CertifiedGepp)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_JacobiSvd(benchmark::State& st) {
    RngStream s(2, 0);
    const auto m = sample_gaussian_doubles(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(0)), s);
    for (auto _ : st) benchmark::DoNotOptimize(singular_values(m));
}
BENCHMARK(BM_JacobiSvd)->Arg(12)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_PolytopeMc(benchmark::State& st) {
    const auto a = gaussian(12);
    const auto k = build_polytope(a, static_cast<std::size_t>(st.range(0)), gepp_factor(a));
    for (auto _ : st) benchmark::DoNotOptimize(gaussian_measure_mc(k, 10000, RngStream(3, 0)));
}
BENCHMARK(BM_PolytopeMc)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
