#include "mbcascade/pipeline.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace mbcascade;

namespace {

std::vector<Vec3> random_cloud(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Vec3> out;
    for (int i = 0; i < n; ++i) out.push_back(Vec3(g(rng), g(rng), g(rng)).normalized());
    return out;
}

void BM_Hausdorff(benchmark::State& st) {
    const auto a = random_cloud(static_cast<int>(st.range(0)), 1);
    const auto b = random_cloud(static_cast<int>(st.range(0)), 2);
    for (auto _ : st) benchmark::DoNotOptimize(hausdorff_distance(a, b));
    st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Hausdorff)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_SmithNormalForm(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> d(-3, 3);
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = d(rng);
    for (auto _ : st) benchmark::DoNotOptimize(smith_normal_form(m));
}
BENCHMARK(BM_SmithNormalForm)->Arg(4)->Arg(8)->Arg(16);

void BM_FlowToLanding(benchmark::State& st) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    FlowContext ctx(c.scenario);
    const Vec3 x0 = c.scenario.surface.chart(0.3, 0.2);
    const Vec3 start = project(c.scenario.surface, x0).coordinates;
    for (auto _ : st) benchmark::DoNotOptimize(flow_to_landing(ctx, start));
}
BENCHMARK(BM_FlowToLanding)->Unit(benchmark::kMicrosecond);

void BM_EnumerateCascades(benchmark::State& st) {
    const ScenarioConfig c = catalog_scenario("flat-torus");
    const int q = c.scenario.find_point("d"), p = c.scenario.find_point("b");
    for (auto _ : st) benchmark::DoNotOptimize(enumerate_cascades(c.scenario, q, p, c.cascade));
}
BENCHMARK(BM_EnumerateCascades)->Unit(benchmark::kMillisecond);

void BM_HFlowLines(benchmark::State& st) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const PerturbationData pd = build_h_eps(c.scenario, c.tubes, 6.25e-3);
    const int q = c.scenario.find_point("N"), p = c.scenario.find_point("b");
    for (auto _ : st) benchmark::DoNotOptimize(h_flow_lines(pd, q, p, c.cascade));
}
BENCHMARK(BM_HFlowLines)->Unit(benchmark::kMillisecond);

void BM_CheckSmallness(benchmark::State& st) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const PerturbationData pd = build_h_eps(c.scenario, c.tubes, 6.25e-3);
    for (auto _ : st) benchmark::DoNotOptimize(check_smallness(pd, c.smallness));
}
BENCHMARK(BM_CheckSmallness)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
