// Microbenchmarks for the geometry kernels and the core attention path.
// Build requires google-benchmark; the top-level CMake skips this directory
// when the package is absent. Run with --benchmark_format=console (default)
// or --benchmark_format=json for machine-readable output.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "pointcat/attention.hpp"
#include "pointcat/geometry.hpp"
#include "pointcat/grouping.hpp"
#include "pointcat/model.hpp"
#include "pointcat/ops.hpp"
#include "pointcat/rng.hpp"
#include "pointcat/tensor.hpp"

namespace {

using namespace pointcat;

std::vector<point3> random_points(std::int64_t n, std::uint64_t seed) {
    rng_stream rng(seed, "bench/points", static_cast<std::uint64_t>(n));
    std::vector<point3> pts(static_cast<std::size_t>(n));
    for (auto& p : pts)
        for (int a = 0; a < 3; ++a) p[a] = rng.normal();
    return pts;
}

tensor random_matrix(std::int64_t r, std::int64_t c, std::uint64_t seed) {
    rng_stream rng(seed, "bench/matrix", static_cast<std::uint64_t>(r * 1000 + c));
    std::vector<double> v(static_cast<std::size_t>(r * c));
    for (double& x : v) x = rng.normal();
    return tensor::from_values({r, c}, std::move(v));
}

void bm_fps(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const std::vector<point3> pts = random_points(n, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(farthest_point_sample(pts, n / 4));
    state.SetComplexityN(n);
}
BENCHMARK(bm_fps)->Arg(256)->Arg(1024)->Arg(4096)->Complexity(benchmark::oNSquared);

void bm_knn(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const std::int64_t k = state.range(1);
    const std::vector<point3> pts = random_points(n, 2);
    const std::vector<std::int64_t> centers = farthest_point_sample(pts, n / 4);
    for (auto _ : state)
        benchmark::DoNotOptimize(knn_search(pts, centers, k));
}
BENCHMARK(bm_knn)
    ->Args({256, 16})
    ->Args({1024, 16})
    ->Args({4096, 16})
    ->Args({1024, 8})
    ->Args({1024, 32});

void bm_matmul(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const tensor a = random_matrix(n, n, 3);
    const tensor b = random_matrix(n, n, 4);
    no_grad_guard ng;
    for (auto _ : state)
        benchmark::DoNotOptimize(matmul(a, b));
    state.SetComplexityN(n);
}
BENCHMARK(bm_matmul)->Arg(64)->Arg(128)->Arg(256)->Complexity(benchmark::oNCubed);

void bm_cross_attention_layer(benchmark::State& state) {
    // One classifier forward's attention stack at the default widths, cross
    // vs self-attention baseline selected by the second argument.
    const bool msa = state.range(0) != 0;
    model_config cfg;
    cfg.n_input = 256;
    cfg.d0 = 16;
    cfg.stages = 2;
    cfg.heads = 4;
    cfg.layers = 1;
    cfg.num_classes = 3;
    cfg.msa_baseline = msa;
    model m = build_classifier(cfg);

    point_cloud cloud;
    cloud.coords = random_points(cfg.n_input, 5);

    no_grad_guard ng;
    for (auto _ : state)
        benchmark::DoNotOptimize(forward_classify(m, cloud));
}
BENCHMARK(bm_cross_attention_layer)->Arg(0)->Arg(1);

void bm_group_stage(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    model_config cfg;
    cfg.n_input = n;
    cfg.d0 = 16;
    cfg.stages = 2;
    cfg.heads = 2;
    cfg.layers = 1;
    cfg.num_classes = 3;
    model m = build_classifier(cfg);

    branch_features parent =
        embed_points(random_points(n, 6), m.embed_w, m.embed_b);
    stage_config sc;
    sc.k = 16;

    no_grad_guard ng;
    for (auto _ : state)
        benchmark::DoNotOptimize(run_stage(parent, sc, m.stage_params[0]));
}
BENCHMARK(bm_group_stage)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
