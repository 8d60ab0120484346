#include <benchmark/benchmark.h>

#include <random>

#include "vehnet/morphology.hpp"
#include "vehnet/nn/ops.hpp"
#include "vehnet/objects.hpp"
#include "vehnet/tiling.hpp"

using namespace vehnet;

namespace {

Tensor random_tensor(Shape shape, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<real_t>(dist(rng));
    return t;
}

void BM_Conv2dForward(benchmark::State& state) {
    const std::size_t ch = static_cast<std::size_t>(state.range(0));
    const std::size_t side = static_cast<std::size_t>(state.range(1));
    Tensor x = random_tensor({1, ch, side, side}, 1);
    Tensor w = random_tensor({ch, ch, 3, 3}, 2);
    Tensor b = random_tensor({ch}, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nn::conv2d(x, w, b, 1, 1));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ch * ch * side * side * 9));
}
BENCHMARK(BM_Conv2dForward)->Args({16, 64})->Args({32, 32})->Args({64, 16});

void BM_Conv2dBackward(benchmark::State& state) {
    const std::size_t ch = static_cast<std::size_t>(state.range(0));
    const std::size_t side = static_cast<std::size_t>(state.range(1));
    Tensor x = random_tensor({1, ch, side, side}, 1);
    Tensor w = random_tensor({ch, ch, 3, 3}, 2);
    Tensor g = random_tensor({1, ch, side, side}, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nn::conv2d_backward(g, x, w, 1, 1));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(2 * ch * ch * side * side * 9));
}
BENCHMARK(BM_Conv2dBackward)->Args({16, 64})->Args({32, 32});

void BM_MaxPoolUnpool(benchmark::State& state) {
    Tensor x = random_tensor({1, 32, 64, 64}, 4);
    for (auto _ : state) {
        auto [y, idx] = nn::maxpool2x2(x);
        benchmark::DoNotOptimize(nn::argmax_unpool(y, idx, x.shape()));
    }
}
BENCHMARK(BM_MaxPoolUnpool);

void BM_Opening(benchmark::State& state) {
    std::mt19937 rng(9);
    BinaryMask mask(256, 256);
    for (auto& b : mask.bits) b = (rng() & 1u) != 0;
    const StructuringElement se = StructuringElement::square(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(opening(mask, se));
    }
}
BENCHMARK(BM_Opening);

void BM_ConnectedComponents(benchmark::State& state) {
    std::mt19937 rng(10);
    BinaryMask mask(256, 256);
    for (auto& b : mask.bits) b = (rng() % 4u) == 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(connected_components(mask, 8));
    }
}
BENCHMARK(BM_ConnectedComponents);

void BM_Stitch(benchmark::State& state) {
    const TileGrid grid = make_grid(256, 256, 128, 64);
    std::vector<SemanticMap> maps(grid.count(), SemanticMap({"a", "b", "c"}, 128, 128));
    for (SemanticMap& m : maps) {
        for (std::size_t i = 0; i < m.prob.size(); ++i) m.prob[i] = 1.0f / 3.0f;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(stitch(grid, maps));
    }
}
BENCHMARK(BM_Stitch);

}  // namespace

BENCHMARK_MAIN();
