#include <benchmark/benchmark.h>

#include "nipsr/evaluator.hpp"
#include "nipsr/image.hpp"
#include "nipsr/nip_prior.hpp"
#include "nipsr/rng.hpp"
#include "nipsr/srnet.hpp"
#include "nipsr/tensor.hpp"

namespace {

using namespace nipsr;

Tensor random_tensor(int n, int c, int h, int w, std::uint64_t seed) {
    SeededRng rng(seed);
    return rng_normal(rng, n, c, h, w, 0.0, 1.0);
}

ImagePlane random_plane(int h, int w, std::uint64_t seed) {
    SeededRng rng(seed);
    ImagePlane p(h, w);
    for (double& v : p.v) v = rng.next_double();
    return p;
}

void BM_Conv2dForward(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0));
    const Tensor x = random_tensor(1, c, 41, 41, 1);
    const Tensor w = random_tensor(64, c, 3, 3, 2);
    const std::vector<double> b(64, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(conv2d_forward(x, w, b, 1));
    }
}
BENCHMARK(BM_Conv2dForward)->Arg(1)->Arg(64);

void BM_Conv2dBackward(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0));
    const Tensor x = random_tensor(1, c, 41, 41, 1);
    const Tensor w = random_tensor(64, c, 3, 3, 2);
    const Tensor gy = random_tensor(1, 64, 41, 41, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(conv2d_backward(x, w, 1, gy));
    }
}
BENCHMARK(BM_Conv2dBackward)->Arg(1)->Arg(64);

void BM_NipPenaltyConv(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const ImagePlane p = random_plane(s, s, 4);
    const NipConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nip_penalty(p, cfg));
    }
}
BENCHMARK(BM_NipPenaltyConv)->Arg(41)->Arg(128);

void BM_NipPenaltyBruteforce(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const ImagePlane p = random_plane(s, s, 4);
    const NipConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pairwise_penalty_bruteforce(p, cfg));
    }
}
BENCHMARK(BM_NipPenaltyBruteforce)->Arg(41)->Arg(128);

void BM_BicubicDegrade(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const ImagePlane p = random_plane(s, s, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(degrade(p, 3));
    }
}
BENCHMARK(BM_BicubicDegrade)->Arg(96)->Arg(240);

void BM_Ssim(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const ImagePlane a = random_plane(s, s, 6);
    const ImagePlane b = random_plane(s, s, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ssim(a, b));
    }
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(128);

void BM_ForwardDepth5(benchmark::State& state) {
    const SrNetwork net = init_network(5, 9, 64);
    const Tensor x = random_tensor(1, 1, 41, 41, 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(net, x));
    }
}
BENCHMARK(BM_ForwardDepth5);

}  // namespace

BENCHMARK_MAIN();
