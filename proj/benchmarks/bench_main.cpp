#include "normbound/autodiff.hpp"
#include "normbound/diagnostics.hpp"
#include "normbound/gicstat.hpp"
#include "normbound/model.hpp"
#include "normbound/normpower.hpp"
#include "normbound/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace normbound;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

ParamModel bench_model(std::size_t width, std::size_t blocks) {
    ModelConfig c;
    c.input_dim = 32;
    c.output_dim = 10;
    c.block_count = blocks;
    c.hidden_width = width;
    c.skip_connections = true;
    return build(c);
}

void BM_norm_power_eval(benchmark::State& state) {
    const auto p = make_lp_power(3.0, 2.5, 1.0);
    const auto mu = random_vec(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval(p, mu));
    }
}
BENCHMARK(BM_norm_power_eval)->Arg(16)->Arg(256);

void BM_fy_loss(benchmark::State& state) {
    const auto p = make_power(Norm::l2, 2.0, 0.5);
    const auto mu = random_vec(static_cast<std::size_t>(state.range(0)), 2);
    const auto nu = random_vec(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fy_loss(p, mu, nu));
    }
}
BENCHMARK(BM_fy_loss)->Arg(16)->Arg(256);

void BM_forward(benchmark::State& state) {
    const auto m = bench_model(static_cast<std::size_t>(state.range(0)), 2);
    const auto theta = init(m, {InitScheme::Kind::he, 1});
    const auto x = random_vec(32, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(m, theta, x));
    }
}
BENCHMARK(BM_forward)->Arg(32)->Arg(128);

void BM_vjp(benchmark::State& state) {
    const auto m = bench_model(static_cast<std::size_t>(state.range(0)), 2);
    const auto theta = init(m, {InitScheme::Kind::he, 1});
    const auto x = random_vec(32, 4);
    const auto fwd = forward(m, theta, x);
    const auto u = random_vec(10, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(vjp_params(fwd.tape, u));
    }
}
BENCHMARK(BM_vjp)->Arg(32)->Arg(128);

void BM_structural_matrix(benchmark::State& state) {
    const auto m = bench_model(static_cast<std::size_t>(state.range(0)), 2);
    const auto theta = init(m, {InitScheme::Kind::he, 1});
    const auto x = random_vec(32, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(structural_matrix(m, theta, x));
    }
}
BENCHMARK(BM_structural_matrix)->Arg(32)->Arg(128);

void BM_jacobi_eigenvalues(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(6);
    std::vector<double> b(n * n);
    for (auto& v : b) v = rng.normal();
    SymmetricMatrix a;
    a.n = n;
    a.data.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < n; ++k) s += b[k * n + i] * b[k * n + j];
            a.at(i, j) = s;
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(sym_eigenvalues(a));
    }
}
BENCHMARK(BM_jacobi_eigenvalues)->Arg(10)->Arg(50);

void BM_sliding_pearson(benchmark::State& state) {
    const auto x = random_vec(static_cast<std::size_t>(state.range(0)), 7);
    const auto y = random_vec(static_cast<std::size_t>(state.range(0)), 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sliding_pearson(x, y, 50));
    }
}
BENCHMARK(BM_sliding_pearson)->Arg(500)->Arg(5000);

void BM_sample_ball(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            sample_ball(static_cast<std::size_t>(state.range(0)), 50, 1.0, 9));
    }
}
BENCHMARK(BM_sample_ball)->Arg(1000)->Arg(10000);

} // namespace

BENCHMARK_MAIN();
