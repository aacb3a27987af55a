#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "qkdline/channel.hpp"
#include "qkdline/ldpc.hpp"
#include "qkdline/losscontrol.hpp"
#include "qkdline/secrecy.hpp"
#include "qkdline/sifting.hpp"
#include "qkdline/toeplitz.hpp"

namespace {

qkdline::BitKey random_key(std::size_t bits, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    qkdline::BitKey key(bits);
    for (std::size_t i = 0; i < bits; ++i) key.set(i, rng() & 1);
    return key;
}

void bm_holevo(benchmark::State& state) {
    const auto e0 = qkdline::secrecy::eve_state(0.002, 12300.0);
    const auto e1 = qkdline::secrecy::eve_state(0.002, 13700.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(qkdline::secrecy::holevo_bound(e0, e1, 0.5, 0.5));
}
BENCHMARK(bm_holevo);

void bm_toeplitz(benchmark::State& state) {
    const std::size_t cols = static_cast<std::size_t>(state.range(0));
    const std::size_t rows = cols * 15 / 16;
    const auto seed = qkdline::postprocess::ToeplitzSeed::random(rows, cols, 7);
    const auto key = random_key(cols, 11);
    for (auto _ : state)
        benchmark::DoNotOptimize(qkdline::postprocess::privacy_amplify(key, rows, seed));
    state.SetComplexityN(static_cast<benchmark::IterationCount>(cols));
}
BENCHMARK(bm_toeplitz)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

void bm_ldpc_decode(benchmark::State& state) {
    const auto code = qkdline::postprocess::LdpcCode::make(4000, 0.2, 3);
    const auto alice = random_key(4000, 5);
    std::mt19937_64 rng(9);
    std::bernoulli_distribution flip(0.02);
    auto bob = alice;
    for (std::size_t i = 0; i < bob.size(); ++i)
        if (flip(rng)) bob.flip(i);
    for (auto _ : state)
        benchmark::DoNotOptimize(qkdline::postprocess::reconcile(alice, bob, code, 0.02, 17));
}
BENCHMARK(bm_ldpc_decode);

void bm_trend_filter(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> y(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = -0.2 * static_cast<double>(i) + noise(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(qkdline::losscontrol::l1_trend_filter(y, 10.0));
}
BENCHMARK(bm_trend_filter)->Arg(1 << 10)->Arg(1 << 12);

void bm_sift(benchmark::State& state) {
    const auto model =
        qkdline::channel::DetectionModel::gaussian(0.138, 0.044, 0.176, 0.050, 1e-5);
    std::mt19937_64 rng(21);
    const std::size_t n = 1 << 16;
    qkdline::BitKey bits(n);
    std::vector<double> values(n);
    const auto v0 = model.sample(0, n, 77);
    const auto v1 = model.sample(1, n, 78);
    for (std::size_t i = 0; i < n; ++i) {
        bits.set(i, rng() & 1);
        values[i] = bits.get(i) ? v1[i] : v0[i];
    }
    const qkdline::sifting::Thresholds th{0.0368, 0.291, -1.0, 1.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(qkdline::sifting::sift(values, bits, th));
}
BENCHMARK(bm_sift);

void bm_lockin(benchmark::State& state) {
    qkdline::losscontrol::TransmitProbe probe;
    const auto wave = qkdline::losscontrol::synthesize_probe(probe, 0.9, 0.01, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(qkdline::losscontrol::lockin_amplitude(wave, probe));
}
BENCHMARK(bm_lockin);

}  // namespace

BENCHMARK_MAIN();
