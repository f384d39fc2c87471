// Serial reference vs OpenMP for each kernel. Sizes match production use:
// a 6.25e6-pulse run, a 280k-bit privacy-amplification hash, a d = 739 tag
// and a 10^6-trial impersonation sweep.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "qid/kernels.hpp"
#include "qid/oa_auth.hpp"
#include "qid/rng.hpp"

using namespace qid;
using namespace qid::kernels;

namespace {

constexpr std::size_t kPulses = 6'250'000;

struct PulseStore {
  std::vector<std::vector<std::uint64_t>> v;
  PulseBuffers view;
  explicit PulseStore(std::size_t n) : v(8, std::vector<std::uint64_t>((n + 63) / 64)) {
    view = {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
  }
};

template <auto Fn>
void BM_pulses(benchmark::State& state) {
  PulseStore store(kPulses);
  const PulseSpec spec{1 - std::exp(-0.096), 0.004, EveKind::InterceptResend, 0.5};
  for (auto _ : state) {
    Fn(spec, 1, kPulses, store.view);
    benchmark::DoNotOptimize(store.v[4].data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(kPulses));
}

template <auto Fn>
void BM_toeplitz(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t m = n * 4 / 10;
  Rng rng(RngSeed{2});
  const auto key = random_bitstring(n, rng);
  const auto seed = random_bitstring(n + m - 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(key.words(), n, seed.words(), m));
}

template <auto Fn>
void BM_inner_product(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(RngSeed{3});
  std::vector<std::uint64_t> r(d), c(d);
  for (std::size_t i = 0; i < d; ++i) {
    r[i] = rng.below(kMersenne61);
    c[i] = rng.below(kMersenne61);
  }
  for (auto _ : state) benchmark::DoNotOptimize(Fn(r, c, kMersenne61));
}

template <auto Fn>
void BM_impersonation(benchmark::State& state) {
  const std::vector<double> p(50, 0.6);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(p, 1, 1'000'000, 4));
}

}  // namespace

BENCHMARK(BM_pulses<simulate_pulses_serial>)->Name("pulses/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pulses<simulate_pulses_omp>)->Name("pulses/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_toeplitz<toeplitz_hash_serial>)->Name("toeplitz/serial")->Arg(1 << 16)->Arg(280'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_toeplitz<toeplitz_hash_omp>)->Name("toeplitz/omp")->Arg(1 << 16)->Arg(280'000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_inner_product<inner_product_mod_serial>)->Name("oa_tag/serial")->Arg(739)->Arg(100'000);
BENCHMARK(BM_inner_product<inner_product_mod_omp>)->Name("oa_tag/omp")->Arg(739)->Arg(100'000)->UseRealTime();
BENCHMARK(BM_impersonation<impersonation_successes_serial>)->Name("impersonation/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_impersonation<impersonation_successes_omp>)->Name("impersonation/omp")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
