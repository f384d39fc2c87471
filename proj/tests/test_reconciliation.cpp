#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qid/errors.hpp"
#include "qid/reconciliation.hpp"

using namespace qid;

namespace {

BitString with_errors(const BitString& key, double eps, Rng& rng) {
  BitString out = key;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (rng.uniform() < eps) out.flip(i);
  return out;
}

}  // namespace

TEST_CASE("identical keys cost one verification round") {
  Rng rng(RngSeed{1});
  const auto key = random_bitstring(4096, rng);
  Rng shared(RngSeed{2});
  const auto r = error_correct(key, key, shared);
  CHECK(r.corrections == 0);
  CHECK(r.leaked_bits == 32);
  CHECK(r.block_passes == 0);
  CHECK(r.alice == key);
  CHECK(r.bob == key);
}

TEST_CASE("a single flipped bit is found by bisection") {
  Rng rng(RngSeed{3});
  for (int trial = 0; trial < 50; ++trial) {
    const auto key = random_bitstring(1024, rng);
    auto bob = key;
    bob.flip(rng.below(1024));
    Rng shared(RngSeed{100 + std::uint64_t(trial)});
    const auto r = error_correct(key, bob, shared, EcOptions{0.001});
    CHECK(r.bob == key);
    CHECK(r.corrections == 1);
    // Pass overhead: a verification round before and after the block pass
    // plus one parity per block (blocks of ceil(0.73 / 0.001) bits).
    const std::size_t overhead = 2 * 32 + (1024 + 729) / 730;
    CHECK(r.leaked_bits <= 2 * 10 + overhead);
  }
}

TEST_CASE("eps 0.004 over 1e5 sifted bits") {
  const double eps = 0.004;
  const double model = 1 - 2.7 * std::pow(eps, 2.0 / 3.0);
  Rng rng(RngSeed{4});
  double worst = 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_bitstring(100'000, rng);
    const auto b = with_errors(a, eps, rng);
    Rng shared = Rng(RngSeed{5}).split(std::uint64_t(trial));
    const auto r = error_correct(a, b, shared, EcOptions{eps});
    CHECK(r.alice == r.bob);
    CHECK(r.corrections == hamming_distance(a, b));
    const double remaining = 1.0 - double(r.leaked_bits) / 1e5;
    worst = std::min(worst, remaining);
  }
  CHECK(worst >= model - 0.02);
}

TEST_CASE("parity link carries every disclosed parity") {
  Rng rng(RngSeed{6});
  const auto a = random_bitstring(20'000, rng);
  const auto b = with_errors(a, 0.02, rng);
  std::size_t carried = 0, batches = 0;
  const ParityLink counting = [&](const BitString& batch) {
    carried += batch.size();
    ++batches;
    return batch;
  };
  Rng shared(RngSeed{7});
  const auto r = error_correct(a, b, shared, EcOptions{0.02}, counting);
  CHECK(r.alice == r.bob);
  CHECK(carried == r.leaked_bits);
  CHECK(batches == r.messages);
}

TEST_CASE("error correction fails loudly on garbage") {
  Rng rng(RngSeed{8});
  const auto a = random_bitstring(2000, rng);
  CHECK_THROWS_AS(error_correct(a, BitString(1999), rng), Error);
  // A link that corrupts every parity can never converge.
  const ParityLink liar = [](const BitString& batch) { return batch ^ BitString(batch.size(), true); };
  try {
    error_correct(a, with_errors(a, 0.05, rng), rng, EcOptions{0.05, 32, 8}, liar);
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonConvergence);
  }
}

TEST_CASE("privacy amplification basics") {
  Rng rng(RngSeed{9});
  const auto key = random_bitstring(500, rng);
  CHECK(privacy_amplify(key, 0, BitString{}).size() == 0);
  CHECK(privacy_amplify(key, 500, BitString{}, PaMode::Identity) == key);
  CHECK_THROWS_AS(privacy_amplify(key, 499, BitString{}, PaMode::Identity), Error);
  CHECK_THROWS_AS(privacy_amplify(key, 501, random_bitstring(1000, rng)), Error);
  CHECK_THROWS_AS(privacy_amplify(key, 100, random_bitstring(10, rng)), Error);

  const auto seed = random_bitstring(pa_seed_bits(500, 100), rng);
  CHECK(privacy_amplify(key, 100, seed) == privacy_amplify(key, 100, seed));
}

TEST_CASE("privacy amplification matches a dense matrix product") {
  Rng rng(RngSeed{10});
  const std::size_t n = 77, m = 23;
  const auto key = random_bitstring(n, rng);
  const auto seed = random_bitstring(pa_seed_bits(n, m), rng);
  const auto out = privacy_amplify(key, m, seed, PaMode::Toeplitz, Execution::Serial);
  // Row i of the Toeplitz matrix is seed[i .. i + n).
  for (std::size_t i = 0; i < m; ++i) {
    bool bit = false;
    for (std::size_t j = 0; j < n; ++j) bit ^= seed.get(i + j) && key.get(j);
    CHECK(out.get(i) == bit);
  }
}

TEST_CASE("two seeds disagree on about half the output bits") {
  Rng rng(RngSeed{11});
  const std::size_t n = 1000, m = 200;
  const auto key = random_bitstring(n, rng);
  double total = 0;
  const int pairs = 1000;
  for (int i = 0; i < pairs; ++i) {
    const auto s1 = random_bitstring(pa_seed_bits(n, m), rng);
    const auto s2 = random_bitstring(pa_seed_bits(n, m), rng);
    total += double(hamming_distance(privacy_amplify(key, m, s1), privacy_amplify(key, m, s2)));
  }
  const double mean = total / pairs;
  const double sigma_mean = std::sqrt(m * 0.25 / pairs);
  CHECK(std::abs(mean - m / 2.0) < 4 * sigma_mean);
}

TEST_CASE("serial and OpenMP privacy amplification agree") {
  Rng rng(RngSeed{12});
  const std::size_t n = 100'003, m = 60'001;
  const auto key = random_bitstring(n, rng);
  const auto seed = random_bitstring(pa_seed_bits(n, m), rng);
  CHECK(privacy_amplify(key, m, seed, PaMode::Toeplitz, Execution::Serial) ==
        privacy_amplify(key, m, seed, PaMode::Toeplitz, Execution::Parallel));
}
