#pragma once

// Data-parallel kernels. Every *_omp routine has a *_serial twin that
// produces bit-identical output; tests compare the two and the benchmark
// target times them.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qid::kernels {

inline constexpr std::size_t kPulseChunk = std::size_t{1} << 16;
inline constexpr std::size_t kTrialBlock = 4096;

enum class EveKind : std::uint8_t { None, InterceptResend, PerBitGuess, Beamsplit };

struct PulseSpec {
  double p_detect = 0.0;
  double eps_intrinsic = 0.0;
  EveKind eve = EveKind::None;
  double eve_param = 0.0;
};

// Word buffers, each sized for n pulses.
struct PulseBuffers {
  std::span<std::uint64_t> alice_bits;
  std::span<std::uint64_t> alice_bases;
  std::span<std::uint64_t> bob_bases;
  std::span<std::uint64_t> detected;
  std::span<std::uint64_t> bob_bits;
  std::span<std::uint64_t> eve_active;
  std::span<std::uint64_t> eve_bases;
  std::span<std::uint64_t> eve_bits;
};

void simulate_pulses_serial(const PulseSpec& spec, std::uint64_t seed, std::size_t n, const PulseBuffers& out);
void simulate_pulses_omp(const PulseSpec& spec, std::uint64_t seed, std::size_t n, const PulseBuffers& out);

// out[i] = parity(seed[i .. i+key_len) AND key) for i < out_len. Rows are
// consecutive windows of one seed string, a Toeplitz-structured universal
// family. The seed must hold key_len + out_len - 1 bits.
std::vector<std::uint64_t> toeplitz_hash_serial(std::span<const std::uint64_t> key, std::size_t key_len,
                                                std::span<const std::uint64_t> seed, std::size_t out_len);
std::vector<std::uint64_t> toeplitz_hash_omp(std::span<const std::uint64_t> key, std::size_t key_len,
                                             std::span<const std::uint64_t> seed, std::size_t out_len);

// sum r[i]*c[i] mod p with exact 128-bit products; p < 2^63.
std::uint64_t inner_product_mod_serial(std::span<const std::uint64_t> r, std::span<const std::uint64_t> c,
                                       std::uint64_t p);
std::uint64_t inner_product_mod_omp(std::span<const std::uint64_t> r, std::span<const std::uint64_t> c,
                                    std::uint64_t p);

// Monte-Carlo impersonation: number of trials in which a guesser who gets
// bit i right with probability p[i] makes at most k mistakes. Trial blocks
// of kTrialBlock draw from their own streams.
std::uint64_t impersonation_successes_serial(std::span<const double> p, std::size_t k, std::uint64_t trials,
                                             std::uint64_t seed);
std::uint64_t impersonation_successes_omp(std::span<const double> p, std::size_t k, std::uint64_t trials,
                                          std::uint64_t seed);

}  // namespace qid::kernels
