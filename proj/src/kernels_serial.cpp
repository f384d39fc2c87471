#include "kernel_detail.hpp"

namespace qid::kernels {

void simulate_pulses_serial(const PulseSpec& spec, std::uint64_t seed, std::size_t n, const PulseBuffers& out) {
  const std::size_t chunks = (n + kPulseChunk - 1) / kPulseChunk;
  for (std::size_t c = 0; c < chunks; ++c) detail::simulate_chunk(spec, seed, c, n, out);
}

std::vector<std::uint64_t> toeplitz_hash_serial(std::span<const std::uint64_t> key, std::size_t /*key_len*/,
                                                std::span<const std::uint64_t> seed, std::size_t out_len) {
  std::vector<std::uint64_t> out((out_len + 63) / 64, 0);
  for (std::size_t row = 0; row < out_len; ++row)
    if (detail::toeplitz_row(key, seed, row)) out[row >> 6] |= detail::word_bit(row);
  return out;
}

std::uint64_t inner_product_mod_serial(std::span<const std::uint64_t> r, std::span<const std::uint64_t> c,
                                       std::uint64_t p) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < r.size(); ++i) acc = detail::addmod(acc, detail::mulmod(r[i], c[i], p), p);
  return acc;
}

std::uint64_t impersonation_successes_serial(std::span<const double> p, std::size_t k, std::uint64_t trials,
                                             std::uint64_t seed) {
  const std::uint64_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
  std::uint64_t total = 0;
  for (std::uint64_t b = 0; b < blocks; ++b) total += detail::impersonation_block(p, k, b, trials, seed);
  return total;
}

}  // namespace qid::kernels
