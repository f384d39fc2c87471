#include <omp.h>

#include "kernel_detail.hpp"

namespace qid::kernels {

void simulate_pulses_omp(const PulseSpec& spec, std::uint64_t seed, std::size_t n, const PulseBuffers& out) {
  const auto chunks = static_cast<std::int64_t>((n + kPulseChunk - 1) / kPulseChunk);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) detail::simulate_chunk(spec, seed, static_cast<std::size_t>(c), n, out);
}

std::vector<std::uint64_t> toeplitz_hash_omp(std::span<const std::uint64_t> key, std::size_t /*key_len*/,
                                             std::span<const std::uint64_t> seed, std::size_t out_len) {
  std::vector<std::uint64_t> out((out_len + 63) / 64, 0);
  const auto words = static_cast<std::int64_t>(out.size());
  // One output word per iteration: rows of a word are written by one thread.
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t w = 0; w < words; ++w) {
    std::uint64_t acc = 0;
    const std::size_t first = static_cast<std::size_t>(w) * 64;
    const std::size_t last = std::min(out_len, first + 64);
    for (std::size_t row = first; row < last; ++row)
      if (detail::toeplitz_row(key, seed, row)) acc |= detail::word_bit(row);
    out[static_cast<std::size_t>(w)] = acc;
  }
  return out;
}

std::uint64_t inner_product_mod_omp(std::span<const std::uint64_t> r, std::span<const std::uint64_t> c,
                                    std::uint64_t p) {
  const auto n = static_cast<std::int64_t>(r.size());
  std::uint64_t total = 0;
#pragma omp parallel
  {
    std::uint64_t local = 0;
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i)
      local = detail::addmod(local, detail::mulmod(r[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(i)], p), p);
#pragma omp critical
    total = detail::addmod(total, local, p);
  }
  return total;
}

std::uint64_t impersonation_successes_omp(std::span<const double> p, std::size_t k, std::uint64_t trials,
                                          std::uint64_t seed) {
  const auto blocks = static_cast<std::int64_t>((trials + kTrialBlock - 1) / kTrialBlock);
  std::uint64_t total = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : total)
  for (std::int64_t b = 0; b < blocks; ++b)
    total += detail::impersonation_block(p, k, static_cast<std::uint64_t>(b), trials, seed);
  return total;
}

}  // namespace qid::kernels
