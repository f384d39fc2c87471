#pragma once

// Per-element bodies shared by the serial and OpenMP kernels, so both
// paths run exactly the same arithmetic in the same order per element.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>

#include "qid/kernels.hpp"
#include "qid/rng.hpp"

namespace qid::kernels::detail {

__extension__ typedef unsigned __int128 u128;


inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  const u128 prod = static_cast<u128>(a) * b;
  if (p == kMersenne61) {
    std::uint64_t r = (static_cast<std::uint64_t>(prod) & kMersenne61) + static_cast<std::uint64_t>(prod >> 61);
    r = (r & kMersenne61) + (r >> 61);
    return r >= kMersenne61 ? r - kMersenne61 : r;
  }
  return static_cast<std::uint64_t>(prod % p);
}

inline std::uint64_t addmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  const std::uint64_t s = a + b;
  return s >= p ? s - p : s;
}

inline std::uint64_t word_bit(std::size_t i) { return std::uint64_t{1} << (63 - (i & 63)); }

// One chunk of kPulseChunk pulses; chunk starts are word aligned so chunks
// write disjoint words.
inline void simulate_chunk(const PulseSpec& spec, std::uint64_t seed, std::size_t chunk, std::size_t n,
                           const PulseBuffers& out) {
  const std::size_t begin = chunk * kPulseChunk;
  const std::size_t end = std::min(n, begin + kPulseChunk);
  Rng bob_side(RngSeed{seed}, 2 * chunk);
  Rng eve_side(RngSeed{seed}, 2 * chunk + 1);

  for (std::size_t w = begin / 64; w < (end + 63) / 64; ++w) {
    out.alice_bits[w] = out.alice_bases[w] = out.bob_bases[w] = 0;
    out.detected[w] = out.bob_bits[w] = 0;
    out.eve_active[w] = out.eve_bases[w] = out.eve_bits[w] = 0;
  }

  for (std::size_t i = begin; i < end; ++i) {
    const std::uint64_t draw = bob_side();
    const bool a_bit = (draw >> 63) & 1;
    const bool a_basis = (draw >> 62) & 1;
    const bool b_basis = (draw >> 61) & 1;
    const bool det = bob_side.uniform() < spec.p_detect;

    // Eve draws come from her own stream so Bob-visible fields never depend
    // on whether a passive attacker is present.
    bool e_active = false, e_basis = false, e_bit = false;
    if (spec.eve != EveKind::None) {
      const double u = eve_side.uniform();
      const std::uint64_t e_draw = eve_side();
      e_active = u < spec.eve_param;
      switch (spec.eve) {
        case EveKind::InterceptResend:
          e_basis = (e_draw >> 63) & 1;
          e_bit = e_basis == a_basis ? a_bit : ((e_draw >> 62) & 1) != 0;
          break;
        case EveKind::PerBitGuess:
          // eve_param is p_bar: the guess is right with that probability.
          e_active = true;
          e_bit = u < spec.eve_param ? a_bit : !a_bit;
          break;
        case EveKind::Beamsplit:
          e_bit = e_active && a_bit;
          break;
        case EveKind::None:
          break;
      }
    }

    bool b_bit = false;
    if (det) {
      const bool flip = bob_side.uniform() < spec.eps_intrinsic;
      const bool coin = bob_side.coin();
      const bool intercepted = spec.eve == EveKind::InterceptResend && e_active;
      const bool src_basis = intercepted ? e_basis : a_basis;
      const bool src_bit = intercepted ? e_bit : a_bit;
      b_bit = b_basis == src_basis ? (src_bit != flip) : coin;
    }

    const std::size_t w = i >> 6;
    const std::uint64_t m = word_bit(i);
    if (a_bit) out.alice_bits[w] |= m;
    if (a_basis) out.alice_bases[w] |= m;
    if (b_basis) out.bob_bases[w] |= m;
    if (det) out.detected[w] |= m;
    if (b_bit) out.bob_bits[w] |= m;
    if (e_active) out.eve_active[w] |= m;
    if (e_basis) out.eve_bases[w] |= m;
    if (e_bit) out.eve_bits[w] |= m;
  }
}

// 64 consecutive seed bits starting at bit `pos`.
inline std::uint64_t window_word(std::span<const std::uint64_t> seed, std::size_t pos) {
  const std::size_t q = pos >> 6;
  const unsigned r = pos & 63;
  std::uint64_t v = q < seed.size() ? seed[q] << r : 0;
  if (r != 0 && q + 1 < seed.size()) v |= seed[q + 1] >> (64 - r);
  return v;
}

inline bool toeplitz_row(std::span<const std::uint64_t> key, std::span<const std::uint64_t> seed, std::size_t row) {
  std::uint64_t acc = 0;
  for (std::size_t w = 0; w < key.size(); ++w) acc ^= key[w] & window_word(seed, row + 64 * w);
  return (std::popcount(acc) & 1) != 0;
}

inline std::uint64_t impersonation_block(std::span<const double> p, std::size_t k, std::uint64_t block,
                                         std::uint64_t trials, std::uint64_t seed) {
  const std::uint64_t begin = block * kTrialBlock;
  const std::uint64_t end = std::min<std::uint64_t>(trials, begin + kTrialBlock);
  Rng rng(RngSeed{seed}, block);
  std::uint64_t successes = 0;
  for (std::uint64_t t = begin; t < end; ++t) {
    std::size_t wrong = 0;
    for (const double pi : p)
      if (!(rng.uniform() < pi)) ++wrong;
    if (wrong <= k) ++successes;
  }
  return successes;
}

}  // namespace qid::kernels::detail
