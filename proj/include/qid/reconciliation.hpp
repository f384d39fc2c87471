#pragma once

#include <cstddef>
#include <functional>

#include "qid/bitstring.hpp"
#include "qid/channel.hpp"
#include "qid/rng.hpp"

namespace qid {

// Carries one batch of Alice's disclosed parities to Bob and returns what
// Bob received. The default link delivers them unchanged.
using ParityLink = std::function<BitString(const BitString&)>;

struct EcOptions {
  double error_hint = 0.01;          // public estimate used to size blocks
  std::size_t verify_parities = 32;  // random-subset parities per check
  std::size_t max_passes = 64;
};

struct EcResult {
  BitString alice;
  BitString bob;
  std::size_t leaked_bits = 0;  // parities disclosed on the public channel
  std::size_t corrections = 0;  // bits Bob flipped
  std::size_t block_passes = 0;
  std::size_t messages = 0;
};

// Interactive parity bisection. Each round first compares verify_parities
// parities of random subsets; if all agree the keys are taken as equal.
// Otherwise a block pass runs: shuffle (identity on the first pass), cut
// into blocks, compare block parities and binary-search every odd block
// down to one flipped bit. Shuffles and subsets come from `rng`, which
// models shared public randomness.
EcResult error_correct(BitString alice_key, BitString bob_key, Rng& rng, const EcOptions& opts = {},
                       const ParityLink& link = {});

enum class PaMode { Toeplitz, Identity };

inline std::size_t pa_seed_bits(std::size_t key_len, std::size_t out_len) {
  return out_len == 0 ? 0 : key_len + out_len - 1;
}

// out = M key over GF(2) with M the Toeplitz matrix whose rows are
// consecutive windows of `seed` (pa_seed_bits(key.size(), out_len) bits).
// Identity mode is a test hook: out_len must equal key.size().
BitString privacy_amplify(const BitString& key, std::size_t out_len, const BitString& seed,
                          PaMode mode = PaMode::Toeplitz, Execution exec = Execution::Parallel);

}  // namespace qid
