#include "qid/reconciliation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "qid/errors.hpp"
#include "qid/kernels.hpp"

namespace qid {

namespace {

bool and_parity(const BitString& a, const BitString& mask) {
  const auto wa = a.words();
  const auto wm = mask.words();
  std::uint64_t acc = 0;
  for (std::size_t k = 0; k < wa.size(); ++k) acc ^= wa[k] & wm[k];
  return (std::popcount(acc) & 1) != 0;
}

bool range_parity(const BitString& key, const std::vector<std::size_t>& perm, std::size_t lo, std::size_t hi) {
  bool p = false;
  for (std::size_t i = lo; i < hi; ++i) p ^= key.get(perm[i]);
  return p;
}

struct Exchange {
  const ParityLink& link;
  EcResult& result;

  BitString send(const BitString& alice_parities) {
    result.leaked_bits += alice_parities.size();
    ++result.messages;
    BitString received = link ? link(alice_parities) : alice_parities;
    if (received.size() != alice_parities.size()) received = BitString(alice_parities.size());
    return received;
  }
};

}  // namespace

EcResult error_correct(BitString alice_key, BitString bob_key, Rng& rng, const EcOptions& opts,
                       const ParityLink& link) {
  if (alice_key.size() != bob_key.size()) throw Error(Errc::LengthMismatch, "keys differ in length");
  EcResult result;
  const std::size_t n = alice_key.size();
  result.alice = std::move(alice_key);
  result.bob = std::move(bob_key);
  if (n == 0) return result;

  Exchange channel{link, result};
  const double hint = std::max(opts.error_hint, 1e-3);
  const std::size_t first_block = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(0.73 / hint)), 4, n);

  std::vector<std::size_t> perm(n);
  for (std::size_t pass = 0;; ++pass) {
    std::vector<BitString> masks;
    masks.reserve(opts.verify_parities);
    BitString alice_checks;
    for (std::size_t j = 0; j < opts.verify_parities; ++j) {
      masks.push_back(random_bitstring(n, rng));
      alice_checks.push_back(and_parity(result.alice, masks.back()));
    }
    const BitString received_checks = channel.send(alice_checks);
    bool clean = true;
    for (std::size_t j = 0; j < masks.size(); ++j)
      if (received_checks.get(j) != and_parity(result.bob, masks[j])) clean = false;
    if (clean) return result;
    if (pass == opts.max_passes) throw Error(Errc::NonConvergence, "parity bisection did not converge");

    std::iota(perm.begin(), perm.end(), std::size_t{0});
    if (pass > 0) {
      for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    const std::size_t block = pass == 0 ? first_block : std::min(2 * first_block, n);

    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    BitString alice_block_parities;
    for (std::size_t lo = 0; lo < n; lo += block) {
      const std::size_t hi = std::min(n, lo + block);
      blocks.emplace_back(lo, hi);
      alice_block_parities.push_back(range_parity(result.alice, perm, lo, hi));
    }
    const BitString received_blocks = channel.send(alice_block_parities);

    std::vector<std::pair<std::size_t, std::size_t>> active;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      const auto [lo, hi] = blocks[j];
      if (received_blocks.get(j) != range_parity(result.bob, perm, lo, hi)) active.push_back(blocks[j]);
    }

    // Level-synchronous bisection: one message per level for all blocks.
    while (!active.empty()) {
      std::vector<std::pair<std::size_t, std::size_t>> next;
      std::vector<std::pair<std::size_t, std::size_t>> probing;
      BitString alice_halves;
      for (const auto& [lo, hi] : active) {
        if (hi - lo == 1) {
          result.bob.flip(perm[lo]);
          ++result.corrections;
          continue;
        }
        probing.emplace_back(lo, hi);
        alice_halves.push_back(range_parity(result.alice, perm, lo, lo + (hi - lo) / 2));
      }
      if (probing.empty()) break;
      const BitString received_halves = channel.send(alice_halves);
      for (std::size_t j = 0; j < probing.size(); ++j) {
        const auto [lo, hi] = probing[j];
        const std::size_t mid = lo + (hi - lo) / 2;
        if (received_halves.get(j) != range_parity(result.bob, perm, lo, mid))
          next.emplace_back(lo, mid);
        else
          next.emplace_back(mid, hi);
      }
      active = std::move(next);
    }
    ++result.block_passes;
  }
}

BitString privacy_amplify(const BitString& key, std::size_t out_len, const BitString& seed, PaMode mode,
                          Execution exec) {
  if (out_len > key.size()) throw Error(Errc::InvalidArgument, "output longer than input key");
  if (mode == PaMode::Identity) {
    if (out_len != key.size()) throw Error(Errc::InvalidArgument, "identity mode keeps the key length");
    return key;
  }
  if (out_len == 0) return {};
  if (seed.size() != pa_seed_bits(key.size(), out_len))
    throw Error(Errc::LengthMismatch, "privacy amplification seed must hold key_len + out_len - 1 bits");
  auto words = exec == Execution::Parallel
                   ? kernels::toeplitz_hash_omp(key.words(), key.size(), seed.words(), out_len)
                   : kernels::toeplitz_hash_serial(key.words(), key.size(), seed.words(), out_len);
  return BitString::from_words(std::move(words), out_len);
}

}  // namespace qid
