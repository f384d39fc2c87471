#pragma once

#include <cstdint>
#include <random>

#include "qid/bitstring.hpp"

namespace qid {

struct RngSeed {
  std::uint64_t seed = 0;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Deterministic stream. Streams derived from the same seed with distinct
// ids are independent; the derivation is part of the replay contract.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(RngSeed seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  // Child stream; does not advance this one.
  Rng split(std::uint64_t stream_id) const { return Rng(RngSeed{base_}, stream_id); }

  // Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool coin() { return (engine_() >> 63) != 0; }
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform in [0, n), unbiased (rejection).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t base_;
  std::mt19937_64 engine_;
};

BitString random_bitstring(std::size_t n, Rng& rng);

}  // namespace qid
