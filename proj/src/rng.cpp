#include "qid/rng.hpp"

#include <vector>

#include "qid/errors.hpp"

namespace qid {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t state = seed ^ (0xd1b54a32d192ed03ULL * (stream_id + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state))};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(RngSeed seed, std::uint64_t stream_id)
    : base_(seed.seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 0x51))), engine_(make_engine(seed.seed, stream_id)) {}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(Errc::InvalidArgument, "below(0)");
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

BitString random_bitstring(std::size_t n, Rng& rng) {
  std::vector<std::uint64_t> words(words_for_bits(n));
  for (auto& w : words) w = rng();
  return BitString::from_words(std::move(words), n);
}

}  // namespace qid
