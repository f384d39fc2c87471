#pragma once

// Unconditionally secure authentication from the orthogonal-array code
// over GF(p):  tag = sum_i r_i c_i mod p.
//
// Keys are d base-p digits r_1..r_d. Messages are mapped injectively onto
// the digit vectors c_1..c_d whose first non-zero digit is 1; there are
// (p^d - 1)/(p - 1) of them, and for each (message, tag) pair exactly
// p^(d-1) of the p^d keys agree, so a forger succeeds with probability 1/p.
//
// Production parameterization: p = 2^61 - 1, d = 739 (45,079 key bits,
// messages up to 45,017 bits, 61-bit tags).
//
// Message encoding for p = 2^61 - 1 (bit-exact):
//   1. append a single 1 bit to the message, then zero bits up to a
//      multiple of 61;
//   2. cut into 61-bit big-endian groups g_1, g_2, ...;
//   3. emit each group as one digit, except the two values p-1 and p,
//      which become the escape pair (p-1, 0) and (p-1, 1);
//   4. c_1 = 1, followed by the emitted digits, zero-padded to d digits.
// Decoding reverses the steps and strips the trailing 1 0* marker.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qid/bitstring.hpp"
#include "qid/channel.hpp"
#include "qid/secret_pool.hpp"

namespace qid {

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;
inline constexpr unsigned kDigitBits = 61;

struct AuthParams {
  std::uint64_t p = kMersenne61;
  std::size_t d = 739;

  bool mersenne61() const { return p == kMersenne61; }
  // Key bits when every 61-bit group is usable.
  std::size_t key_bits() const { return d * kDigitBits; }
  // Longest message whose encoding fits d digits (no escapes needed).
  std::size_t max_message_bits() const { return kDigitBits * (d - 1) - 1; }
  void validate() const;

  static AuthParams production() { return {}; }
  // Smallest d (p = 2^61 - 1) able to carry a message of the given length.
  static AuthParams for_message_bits(std::size_t message_bits);
};

struct AuthKey {
  std::vector<std::uint64_t> digits;
};

struct EncodedMessage {
  std::vector<std::uint64_t> digits;
};

struct Tag {
  std::uint64_t value = 0;

  // 8 bytes big-endian; the top three bits are zero for p = 2^61 - 1.
  std::array<std::uint8_t, 8> to_bytes() const;
  BitString to_bits() const;
  static Tag from_bits(const BitString& bits);
  friend bool operator==(const Tag&, const Tag&) = default;
};

bool is_prime(std::uint64_t n);

struct KeyDraw {
  AuthKey key;
  std::size_t bits_consumed = 0;
};

// d digits from consecutive 61-bit groups of `raw`, skipping all-ones
// groups. Throws PoolExhausted if `raw` runs out first.
KeyDraw key_from_bits(const BitString& raw, const AuthParams& params);
// Same, drawing from the pool and advancing its pointer by the bits used.
KeyDraw key_from_pool(SecretPool& pool, const AuthParams& params);

EncodedMessage encode_message(const BitString& msg, const AuthParams& params);
BitString decode_message(const EncodedMessage& enc, const AuthParams& params);
// Digit vector with a leading (first non-zero) digit of 1.
bool well_formed(const EncodedMessage& enc, const AuthParams& params);

Tag tag(const AuthKey& key, const EncodedMessage& msg, const AuthParams& params,
        Execution exec = Execution::Serial);
bool verify(const AuthKey& key, const EncodedMessage& msg, Tag t, const AuthParams& params);

// Convenience for the protocol layer: key sized to the message.
Tag tag_bits(const AuthKey& key, const BitString& msg, const AuthParams& params);
bool verify_bits(const AuthKey& key, const BitString& msg, Tag t, const AuthParams& params);

// Test-vector line: `p d key_digits_hex msg tag_hex`, where key digits are
// 16 hex characters each, msg is "<bitlen>:<hex>" and tag is 16 hex chars.
struct TestVector {
  AuthParams params;
  AuthKey key;
  BitString message;
  Tag tag;
};

std::string format_test_vector(const TestVector& v);
TestVector parse_test_vector(std::string_view line);

}  // namespace qid
