#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qid {

// Packed bit sequence of exact length. Bit i lives in word i/64 at position
// 63 - i%64, so the word array read big-endian is the bit string itself.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t len, bool value = false);

  static BitString from_words(std::vector<std::uint64_t> words, std::size_t len);
  // "0101..." text, one char per bit.
  static BitString from_binary(std::string_view text);
  // `len` bits taken from the front of a big-endian hex string.
  static BitString from_hex(std::string_view hex, std::size_t len);
  // "<len>:<hex>" text form.
  static BitString parse(std::string_view text);

  std::size_t size() const noexcept { return len_; }
  bool empty() const noexcept { return len_ == 0; }

  bool get(std::size_t i) const;
  void set(std::size_t i, bool value);
  void flip(std::size_t i);
  bool operator[](std::size_t i) const { return get(i); }

  void push_back(bool value);
  void append(const BitString& other);
  // Appends the low `width` bits of `value`, most significant first.
  void append_uint(std::uint64_t value, unsigned width);
  std::uint64_t read_uint(std::size_t pos, unsigned width) const;

  BitString slice(std::size_t pos, std::size_t n) const;

  std::size_t count_ones() const noexcept;
  bool parity() const noexcept;

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  std::vector<std::uint8_t> to_bytes() const;
  std::string to_hex() const;
  std::string to_binary() const;
  // "<len>:<hex>"; inverse of parse().
  std::string serialize() const;

  BitString& operator^=(const BitString& other);
  friend BitString operator^(BitString a, const BitString& b) { return a ^= b; }

  friend bool operator==(const BitString& a, const BitString& b) noexcept;

 private:
  void clear_tail() noexcept;

  std::vector<std::uint64_t> words_;
  std::size_t len_ = 0;
};

std::size_t hamming_distance(const BitString& a, const BitString& b);

inline std::size_t words_for_bits(std::size_t bits) { return (bits + 63) / 64; }

}  // namespace qid
