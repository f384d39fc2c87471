#include "qid/bitstring.hpp"

#include <bit>
#include <charconv>

#include "qid/errors.hpp"

namespace qid {

namespace {

constexpr std::uint64_t bit_mask(std::size_t i) { return std::uint64_t{1} << (63 - (i & 63)); }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::PoolExhausted: return "PoolExhausted";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::MessageTooLong: return "MessageTooLong";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::NoSolution: return "NoSolution";
    case Errc::NoRoot: return "NoRoot";
    case Errc::AllZero: return "AllZero";
    case Errc::NeverBreaksEven: return "NeverBreaksEven";
    case Errc::InsufficientDetections: return "InsufficientDetections";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::ParseError: return "ParseError";
    case Errc::RangeError: return "RangeError";
    case Errc::UnknownSubcommand: return "UnknownSubcommand";
  }
  return "Unknown";
}

BitString::BitString(std::size_t len, bool value)
    : words_(words_for_bits(len), value ? ~std::uint64_t{0} : 0), len_(len) {
  clear_tail();
}

BitString BitString::from_words(std::vector<std::uint64_t> words, std::size_t len) {
  if (words.size() < words_for_bits(len))
    throw Error(Errc::LengthMismatch, "word buffer shorter than bit length");
  words.resize(words_for_bits(len));
  BitString out;
  out.words_ = std::move(words);
  out.len_ = len;
  out.clear_tail();
  return out;
}

BitString BitString::from_binary(std::string_view text) {
  BitString out(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1')
      out.set(i, true);
    else if (text[i] != '0')
      throw Error(Errc::ParseError, "binary string contains non 0/1 character");
  }
  return out;
}

BitString BitString::from_hex(std::string_view hex, std::size_t len) {
  if (hex.size() * 4 < len) throw Error(Errc::LengthMismatch, "hex string too short for bit length");
  BitString out(len);
  for (std::size_t i = 0; i < len; ++i) {
    const int v = hex_value(hex[i / 4]);
    if (v < 0) throw Error(Errc::ParseError, "invalid hex digit");
    if ((v >> (3 - i % 4)) & 1) out.set(i, true);
  }
  // Padding bits beyond len must be zero so the text form stays canonical.
  for (std::size_t i = len; i < hex.size() * 4; ++i) {
    const int v = hex_value(hex[i / 4]);
    if (v < 0) throw Error(Errc::ParseError, "invalid hex digit");
    if ((v >> (3 - i % 4)) & 1) throw Error(Errc::ParseError, "non-zero padding bits in hex string");
  }
  return out;
}

BitString BitString::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(Errc::ParseError, "expected <len>:<hex>");
  std::size_t len = 0;
  const auto* first = text.data();
  const auto [ptr, ec] = std::from_chars(first, first + colon, len);
  if (ec != std::errc{} || ptr != first + colon) throw Error(Errc::ParseError, "bad bit length");
  const auto hex = text.substr(colon + 1);
  if (hex.size() != (len + 7) / 8 * 2) throw Error(Errc::ParseError, "hex length does not match bit length");
  return from_hex(hex, len);
}

bool BitString::get(std::size_t i) const {
  if (i >= len_) throw Error(Errc::InvalidArgument, "bit index out of range");
  return (words_[i >> 6] & bit_mask(i)) != 0;
}

void BitString::set(std::size_t i, bool value) {
  if (i >= len_) throw Error(Errc::InvalidArgument, "bit index out of range");
  if (value)
    words_[i >> 6] |= bit_mask(i);
  else
    words_[i >> 6] &= ~bit_mask(i);
}

void BitString::flip(std::size_t i) {
  if (i >= len_) throw Error(Errc::InvalidArgument, "bit index out of range");
  words_[i >> 6] ^= bit_mask(i);
}

void BitString::push_back(bool value) {
  if ((len_ & 63) == 0) words_.push_back(0);
  ++len_;
  if (value) words_[(len_ - 1) >> 6] |= bit_mask(len_ - 1);
}

void BitString::append(const BitString& other) {
  if (other.len_ == 0) return;
  const unsigned shift = len_ & 63;
  if (shift == 0) {
    words_.insert(words_.end(), other.words_.begin(), other.words_.end());
  } else {
    for (const std::uint64_t w : other.words_) {
      words_.back() |= w >> shift;
      words_.push_back(w << (64 - shift));
    }
  }
  len_ += other.len_;
  words_.resize(words_for_bits(len_));
  clear_tail();
}

void BitString::append_uint(std::uint64_t value, unsigned width) {
  if (width > 64) throw Error(Errc::InvalidArgument, "field width above 64 bits");
  for (unsigned b = width; b-- > 0;) push_back(((value >> b) & 1) != 0);
}

std::uint64_t BitString::read_uint(std::size_t pos, unsigned width) const {
  if (width > 64) throw Error(Errc::InvalidArgument, "field width above 64 bits");
  if (pos + width > len_) throw Error(Errc::InvalidArgument, "field extends past end of string");
  if (width == 0) return 0;
  const std::size_t q = pos >> 6;
  const unsigned r = pos & 63;
  std::uint64_t v = words_[q] << r;
  if (r != 0 && q + 1 < words_.size()) v |= words_[q + 1] >> (64 - r);
  return v >> (64 - width);
}

BitString BitString::slice(std::size_t pos, std::size_t n) const {
  if (pos + n > len_ || pos + n < pos) throw Error(Errc::InvalidArgument, "slice out of range");
  BitString out;
  out.len_ = n;
  out.words_.resize(words_for_bits(n));
  const std::size_t w0 = pos >> 6;
  const unsigned shift = pos & 63;
  for (std::size_t k = 0; k < out.words_.size(); ++k) {
    std::uint64_t hi = words_[w0 + k] << shift;
    if (shift != 0 && w0 + k + 1 < words_.size()) hi |= words_[w0 + k + 1] >> (64 - shift);
    out.words_[k] = hi;
  }
  out.clear_tail();
  return out;
}

std::size_t BitString::count_ones() const noexcept {
  std::size_t n = 0;
  for (const auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitString::parity() const noexcept { return (count_ones() & 1) != 0; }

std::vector<std::uint8_t> BitString::to_bytes() const {
  std::vector<std::uint8_t> out((len_ + 7) / 8);
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = static_cast<std::uint8_t>(words_[j / 8] >> (56 - 8 * (j % 8)));
  return out;
}

std::string BitString::to_hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  const auto bytes = to_bytes();
  out.reserve(bytes.size() * 2);
  for (const auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

std::string BitString::to_binary() const {
  std::string out(len_, '0');
  for (std::size_t i = 0; i < len_; ++i)
    if (get(i)) out[i] = '1';
  return out;
}

std::string BitString::serialize() const { return std::to_string(len_) + ":" + to_hex(); }

BitString& BitString::operator^=(const BitString& other) {
  if (other.len_ != len_) throw Error(Errc::LengthMismatch, "xor of strings with different lengths");
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] ^= other.words_[k];
  return *this;
}

bool operator==(const BitString& a, const BitString& b) noexcept {
  return a.len_ == b.len_ && a.words_ == b.words_;
}

void BitString::clear_tail() noexcept {
  const unsigned used = len_ & 63;
  if (used != 0 && !words_.empty()) words_.back() &= ~std::uint64_t{0} << (64 - used);
}

std::size_t hamming_distance(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "hamming distance of unequal lengths");
  std::size_t d = 0;
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t k = 0; k < wa.size(); ++k) d += static_cast<std::size_t>(std::popcount(wa[k] ^ wb[k]));
  return d;
}

}  // namespace qid
