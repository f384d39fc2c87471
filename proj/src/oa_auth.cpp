#include "qid/oa_auth.hpp"

#include <charconv>
#include <sstream>

#include "qid/errors.hpp"
#include "qid/kernels.hpp"

namespace qid {

__extension__ typedef unsigned __int128 u128;


namespace {

constexpr std::uint64_t kEscape = kMersenne61 - 1;

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  u128 result = 1, b = base % m;
  while (exp != 0) {
    if (exp & 1) result = result * b % m;
    b = b * b % m;
    exp >>= 1;
  }
  return static_cast<std::uint64_t>(result);
}

void require_mersenne(const AuthParams& params) {
  if (!params.mersenne61())
    throw Error(Errc::InvalidArgument, "bit-level key/message handling is defined for p = 2^61 - 1 only");
}

// Scans 61-bit groups of `bits` starting at `offset`.
KeyDraw draw_key(const BitString& bits, std::size_t offset, const AuthParams& params) {
  require_mersenne(params);
  params.validate();
  KeyDraw out;
  out.key.digits.reserve(params.d);
  std::size_t pos = offset;
  while (out.key.digits.size() < params.d) {
    if (pos + kDigitBits > bits.size())
      throw Error(Errc::PoolExhausted, "secret bits ran out while drawing an authentication key");
    const std::uint64_t group = bits.read_uint(pos, kDigitBits);
    pos += kDigitBits;
    if (group == kMersenne61) continue;  // all ones: not a valid digit
    out.key.digits.push_back(group);
  }
  out.bits_consumed = pos - offset;
  return out;
}

std::string hex16(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 15];
  return s;
}

std::uint64_t parse_hex16(std::string_view s) {
  if (s.size() != 16) throw Error(Errc::ParseError, "expected 16 hex characters");
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error(Errc::ParseError, "invalid hex field");
  return v;
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (const std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % q == 0) return n == q;
  }
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  // These witnesses are deterministic for all 64-bit n.
  for (const std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = static_cast<std::uint64_t>(static_cast<u128>(x) * x % n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

void AuthParams::validate() const {
  if (d < 2) throw Error(Errc::InvalidArgument, "d must be at least 2");
  if (p >= (std::uint64_t{1} << 62)) throw Error(Errc::InvalidArgument, "modulus above 2^62 is not supported");
  if (!is_prime(p)) throw Error(Errc::InvalidArgument, "modulus is not prime");
}

AuthParams AuthParams::for_message_bits(std::size_t message_bits) {
  const std::size_t groups = (message_bits + 1 + kDigitBits - 1) / kDigitBits;
  return AuthParams{kMersenne61, groups + 1};
}

std::array<std::uint8_t, 8> Tag::to_bytes() const {
  std::array<std::uint8_t, 8> out{};
  for (int i = 0; i < 8; ++i) out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value >> (56 - 8 * i));
  return out;
}

BitString Tag::to_bits() const {
  BitString out;
  out.append_uint(value, 64);
  return out;
}

Tag Tag::from_bits(const BitString& bits) {
  if (bits.size() != 64) throw Error(Errc::LengthMismatch, "tag field must be 64 bits");
  return Tag{bits.read_uint(0, 64)};
}

KeyDraw key_from_bits(const BitString& raw, const AuthParams& params) { return draw_key(raw, 0, params); }

KeyDraw key_from_pool(SecretPool& pool, const AuthParams& params) {
  KeyDraw out = draw_key(pool.store(), pool.pointer(), params);
  pool.consume(out.bits_consumed);
  return out;
}

EncodedMessage encode_message(const BitString& msg, const AuthParams& params) {
  require_mersenne(params);
  params.validate();
  BitString padded = msg;
  padded.push_back(true);
  while (padded.size() % kDigitBits != 0) padded.push_back(false);

  EncodedMessage out;
  out.digits.reserve(params.d);
  out.digits.push_back(1);
  for (std::size_t pos = 0; pos < padded.size(); pos += kDigitBits) {
    const std::uint64_t group = padded.read_uint(pos, kDigitBits);
    if (group >= kEscape) {
      out.digits.push_back(kEscape);
      out.digits.push_back(group - kEscape);
    } else {
      out.digits.push_back(group);
    }
  }
  if (out.digits.size() > params.d)
    throw Error(Errc::MessageTooLong, "message of " + std::to_string(msg.size()) + " bits needs " +
                                          std::to_string(out.digits.size()) + " digits, d = " +
                                          std::to_string(params.d));
  out.digits.resize(params.d, 0);
  return out;
}

BitString decode_message(const EncodedMessage& enc, const AuthParams& params) {
  require_mersenne(params);
  if (enc.digits.size() != params.d || enc.digits.empty() || enc.digits[0] != 1)
    throw Error(Errc::InvalidArgument, "not an encoded message for these parameters");
  BitString bits;
  for (std::size_t i = 1; i < enc.digits.size(); ++i) {
    std::uint64_t group = enc.digits[i];
    if (group >= kMersenne61) throw Error(Errc::InvalidArgument, "digit out of range");
    if (group == kEscape) {
      if (i + 1 >= enc.digits.size() || enc.digits[i + 1] > 1)
        throw Error(Errc::InvalidArgument, "malformed escape sequence");
      group = kEscape + enc.digits[++i];
    }
    bits.append_uint(group, kDigitBits);
  }
  std::size_t end = bits.size();
  while (end > 0 && !bits.get(end - 1)) --end;
  if (end == 0) throw Error(Errc::InvalidArgument, "missing end-of-message marker");
  return bits.slice(0, end - 1);
}

bool well_formed(const EncodedMessage& enc, const AuthParams& params) {
  if (enc.digits.size() != params.d) return false;
  for (const auto c : enc.digits) {
    if (c >= params.p) return false;
  }
  for (const auto c : enc.digits) {
    if (c != 0) return c == 1;
  }
  return false;
}

Tag tag(const AuthKey& key, const EncodedMessage& msg, const AuthParams& params, Execution exec) {
  if (key.digits.size() != params.d || msg.digits.size() != params.d)
    throw Error(Errc::LengthMismatch, "key and message must both have d digits");
  for (const auto r : key.digits)
    if (r >= params.p) throw Error(Errc::InvalidArgument, "key digit not below p");
  for (const auto c : msg.digits)
    if (c >= params.p) throw Error(Errc::InvalidArgument, "message digit not below p");
  const auto value = exec == Execution::Parallel ? kernels::inner_product_mod_omp(key.digits, msg.digits, params.p)
                                                 : kernels::inner_product_mod_serial(key.digits, msg.digits, params.p);
  return Tag{value};
}

bool verify(const AuthKey& key, const EncodedMessage& msg, Tag t, const AuthParams& params) {
  // Full recomputation then one comparison of the whole residue.
  const Tag expected = tag(key, msg, params);
  return (expected.value ^ t.value) == 0;
}

Tag tag_bits(const AuthKey& key, const BitString& msg, const AuthParams& params) {
  return tag(key, encode_message(msg, params), params);
}

bool verify_bits(const AuthKey& key, const BitString& msg, Tag t, const AuthParams& params) {
  EncodedMessage enc;
  try {
    enc = encode_message(msg, params);
  } catch (const Error& e) {
    if (e.code() == Errc::MessageTooLong) return false;
    throw;
  }
  return verify(key, enc, t, params);
}

std::string format_test_vector(const TestVector& v) {
  std::string key_hex;
  key_hex.reserve(v.key.digits.size() * 16);
  for (const auto r : v.key.digits) key_hex += hex16(r);
  std::ostringstream os;
  os << v.params.p << ' ' << v.params.d << ' ' << key_hex << ' ' << v.message.serialize() << ' '
     << hex16(v.tag.value);
  return os.str();
}

TestVector parse_test_vector(std::string_view line) {
  std::istringstream is{std::string(line)};
  std::string p_text, d_text, key_hex, msg_text, tag_hex, extra;
  if (!(is >> p_text >> d_text >> key_hex >> msg_text >> tag_hex) || (is >> extra))
    throw Error(Errc::ParseError, "test vector needs exactly five fields");
  TestVector v;
  auto parse_u64 = [](const std::string& s) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error(Errc::ParseError, "bad integer field: " + s);
    return x;
  };
  v.params.p = parse_u64(p_text);
  v.params.d = static_cast<std::size_t>(parse_u64(d_text));
  v.params.validate();
  if (key_hex.size() != 16 * v.params.d) throw Error(Errc::ParseError, "key field must hold d digits");
  for (std::size_t i = 0; i < v.params.d; ++i)
    v.key.digits.push_back(parse_hex16(std::string_view(key_hex).substr(16 * i, 16)));
  v.message = BitString::parse(msg_text);
  v.tag = Tag{parse_hex16(tag_hex)};
  return v;
}

}  // namespace qid
