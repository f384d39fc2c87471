#include <doctest.h>

#include <cmath>
#include <vector>

#include "qid/errors.hpp"
#include "qid/kernels.hpp"
#include "qid/oa_auth.hpp"

using namespace qid;

namespace {

// Plain schoolbook reference, small moduli only.
std::uint64_t naive_tag(const std::vector<std::uint64_t>& r, const std::vector<std::uint64_t>& c, std::uint64_t p) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < r.size(); ++i) acc = (acc + r[i] * c[i]) % p;
  return acc;
}

// All vectors of length d over GF(p).
std::vector<std::vector<std::uint64_t>> all_vectors(std::uint64_t p, std::size_t d) {
  std::vector<std::vector<std::uint64_t>> out{{}};
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<std::vector<std::uint64_t>> next;
    for (const auto& v : out)
      for (std::uint64_t x = 0; x < p; ++x) {
        auto w = v;
        w.push_back(x);
        next.push_back(std::move(w));
      }
    out = std::move(next);
  }
  return out;
}

bool leading_one(const std::vector<std::uint64_t>& c) {
  for (const auto x : c)
    if (x != 0) return x == 1;
  return false;
}

}  // namespace

TEST_CASE("key draw from raw bits") {
  const AuthParams two{kMersenne61, 2};

  BitString zeros(122);
  const auto a = key_from_bits(zeros, two);
  CHECK(a.key.digits == std::vector<std::uint64_t>{0, 0});
  CHECK(a.bits_consumed == 122);

  BitString skip(61, true);
  skip.append(BitString(122));
  const auto b = key_from_bits(skip, two);
  CHECK(b.key.digits == std::vector<std::uint64_t>{0, 0});
  CHECK(b.bits_consumed == 183);  // first group discarded

  CHECK_THROWS_AS(key_from_bits(BitString(121), two), Error);
  try {
    key_from_bits(BitString(61, true), two);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::PoolExhausted);
  }

  Rng rng(RngSeed{1});
  BitString production_raw = random_bitstring(50'000, rng);
  // Make sure no 61-bit group is all ones (probability ~ 2^-61 anyway).
  for (std::size_t g = 0; g < 739; ++g) production_raw.set(g * 61, false);
  const auto c = key_from_bits(production_raw, AuthParams::production());
  CHECK(c.bits_consumed == 45'079);
  CHECK(AuthParams::production().key_bits() == 45'079);
  for (const auto r : c.key.digits) CHECK(r < kMersenne61);
}

TEST_CASE("key draw from the pool advances the pointer") {
  Rng rng(RngSeed{2});
  SecretPool pool(random_bitstring(500, rng));
  const AuthParams params{kMersenne61, 3};
  const auto k1 = key_from_pool(pool, params);
  CHECK(pool.pointer() == k1.bits_consumed);
  const auto k2 = key_from_pool(pool, params);
  CHECK(pool.pointer() == k1.bits_consumed + k2.bits_consumed);
  CHECK(!(k1.key.digits == k2.key.digits));
  SecretPool tiny(BitString(100));
  CHECK_THROWS_AS(key_from_pool(tiny, params), Error);
  CHECK(tiny.pointer() == 0);
}

TEST_CASE("message encoding") {
  const auto prod = AuthParams::production();
  const auto empty = encode_message(BitString{}, prod);
  REQUIRE(empty.digits.size() == 739);
  CHECK(empty.digits[0] == 1);
  CHECK(empty.digits[1] == (std::uint64_t{1} << 60));  // the end marker
  for (std::size_t i = 2; i < 739; ++i) CHECK(empty.digits[i] == 0);
  CHECK(decode_message(empty, prod).size() == 0);
  CHECK(well_formed(empty, prod));

  Rng rng(RngSeed{3});
  for (int i = 0; i < 20; ++i) {
    const auto m = random_bitstring(1000, rng);
    const auto enc = encode_message(m, prod);
    CHECK(well_formed(enc, prod));
    CHECK(decode_message(enc, prod) == m);
  }

  CHECK(prod.max_message_bits() == 45'017);
  const auto longest = random_bitstring(45'017, rng);
  CHECK(decode_message(encode_message(longest, prod), prod) == longest);
  try {
    encode_message(random_bitstring(45'018, rng), prod);
    FAIL("expected MessageTooLong");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MessageTooLong);
  }
}

TEST_CASE("escape pairs keep every digit below p") {
  const AuthParams params{kMersenne61, 6};
  for (const std::uint64_t special : {kMersenne61 - 1, kMersenne61}) {
    BitString m;
    m.append_uint(special, 61);
    m.append_uint(12345, 61);
    const auto enc = encode_message(m, params);
    CHECK(enc.digits[1] == kMersenne61 - 1);
    CHECK(enc.digits[2] == special - (kMersenne61 - 1));
    CHECK(enc.digits[3] == 12345);
    for (const auto c : enc.digits) CHECK(c < kMersenne61);
    CHECK(decode_message(enc, params) == m);
  }
  // Distinct messages never collide, including across the escape values.
  BitString a, b;
  a.append_uint(kMersenne61 - 1, 61);
  b.append_uint(kMersenne61 - 1, 61);
  b.append_uint(0, 61);
  CHECK(!(encode_message(a, params).digits == encode_message(b, params).digits));
}

TEST_CASE("hand-computed tag") {
  const AuthParams small{5, 3};
  const AuthKey key{{1, 2, 3}};
  const EncodedMessage msg{{1, 0, 4}};
  CHECK(tag(key, msg, small).value == 3);
  CHECK(verify(key, msg, Tag{3}, small));
  CHECK(!verify(key, msg, Tag{2}, small));
  CHECK(tag(AuthKey{{0, 0, 0}}, msg, small).value == 0);
  CHECK_THROWS_AS(tag(AuthKey{{1, 2}}, msg, small), Error);
  CHECK_THROWS_AS((AuthParams{4, 3}.validate()), Error);
  CHECK_THROWS_AS((AuthParams{5, 1}.validate()), Error);
}

TEST_CASE("full-width products are exact") {
  const AuthParams params{kMersenne61, 2};
  const std::uint64_t big = kMersenne61 - 1;  // = -1 mod p
  const AuthKey key{{big, big}};
  const EncodedMessage msg{{1, big}};
  // (-1)(1) + (-1)(-1) = 0
  CHECK(tag(key, msg, params).value == 0);
  const EncodedMessage msg2{{1, 2}};
  CHECK(tag(key, msg2, params).value == kMersenne61 - 3);
}

TEST_CASE("orthogonal-array property by brute force") {
  for (const std::uint64_t p : {2u, 3u, 5u})
    for (const std::size_t d : {2u, 3u}) {
      const AuthParams params{p, d};
      const auto vecs = all_vectors(p, d);
      std::size_t messages = 0;
      for (const auto& c : vecs) {
        if (!leading_one(c)) continue;
        ++messages;
        std::vector<std::size_t> count(p, 0);
        for (const auto& r : vecs) ++count[tag(AuthKey{r}, EncodedMessage{c}, params).value];
        for (const auto n : count) CHECK(n == static_cast<std::size_t>(std::pow(p, d - 1)));
      }
      // kappa = p^d keys, m = (p^d - 1)/(p - 1) messages, n = p tags.
      const auto kappa = static_cast<std::uint64_t>(std::pow(p, d));
      CHECK(messages == (kappa - 1) / (p - 1));
      CHECK(kappa >= messages * (p - 1) + 1);
    }
}

TEST_CASE("substitution attack succeeds with frequency 1/p") {
  const std::uint64_t p = 3;
  const AuthParams params{p, 2};
  const auto vecs = all_vectors(p, 2);
  std::vector<std::vector<std::uint64_t>> msgs;
  for (const auto& c : vecs)
    if (leading_one(c)) msgs.push_back(c);
  // Eve sees (m, t). Among the keys consistent with it, count how often a
  // substituted (m', t') verifies, for every m' != m and every t'.
  for (const auto& m : msgs)
    for (std::uint64_t t = 0; t < p; ++t) {
      std::vector<std::vector<std::uint64_t>> consistent;
      for (const auto& r : vecs)
        if (naive_tag(r, m, p) == t) consistent.push_back(r);
      for (const auto& m2 : msgs) {
        if (m2 == m) continue;
        for (std::uint64_t t2 = 0; t2 < p; ++t2) {
          std::size_t wins = 0;
          for (const auto& r : consistent) wins += verify(AuthKey{r}, EncodedMessage{m2}, Tag{t2}, params);
          CHECK(double(wins) / double(consistent.size()) == doctest::Approx(1.0 / p));
        }
      }
    }
}

TEST_CASE("tag is linear in the key") {
  Rng rng(RngSeed{4});
  const auto prod = AuthParams::production();
  auto draw = [&] {
    AuthKey k;
    for (std::size_t i = 0; i < prod.d; ++i) k.digits.push_back(rng.below(kMersenne61));
    return k;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const auto k1 = draw(), k2 = draw();
    AuthKey sum;
    for (std::size_t i = 0; i < prod.d; ++i) sum.digits.push_back((k1.digits[i] + k2.digits[i]) % kMersenne61);
    const auto msg = encode_message(random_bitstring(20'000, rng), prod);
    const auto lhs = tag(sum, msg, prod).value;
    const auto rhs = (tag(k1, msg, prod).value + tag(k2, msg, prod).value) % kMersenne61;
    CHECK(lhs == rhs);
    CHECK(tag(k1, msg, prod, Execution::Parallel) == tag(k1, msg, prod, Execution::Serial));
  }
}

TEST_CASE("self-consistency and single-bit changes") {
  Rng rng(RngSeed{5});
  const auto params = AuthParams::for_message_bits(1000);
  CHECK(params.d == 18);
  for (int i = 0; i < 100; ++i) {
    const auto key = key_from_bits(random_bitstring(params.key_bits() + 200, rng), params).key;
    auto m = random_bitstring(1000, rng);
    const auto t = tag_bits(key, m, params);
    CHECK(verify_bits(key, m, t, params));
    m.flip(rng.below(1000));
    CHECK(!verify_bits(key, m, t, params));
  }
  const auto key = key_from_bits(random_bitstring(params.key_bits() + 200, rng), params).key;
  CHECK(!verify_bits(key, random_bitstring(2000, rng), Tag{0}, params));
}

TEST_CASE("tag serialization") {
  const Tag t{kMersenne61 - 5};
  const auto bytes = t.to_bytes();
  CHECK((bytes[0] >> 5) == 0);
  CHECK(Tag::from_bits(t.to_bits()) == t);
  CHECK(t.to_bits().size() == 64);
}

TEST_CASE("test vectors round-trip") {
  Rng rng(RngSeed{6});
  const auto params = AuthParams::for_message_bits(300);
  TestVector v;
  v.params = params;
  v.key = key_from_bits(random_bitstring(params.key_bits() + 200, rng), params).key;
  v.message = random_bitstring(300, rng);
  v.tag = tag_bits(v.key, v.message, params);
  const auto line = format_test_vector(v);
  const auto back = parse_test_vector(line);
  CHECK(back.params.d == params.d);
  CHECK(back.key.digits == v.key.digits);
  CHECK(back.message == v.message);
  CHECK(back.tag == v.tag);
  CHECK(verify_bits(back.key, back.message, back.tag, back.params));
  CHECK_THROWS_AS(parse_test_vector("5 3 00"), Error);
}

TEST_CASE("primality") {
  CHECK(is_prime(kMersenne61));
  CHECK(is_prime(2));
  CHECK(!is_prime(1));
  CHECK(!is_prime((std::uint64_t{1} << 59) - 1));  // 179951 * 3203431780337
  CHECK(is_prime((std::uint64_t{1} << 31) - 1));
}
