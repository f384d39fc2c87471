#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qid/channel.hpp"
#include "qid/errors.hpp"

using namespace qid;

namespace {

double sifted_error_rate(const RawTranscript& t) {
  const auto s = sift(t);
  return static_cast<double>(hamming_distance(s.alice_bits, s.bob_bits)) / static_cast<double>(s.positions.size());
}

}  // namespace

TEST_CASE("eta defaults to the published overall figure") {
  ChannelParams p;
  CHECK(p.eta() == doctest::Approx(0.12));
  p.eta_overall.reset();
  CHECK(p.eta() == doctest::Approx(0.63 * 0.35 * 0.55));
  CHECK(std::round(p.eta() * 100) / 100 == doctest::Approx(0.12));
  ChannelParams q;
  CHECK(q.with_eta_tl(0.315).eta() == doctest::Approx(0.06));
}

TEST_CASE("noiseless channel: matched bases reproduce Alice's bit") {
  ChannelParams p;
  p.mu = 5.0;
  const auto t = run_raw_transmission(p, 20000, NoEve{}, RngSeed{1});
  const auto s = sift(t);
  CHECK(s.positions.size() > 1000);
  CHECK(s.alice_bits == s.bob_bits);
}

TEST_CASE("detection count follows the Poisson model") {
  ChannelParams p;  // eta 0.12, mu 0.8
  const std::size_t n = 1'000'000;
  const auto t = run_raw_transmission(p, n, NoEve{}, RngSeed{2});
  const double pd = 1 - std::exp(-0.096);
  CHECK(pd * n == doctest::Approx(91536).epsilon(1e-5));
  const double sigma = std::sqrt(n * pd * (1 - pd));
  CHECK(std::abs(double(t.detected_count()) - pd * n) < 4 * sigma);
}

TEST_CASE("detections are independent of Alice's bit and basis") {
  ChannelParams p;
  p.mu = 2.0;
  const std::size_t n = 1'000'000;
  const auto t = run_raw_transmission(p, n, NoEve{}, RngSeed{3});
  const double pd = p.detection_probability();
  for (const BitString* field : {&t.alice_bits, &t.alice_bases}) {
    std::size_t ones = 0, det_and_one = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!field->get(i)) continue;
      ++ones;
      det_and_one += t.detected.get(i);
    }
    const double rate = double(det_and_one) / ones;
    CHECK(std::abs(rate - pd) < oracle::four_sigma(pd, ones));
  }
}

TEST_CASE("sifting") {
  ChannelParams p;
  p.mu = 3.0;
  auto t = run_raw_transmission(p, 5000, NoEve{}, RngSeed{4});

  RawTranscript same = t;
  same.bob_bases = same.alice_bases;
  CHECK(sift(same).positions == same.detected_positions());

  RawTranscript opposite = t;
  opposite.bob_bases = opposite.alice_bases ^ BitString(opposite.n_pulses, true);
  CHECK(sift(opposite).positions.empty());

  const auto all = sift(t);
  std::vector<std::size_t> exclude(all.positions.begin(), all.positions.begin() + 10);
  const auto rest = sift(t, exclude);
  CHECK(rest.positions.size() == all.positions.size() - 10);
  CHECK(rest.positions.front() == all.positions[10]);
}

TEST_CASE("sifted fraction of detections is one half") {
  ChannelParams p;
  p.mu = 1.0;
  p.eta_overall = 1.0;  // detect about 63% so 10^5 detections need fewer pulses
  const auto t = run_raw_transmission(p, 160'000, NoEve{}, RngSeed{5});
  const double d = double(t.detected_count());
  CHECK(d > 1e5);
  const double s = double(sift(t).positions.size());
  CHECK(std::abs(s / d - 0.5) < oracle::four_sigma(0.5, d));
}

TEST_CASE("intrinsic error rate is reproduced") {
  ChannelParams p;
  p.mu = 1.0;
  p.eta_overall = 1.0;
  p.eps_intrinsic = 0.03;
  const auto t = run_raw_transmission(p, 400'000, NoEve{}, RngSeed{6});
  const auto s = sift(t);
  CHECK(std::abs(sifted_error_rate(t) - 0.03) < oracle::four_sigma(0.03, double(s.positions.size())));
}

TEST_CASE("intercept-resend error rate") {
  // Enumerate Eve's basis and Bob's coin over the matched-basis table:
  // Eve in the right basis (1/2) adds nothing, the wrong basis (1/2) gives
  // Bob a fair coin, so the induced error is f/4 on top of eps(1 - f/2).
  for (const double f : {0.0, 0.5, 1.0}) {
    const double eps = 0.01;
    ChannelParams p;
    p.mu = 1.0;
    p.eta_overall = 1.0;
    p.eps_intrinsic = eps;
    const auto t = run_raw_transmission(p, 400'000, InterceptResend{f}, RngSeed{7});
    const auto n = double(sift(t).positions.size());
    CHECK(n > 1e5);
    const double expected = eps + f * (0.25 - eps / 2);
    CHECK(std::abs(sifted_error_rate(t) - expected) < oracle::four_sigma(expected, n));
  }
}

TEST_CASE("beamsplitting leaves every Bob-visible field unchanged") {
  ChannelParams p;
  p.eps_intrinsic = 0.02;
  const auto a = run_raw_transmission(p, 200'000, NoEve{}, RngSeed{8});
  const auto b = run_raw_transmission(p, 200'000, Beamsplit{0.3}, RngSeed{8});
  CHECK(a.alice_bits == b.alice_bits);
  CHECK(a.alice_bases == b.alice_bases);
  CHECK(a.bob_bases == b.bob_bases);
  CHECK(a.detected == b.detected);
  CHECK(a.bob_bits == b.bob_bits);
  const auto s = sift(b);
  const double tapped = eve_information_bits(b, Beamsplit{0.3});
  CHECK(std::abs(tapped / s.positions.size() - 0.3) < oracle::four_sigma(0.3, double(s.positions.size())));
}

TEST_CASE("eve information") {
  ChannelParams p;
  const auto t = run_raw_transmission(p, 100'000, NoEve{}, RngSeed{9});
  CHECK(eve_information_bits(t, NoEve{}) == 0.0);

  // A transcript with exactly 100 sifted bits.
  RawTranscript small;
  small.n_pulses = 100;
  small.alice_bits = small.alice_bases = small.bob_bases = small.bob_bits = BitString(100);
  small.detected = BitString(100, true);
  small.eve_active = small.eve_bases = small.eve_bits = BitString(100);
  CHECK(eve_information_bits(small, PerBitGuess{1.0}) == doctest::Approx(100));

  small.n_pulses = 10'000;
  small.alice_bits = small.alice_bases = small.bob_bases = small.bob_bits = BitString(10'000);
  small.detected = BitString(10'000, true);
  small.eve_active = small.eve_bases = small.eve_bits = BitString(10'000);
  const double expected = 1e4 * (1 - oracle::h2(0.6));
  CHECK(expected == doctest::Approx(290.3).epsilon(1e-3));
  CHECK(eve_information_bits(small, PerBitGuess{0.6}) == doctest::Approx(expected));
}

TEST_CASE("intercept-resend information counts basis-matched interceptions") {
  ChannelParams p;
  p.mu = 1.0;
  p.eta_overall = 1.0;
  const auto t = run_raw_transmission(p, 200'000, InterceptResend{1.0}, RngSeed{10});
  const double n = double(sift(t).positions.size());
  CHECK(std::abs(eve_information_bits(t, InterceptResend{1.0}) / n - 0.5) < oracle::four_sigma(0.5, n));
}

TEST_CASE("serial and parallel transmission agree bit for bit") {
  ChannelParams p;
  p.eps_intrinsic = 0.01;
  for (const EveStrategy& eve : {EveStrategy{NoEve{}}, EveStrategy{InterceptResend{0.4}},
                                 EveStrategy{PerBitGuess{0.7}}, EveStrategy{Beamsplit{0.2}}}) {
    const auto a = run_raw_transmission(p, 300'001, eve, RngSeed{11}, Execution::Serial);
    const auto b = run_raw_transmission(p, 300'001, eve, RngSeed{11}, Execution::Parallel);
    CHECK(a.bob_bits == b.bob_bits);
    CHECK(a.detected == b.detected);
    CHECK(a.eve_bits == b.eve_bits);
    CHECK(a.eve_active == b.eve_active);
  }
}

TEST_CASE("parameter validation") {
  ChannelParams p;
  p.eta_tl = 0;
  CHECK_THROWS_AS(run_raw_transmission(p, 10, NoEve{}, RngSeed{1}), Error);
  CHECK_THROWS_AS(run_raw_transmission(ChannelParams{}, 0, NoEve{}, RngSeed{1}), Error);
  CHECK_THROWS_AS(validate(EveStrategy{PerBitGuess{0.4}}), Error);
  CHECK_THROWS_AS(validate(EveStrategy{InterceptResend{1.5}}), Error);
}

TEST_CASE("transcript csv") {
  ChannelParams p;
  p.mu = 10;
  const auto t = run_raw_transmission(p, 3, NoEve{}, RngSeed{12});
  std::ostringstream os;
  write_transcript_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "pulse_index,alice_bit,alice_basis,bob_basis,detected,bob_bit");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK((line.back() == ',' || line.back() == '0' || line.back() == '1'));
  }
  CHECK(rows == 3);
}
