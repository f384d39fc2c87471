#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "qid/budget.hpp"
#include "qid/errors.hpp"
#include "qid/protocol1.hpp"

using namespace qid;

namespace {

Party1State party(std::vector<Triad> triads, Role role) { return Party1State{std::move(triads), 0, role}; }

}  // namespace

TEST_CASE("tolerance k uses the strict bracket") {
  CHECK(Protocol1Config::from_error_rate(50, 0.01).k == 1);
  CHECK(tolerated_errors(4, 0.5) == 3);  // [2] = 3
  CHECK(tolerated_errors(1, 0.5) == 1);  // [0.5] = 1
  CHECK_THROWS_AS(Protocol1Config::from_error_rate(2, 0.5), Error);  // k = 2 is not below n
}

TEST_CASE("compare_with_tolerance") {
  Rng rng(RngSeed{1});
  const auto a = random_bitstring(50, rng);
  CHECK(compare_with_tolerance(a, a, 0));
  auto b = a;
  b.flip(3);
  CHECK(compare_with_tolerance(a, b, Protocol1Config::from_error_rate(50, 0.01).k));
  b.flip(17);
  CHECK(!compare_with_tolerance(a, b, 1));
  CHECK_THROWS_AS(compare_with_tolerance(a, BitString(49), 1), Error);
}

TEST_CASE("honest noiseless run succeeds and uses one triad") {
  Rng rng(RngSeed{2});
  const auto triads = make_triads(3, 50, rng);
  auto alice = party(triads, Role::Alice);
  auto bob = party(triads, Role::Bob);
  const Protocol1Config cfg{50, 0.0, 0};
  const auto r = run_protocol1(alice, bob, NoisyLink{0.0}, cfg, rng);
  CHECK(r.outcome == IdentOutcome::Success);
  CHECK(r.alice_pointer == 1);
  CHECK(r.bob_pointer == 1);
  std::size_t sequences = 0;
  for (const auto& e : r.transcript) sequences += e.kind == "sequence";
  CHECK(sequences == 3);
}

TEST_CASE("impostor in Bob's place is stopped at pass 2") {
  Rng rng(RngSeed{3});
  auto alice = party(make_triads(2, 50, rng), Role::Alice);
  auto eve = party(make_triads(2, 50, rng), Role::Bob);
  const auto r = run_protocol1(alice, eve, NoisyLink{0.0}, Protocol1Config{}, rng, ResponderMode::Impostor);
  CHECK(r.outcome == IdentOutcome::AbortPass2);
  CHECK(r.alice_pointer == 1);
  CHECK(r.bob_pointer == 1);
}

TEST_CASE("wrong triads on an honest responder abort at pass 1") {
  Rng rng(RngSeed{4});
  auto alice = party(make_triads(1, 50, rng), Role::Alice);
  auto bob = party(make_triads(1, 50, rng), Role::Bob);
  const auto r = run_protocol1(alice, bob, NoisyLink{0.0}, Protocol1Config{}, rng);
  CHECK(r.outcome == IdentOutcome::AbortPass1);
  CHECK(r.alice_pointer == 1);
  CHECK(r.bob_pointer == 1);
}

TEST_CASE("pointer sync picks the higher pointer and exhaustion is reported") {
  Rng rng(RngSeed{5});
  const auto triads = make_triads(3, 20, rng);
  auto alice = party(triads, Role::Alice);
  auto bob = party(triads, Role::Bob);
  bob.pointer = 2;
  const Protocol1Config cfg{20, 0.0, 0};
  const auto r = run_protocol1(alice, bob, NoisyLink{0.0}, cfg, rng);
  CHECK(r.outcome == IdentOutcome::Success);
  CHECK(r.alice_pointer == 3);
  CHECK(r.bob_pointer == 3);
  CHECK_THROWS_AS(run_protocol1(alice, bob, NoisyLink{0.0}, cfg, rng), Error);
}

TEST_CASE("no triad is ever sent twice") {
  Rng rng(RngSeed{6});
  const auto triads = make_triads(200, 50, rng);
  auto alice = party(triads, Role::Alice);
  auto bob = party(triads, Role::Bob);
  std::set<std::string> seen;
  const Protocol1Config cfg = Protocol1Config::from_error_rate(50, 0.01);
  while (!alice.exhausted()) {
    // A noisy link makes aborts at every pass happen along the way.
    const auto r = run_protocol1(alice, bob, NoisyLink{0.03}, cfg, rng);
    CHECK(r.alice_pointer == r.bob_pointer);
    for (const auto& e : r.transcript)
      if (e.kind == "sequence") CHECK(seen.insert(e.direction + std::to_string(e.pass) + e.payload.to_hex()).second);
  }
}

TEST_CASE("replayed is1 from an aborted session does not get past Bob") {
  Rng rng(RngSeed{7});
  const Protocol1Config cfg = Protocol1Config::from_error_rate(50, 0.01);
  std::size_t replay_accepted = 0;
  const int sessions = 2000;
  for (int i = 0; i < sessions; ++i) {
    const auto triads = make_triads(2, 50, rng);
    auto alice = party(triads, Role::Alice);
    auto bob = party(triads, Role::Bob);
    auto eve_as_bob = party(make_triads(2, 50, rng), Role::Bob);

    // Session 1: Eve sits in Bob's place and records is1; Alice aborts at pass 2.
    const auto first = run_protocol1(alice, eve_as_bob, NoisyLink{0.0}, cfg, rng, ResponderMode::Impostor);
    REQUIRE(first.outcome == IdentOutcome::AbortPass2);
    const BitString captured = first.transcript.at(2).payload;  // pointer, pointer, is1

    // Session 2: Eve plays Alice towards the real Bob, announcing the
    // pointer of the triad she saw. is1 now passes, but is3 is still unknown.
    Protocol1Responder responder(bob, cfg);
    P1Message hello;
    hello.kind = P1Message::Kind::Pointer;
    hello.pointer = 0;
    responder.on_message(hello);
    P1Message replay;
    replay.kind = P1Message::Kind::Sequence;
    replay.pass = 1;
    replay.payload = captured;
    const auto answer = responder.on_message(replay);
    REQUIRE(answer);
    REQUIRE(answer->kind == P1Message::Kind::Sequence);
    P1Message guess;
    guess.kind = P1Message::Kind::Sequence;
    guess.pass = 3;
    guess.payload = random_bitstring(50, rng);  // p_bar = 1/2 per bit
    responder.on_message(guess);
    replay_accepted += responder.outcome() == IdentOutcome::Success;
    CHECK(bob.pointer == 1);  // the replayed triad is gone either way
  }
  // A blind is3 guess passes with probability 51 / 2^50.
  CHECK(replay_accepted == 0);
}

TEST_CASE("honest success rate matches the binomial oracle") {
  const Protocol1Config cfg = Protocol1Config::from_error_rate(50, 0.01);
  const std::uint64_t trials = 10'000;
  const auto tally =
      run_protocol1_trials(cfg, NoisyLink{0.01}, Protocol1Scenario::Honest, 0.6, trials, RngSeed{8});
  const double one_pass = oracle::binom_cdf(50, 1, 0.01);
  const double expected = std::pow(one_pass, 3);
  CHECK(expected == doctest::Approx(0.7550).epsilon(1e-3));
  const double freq = double(tally.success) / trials;
  CHECK(std::abs(freq - expected) < oracle::four_sigma(expected, trials));
  CHECK(tally.success + tally.abort_pass1 + tally.abort_pass2 + tally.abort_pass3 == trials);
}

TEST_CASE("serial and parallel trial runners agree") {
  const Protocol1Config cfg = Protocol1Config::from_error_rate(50, 0.01);
  const auto a = run_protocol1_trials(cfg, NoisyLink{0.02}, Protocol1Scenario::Honest, 0.6, 3000, RngSeed{9},
                                      Execution::Serial);
  const auto b = run_protocol1_trials(cfg, NoisyLink{0.02}, Protocol1Scenario::Honest, 0.6, 3000, RngSeed{9},
                                      Execution::Parallel);
  CHECK(a.success == b.success);
  CHECK(a.abort_pass2 == b.abort_pass2);
}

TEST_CASE("impersonation trials") {
  Rng rng(RngSeed{10});
  const Protocol1Config all_right{20, 0.05, 1};
  const std::vector<double> certain(20, 1.0);
  for (int i = 0; i < 100; ++i) CHECK(eve_impersonation_trial(certain, all_right, rng));

  const Protocol1Config two{2, 0.25, 1};
  const std::vector<double> p2{0.6, 0.6};
  const std::uint64_t trials = 200'000;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < trials; ++i) hits += eve_impersonation_trial(p2, two, rng);
  // p1 p2 + q1 p2 + p1 q2
  const double expected = 0.6 * 0.6 + 0.4 * 0.6 + 0.6 * 0.4;
  CHECK(expected == doctest::Approx(0.84));
  CHECK(std::abs(double(hits) / trials - expected) < oracle::four_sigma(expected, trials));
  CHECK(impersonation_frequency(p2, two, 0, RngSeed{1}) == 0.0);
  CHECK_THROWS_AS(impersonation_frequency(p2, all_right, 10, RngSeed{1}), Error);
}

TEST_CASE("transcript csv") {
  Rng rng(RngSeed{11});
  const auto triads = make_triads(1, 8, rng);
  auto alice = party(triads, Role::Alice);
  auto bob = party(triads, Role::Bob);
  const auto r = run_protocol1(alice, bob, NoisyLink{0.0}, Protocol1Config{8, 0.0, 0}, rng);
  std::ostringstream os;
  write_protocol1_csv(os, r.transcript);
  CHECK(os.str().rfind("pass,direction,kind,payload_hex,verdict\n", 0) == 0);
  CHECK(os.str().find("3,A->B,sequence,8:") != std::string::npos);
  CHECK(os.str().find("SUCCESS") != std::string::npos);
}
