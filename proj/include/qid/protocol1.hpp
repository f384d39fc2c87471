#pragma once

// Three-pass identification over an unjammable public channel. Parties
// share a stack of IS triads; each attempt uses one triad, which is
// discarded whatever the outcome.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <vector>

#include "qid/bitstring.hpp"
#include "qid/channel.hpp"
#include "qid/rng.hpp"
#include "qid/secret_pool.hpp"

namespace qid {

struct Protocol1Config {
  std::size_t n_is = 50;
  double eps_tol = 0.01;
  std::size_t k = 1;  // maximum tolerated mismatches per pass

  // k = [eps * n], the smallest integer strictly greater than eps * n.
  static Protocol1Config from_error_rate(std::size_t n_is, double eps);
  void validate() const;
};

struct Party1State {
  std::vector<Triad> triads;
  std::size_t pointer = 0;  // first unused triad
  Role role = Role::Alice;

  bool exhausted() const { return pointer >= triads.size(); }
};

enum class IdentOutcome { Success, AbortPass1, AbortPass2, AbortPass3 };

std::string_view outcome_name(IdentOutcome o);

// Accept iff the Hamming distance is at most k.
bool compare_with_tolerance(const BitString& a, const BitString& b, std::size_t k);

struct P1Message {
  enum class Kind { Pointer, Sequence, Abort } kind = Kind::Pointer;
  int pass = 0;  // 1..3 for sequences; pass being aborted for Abort
  Role from = Role::Alice;
  std::size_t pointer = 0;
  BitString payload;
};

// Alice's side: announces her pointer, sends is1, checks is2, sends is3.
class Protocol1Initiator {
 public:
  Protocol1Initiator(Party1State& state, const Protocol1Config& cfg) : state_(state), cfg_(cfg) {}

  P1Message start();
  std::optional<P1Message> on_message(const P1Message& msg);
  // Called once Bob has nothing more to say: no abort after is3 is success.
  void conclude();

  bool finished() const { return finished_; }
  std::optional<IdentOutcome> outcome() const { return outcome_; }

 private:
  const Triad& current() const;
  void discard_triad();

  Party1State& state_;
  Protocol1Config cfg_;
  bool synced_ = false;
  bool awaiting_verdict_ = false;
  bool finished_ = false;
  std::optional<IdentOutcome> outcome_;
};

// An impostor in Bob's place cannot check is1 and accepts whatever arrives.
enum class ResponderMode { Honest, Impostor };

// Bob's side: answers the pointer, checks is1, sends is2, checks is3.
class Protocol1Responder {
 public:
  Protocol1Responder(Party1State& state, const Protocol1Config& cfg, ResponderMode mode = ResponderMode::Honest)
      : state_(state), cfg_(cfg), mode_(mode) {}

  std::optional<P1Message> on_message(const P1Message& msg);

  bool finished() const { return finished_; }
  std::optional<IdentOutcome> outcome() const { return outcome_; }

 private:
  const Triad& current() const;
  void discard_triad();

  Party1State& state_;
  Protocol1Config cfg_;
  ResponderMode mode_;
  bool finished_ = false;
  std::optional<IdentOutcome> outcome_;
};

// Public channel of Protocol I: cannot be modified by an adversary but the
// physical link may flip payload bits.
struct NoisyLink {
  double flip_prob = 0.0;
  BitString carry(const BitString& payload, Rng& rng) const;
};

struct P1TranscriptEntry {
  int pass = 0;
  std::string direction;  // "A->B" / "B->A"
  std::string kind;       // pointer / sequence / abort
  BitString payload;
  std::string verdict;
};

struct Protocol1Result {
  IdentOutcome outcome = IdentOutcome::Success;
  std::size_t alice_pointer = 0;
  std::size_t bob_pointer = 0;
  std::vector<P1TranscriptEntry> transcript;
};

// Pointers travel reliably; sequence payloads cross the noisy link.
// Throws PoolExhausted when no triad remains after pointer sync.
Protocol1Result run_protocol1(Party1State& alice, Party1State& bob, const NoisyLink& link,
                              const Protocol1Config& cfg, Rng& rng, ResponderMode bob_mode = ResponderMode::Honest);

std::vector<Triad> make_triads(std::size_t count, std::size_t n_is, Rng& rng);

// Eve's guess of `true_is` gets bit i right with probability p[i].
BitString guess_sequence(const BitString& true_is, std::span<const double> p, Rng& rng);
bool eve_impersonation_trial(std::span<const double> p, const Protocol1Config& cfg, Rng& rng);

double impersonation_frequency(std::span<const double> p, const Protocol1Config& cfg, std::uint64_t trials,
                               RngSeed seed, Execution exec = Execution::Parallel);

enum class Protocol1Scenario {
  Honest,    // both parties hold the same triads
  Impostor,  // Bob's triads are Eve's guesses (per-bit correctness p_bar)
};

struct Protocol1Tally {
  std::uint64_t trials = 0;
  std::uint64_t success = 0;
  std::uint64_t abort_pass1 = 0;
  std::uint64_t abort_pass2 = 0;
  std::uint64_t abort_pass3 = 0;
};

// Independent sessions, trial t drawing from stream t of `seed`.
Protocol1Tally run_protocol1_trials(const Protocol1Config& cfg, const NoisyLink& link, Protocol1Scenario scenario,
                                    double p_bar, std::uint64_t trials, RngSeed seed,
                                    Execution exec = Execution::Parallel);

// pass,direction,kind,payload_hex,verdict
void write_protocol1_csv(std::ostream& os, const std::vector<P1TranscriptEntry>& transcript);

}  // namespace qid
