#include "qid/protocol1.hpp"

#include <ostream>
#include <vector>

#include "qid/budget.hpp"
#include "qid/errors.hpp"
#include "qid/kernels.hpp"

namespace qid {

Protocol1Config Protocol1Config::from_error_rate(std::size_t n_is, double eps) {
  Protocol1Config cfg{n_is, eps, tolerated_errors(n_is, eps)};
  cfg.validate();
  return cfg;
}

void Protocol1Config::validate() const {
  if (n_is == 0) throw Error(Errc::RangeError, "n_is must be positive");
  if (!(eps_tol >= 0.0 && eps_tol < 1.0)) throw Error(Errc::RangeError, "eps_tol outside [0, 1)");
  if (k >= n_is) throw Error(Errc::RangeError, "k must be below n_is");
}

std::string_view outcome_name(IdentOutcome o) {
  switch (o) {
    case IdentOutcome::Success: return "SUCCESS";
    case IdentOutcome::AbortPass1: return "ABORT_PASS1";
    case IdentOutcome::AbortPass2: return "ABORT_PASS2";
    case IdentOutcome::AbortPass3: return "ABORT_PASS3";
  }
  return "?";
}

bool compare_with_tolerance(const BitString& a, const BitString& b, std::size_t k) {
  return hamming_distance(a, b) <= k;
}

namespace {

IdentOutcome abort_outcome(int pass) {
  switch (pass) {
    case 1: return IdentOutcome::AbortPass1;
    case 2: return IdentOutcome::AbortPass2;
    default: return IdentOutcome::AbortPass3;
  }
}

const BitString& sequence(const Triad& t, int pass) {
  return pass == 1 ? t.is1 : pass == 2 ? t.is2 : t.is3;
}

P1Message abort_message(Role from, int pass) {
  P1Message m;
  m.kind = P1Message::Kind::Abort;
  m.from = from;
  m.pass = pass;
  return m;
}

P1Message sequence_message(Role from, int pass, const Triad& t) {
  P1Message m;
  m.kind = P1Message::Kind::Sequence;
  m.from = from;
  m.pass = pass;
  m.payload = sequence(t, pass);
  return m;
}

void sync_pointer(Party1State& state, std::size_t remote) {
  state.pointer = pointer_sync(state.pointer, remote);
  if (state.exhausted()) throw Error(Errc::PoolExhausted, "no unused IS triad left");
}

}  // namespace

const Triad& Protocol1Initiator::current() const { return state_.triads.at(state_.pointer); }

void Protocol1Initiator::discard_triad() { ++state_.pointer; }

P1Message Protocol1Initiator::start() {
  P1Message m;
  m.kind = P1Message::Kind::Pointer;
  m.from = Role::Alice;
  m.pointer = state_.pointer;
  return m;
}

std::optional<P1Message> Protocol1Initiator::on_message(const P1Message& msg) {
  if (finished_) return std::nullopt;
  switch (msg.kind) {
    case P1Message::Kind::Pointer:
      sync_pointer(state_, msg.pointer);
      synced_ = true;
      return sequence_message(Role::Alice, 1, current());
    case P1Message::Kind::Abort:
      // Bob rejected is1 or is3. After is3 the triad is already gone.
      if (!awaiting_verdict_) discard_triad();
      finished_ = true;
      outcome_ = abort_outcome(msg.pass);
      return std::nullopt;
    case P1Message::Kind::Sequence: {
      if (!synced_ || msg.pass != 2) throw Error(Errc::InvalidArgument, "unexpected message for Alice");
      const Triad& t = current();
      if (!compare_with_tolerance(msg.payload, t.is2, cfg_.k)) {
        discard_triad();
        finished_ = true;
        outcome_ = IdentOutcome::AbortPass2;
        return abort_message(Role::Alice, 2);
      }
      P1Message out = sequence_message(Role::Alice, 3, t);
      discard_triad();
      awaiting_verdict_ = true;
      return out;
    }
  }
  return std::nullopt;
}

void Protocol1Initiator::conclude() {
  if (finished_ || !awaiting_verdict_) return;
  finished_ = true;
  outcome_ = IdentOutcome::Success;
}

const Triad& Protocol1Responder::current() const { return state_.triads.at(state_.pointer); }

void Protocol1Responder::discard_triad() { ++state_.pointer; }

std::optional<P1Message> Protocol1Responder::on_message(const P1Message& msg) {
  if (finished_) return std::nullopt;
  switch (msg.kind) {
    case P1Message::Kind::Pointer: {
      const std::size_t mine = state_.pointer;
      sync_pointer(state_, msg.pointer);
      P1Message m;
      m.kind = P1Message::Kind::Pointer;
      m.from = Role::Bob;
      m.pointer = mine;
      return m;
    }
    case P1Message::Kind::Abort:
      discard_triad();
      finished_ = true;
      outcome_ = abort_outcome(msg.pass);
      return std::nullopt;
    case P1Message::Kind::Sequence: {
      const Triad& t = current();
      if (msg.pass == 1) {
        if (mode_ == ResponderMode::Honest && !compare_with_tolerance(msg.payload, t.is1, cfg_.k)) {
          discard_triad();
          finished_ = true;
          outcome_ = IdentOutcome::AbortPass1;
          return abort_message(Role::Bob, 1);
        }
        return sequence_message(Role::Bob, 2, t);
      }
      if (msg.pass == 3) {
        const bool ok = mode_ == ResponderMode::Impostor || compare_with_tolerance(msg.payload, t.is3, cfg_.k);
        discard_triad();
        finished_ = true;
        if (ok) {
          outcome_ = IdentOutcome::Success;
          return std::nullopt;
        }
        outcome_ = IdentOutcome::AbortPass3;
        return abort_message(Role::Bob, 3);
      }
      throw Error(Errc::InvalidArgument, "unexpected message for Bob");
    }
  }
  return std::nullopt;
}

BitString NoisyLink::carry(const BitString& payload, Rng& rng) const {
  BitString out = payload;
  if (flip_prob <= 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (rng.bernoulli(flip_prob)) out.flip(i);
  return out;
}

Protocol1Result run_protocol1(Party1State& alice, Party1State& bob, const NoisyLink& link,
                              const Protocol1Config& cfg, Rng& rng, ResponderMode bob_mode) {
  cfg.validate();
  Protocol1Initiator a(alice, cfg);
  Protocol1Responder b(bob, cfg, bob_mode);
  Protocol1Result result;

  auto log = [&](const P1Message& m, const std::string& verdict) {
    P1TranscriptEntry e;
    e.pass = m.pass;
    e.direction = m.from == Role::Alice ? "A->B" : "B->A";
    switch (m.kind) {
      case P1Message::Kind::Pointer:
        e.kind = "pointer";
        e.payload.append_uint(m.pointer, 64);
        break;
      case P1Message::Kind::Sequence:
        e.kind = "sequence";
        e.payload = m.payload;
        break;
      case P1Message::Kind::Abort: e.kind = "abort"; break;
    }
    e.verdict = verdict;
    result.transcript.push_back(std::move(e));
  };

  std::optional<P1Message> next = a.start();
  while (next) {
    P1Message m = std::move(*next);
    if (m.kind == P1Message::Kind::Sequence) m.payload = link.carry(m.payload, rng);
    if (m.from == Role::Alice) {
      next = b.on_message(m);
      log(m, b.finished() ? std::string(outcome_name(*b.outcome())) : "accepted");
    } else {
      next = a.on_message(m);
      log(m, a.finished() ? std::string(outcome_name(*a.outcome())) : "accepted");
    }
  }
  a.conclude();
  result.outcome = *a.outcome();
  result.alice_pointer = alice.pointer;
  result.bob_pointer = bob.pointer;
  return result;
}

std::vector<Triad> make_triads(std::size_t count, std::size_t n_is, Rng& rng) {
  std::vector<Triad> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Triad t;
    t.is1 = random_bitstring(n_is, rng);
    t.is2 = random_bitstring(n_is, rng);
    t.is3 = random_bitstring(n_is, rng);
    out.push_back(std::move(t));
  }
  return out;
}

BitString guess_sequence(const BitString& true_is, std::span<const double> p, Rng& rng) {
  if (p.size() != true_is.size()) throw Error(Errc::LengthMismatch, "one guess probability per IS bit");
  BitString guess = true_is;
  for (std::size_t i = 0; i < guess.size(); ++i)
    if (!(rng.uniform() < p[i])) guess.flip(i);
  return guess;
}

bool eve_impersonation_trial(std::span<const double> p, const Protocol1Config& cfg, Rng& rng) {
  if (p.size() != cfg.n_is) throw Error(Errc::LengthMismatch, "one guess probability per IS bit");
  const BitString true_is = random_bitstring(cfg.n_is, rng);
  return compare_with_tolerance(guess_sequence(true_is, p, rng), true_is, cfg.k);
}

double impersonation_frequency(std::span<const double> p, const Protocol1Config& cfg, std::uint64_t trials,
                               RngSeed seed, Execution exec) {
  if (p.size() != cfg.n_is) throw Error(Errc::LengthMismatch, "one guess probability per IS bit");
  if (trials == 0) return 0.0;
  const auto hits = exec == Execution::Parallel ? kernels::impersonation_successes_omp(p, cfg.k, trials, seed.seed)
                                                : kernels::impersonation_successes_serial(p, cfg.k, trials, seed.seed);
  return static_cast<double>(hits) / static_cast<double>(trials);
}

namespace {

IdentOutcome one_trial(const Protocol1Config& cfg, const NoisyLink& link, Protocol1Scenario scenario, double p_bar,
                       Rng rng) {
  Party1State alice{make_triads(1, cfg.n_is, rng), 0, Role::Alice};
  Party1State bob{alice.triads, 0, Role::Bob};
  ResponderMode mode = ResponderMode::Honest;
  if (scenario == Protocol1Scenario::Impostor) {
    const std::vector<double> p(cfg.n_is, p_bar);
    Triad& t = bob.triads.front();
    t.is2 = guess_sequence(t.is2, p, rng);
    t.is3 = guess_sequence(t.is3, p, rng);
    mode = ResponderMode::Impostor;
  }
  return run_protocol1(alice, bob, link, cfg, rng, mode).outcome;
}

}  // namespace

Protocol1Tally run_protocol1_trials(const Protocol1Config& cfg, const NoisyLink& link, Protocol1Scenario scenario,
                                    double p_bar, std::uint64_t trials, RngSeed seed, Execution exec) {
  cfg.validate();
  std::vector<unsigned char> outcomes(trials);
  const Rng base(seed);
  const auto n = static_cast<std::int64_t>(trials);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < n; ++t)
      outcomes[static_cast<std::size_t>(t)] =
          static_cast<unsigned char>(one_trial(cfg, link, scenario, p_bar, base.split(static_cast<std::uint64_t>(t))));
  } else {
    for (std::int64_t t = 0; t < n; ++t)
      outcomes[static_cast<std::size_t>(t)] =
          static_cast<unsigned char>(one_trial(cfg, link, scenario, p_bar, base.split(static_cast<std::uint64_t>(t))));
  }
  Protocol1Tally tally;
  tally.trials = trials;
  for (const auto o : outcomes) {
    switch (static_cast<IdentOutcome>(o)) {
      case IdentOutcome::Success: ++tally.success; break;
      case IdentOutcome::AbortPass1: ++tally.abort_pass1; break;
      case IdentOutcome::AbortPass2: ++tally.abort_pass2; break;
      case IdentOutcome::AbortPass3: ++tally.abort_pass3; break;
    }
  }
  return tally;
}

void write_protocol1_csv(std::ostream& os, const std::vector<P1TranscriptEntry>& transcript) {
  os << "pass,direction,kind,payload_hex,verdict\n";
  for (const auto& e : transcript)
    os << e.pass << ',' << e.direction << ',' << e.kind << ',' << e.payload.serialize() << ',' << e.verdict << '\n';
}

}  // namespace qid
