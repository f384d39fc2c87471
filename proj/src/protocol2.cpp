#include "qid/protocol2.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <ostream>

#include "qid/budget.hpp"
#include "qid/errors.hpp"

namespace qid {

namespace {

// Session streams derived from the session seed.
constexpr std::uint64_t kRawStream = 0;
constexpr std::uint64_t kBobStream = 1;
constexpr std::uint64_t kPublicStream = 2;
constexpr std::uint64_t kPoolStream = 3;

constexpr unsigned kTagBits = 64;

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string_view kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::Positions: return "POSITIONS";
    case MessageKind::BasesAndBits: return "BASES_AND_BITS";
    case MessageKind::FinalVerdict: return "FINAL_VERDICT";
    case MessageKind::Abort: return "ABORT";
    case MessageKind::PlumbingPointer: return "PLUMBING_POINTER";
    case MessageKind::PlumbingBasis: return "PLUMBING_BASIS";
    case MessageKind::PlumbingEc: return "PLUMBING_EC";
    case MessageKind::PlumbingPaSeed: return "PLUMBING_PA_SEED";
  }
  return "?";
}

std::string_view stage_name(AbortStage s) {
  switch (s) {
    case AbortStage::None: return "none";
    case AbortStage::Positions: return "positions";
    case AbortStage::BasesAndBits: return "bases_and_bits";
    case AbortStage::FinalVerdict: return "final_verdict";
    case AbortStage::EstimateRejected: return "estimate_rejected";
    case AbortStage::Reconciliation: return "reconciliation";
  }
  return "?";
}

std::vector<std::uint8_t> to_wire(const PublicMessage& m) {
  if (m.payload.size() > 0xffffffffULL) throw Error(Errc::InvalidArgument, "payload too long for the wire format");
  std::vector<std::uint8_t> out;
  out.push_back(static_cast<std::uint8_t>(m.kind));
  const auto len = static_cast<std::uint32_t>(m.payload.size());
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  const auto bytes = m.payload.to_bytes();
  out.insert(out.end(), bytes.begin(), bytes.end());
  if (authenticated(m.kind)) {
    if (!m.tag) throw Error(Errc::InvalidArgument, "authenticated message without tag");
    const auto t = m.tag->to_bytes();
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

PublicMessage from_wire(std::span<const std::uint8_t> bytes, Role from) {
  if (bytes.size() < 5) throw Error(Errc::ParseError, "truncated message header");
  const auto kind = bytes[0];
  if (kind < 1 || kind > 8) throw Error(Errc::ParseError, "unknown message kind");
  PublicMessage m;
  m.kind = static_cast<MessageKind>(kind);
  m.from = from;
  std::uint32_t len = 0;
  for (int i = 1; i <= 4; ++i) len = (len << 8) | bytes[static_cast<std::size_t>(i)];
  const std::size_t payload_bytes = (std::size_t{len} + 7) / 8;
  const std::size_t expected = 5 + payload_bytes + (authenticated(m.kind) ? 8 : 0);
  if (bytes.size() != expected) throw Error(Errc::ParseError, "message length does not match header");
  for (std::size_t i = 0; i < len; ++i) m.payload.push_back(((bytes[5 + i / 8] >> (7 - i % 8)) & 1) != 0);
  if (authenticated(m.kind)) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | bytes[5 + payload_bytes + i];
    m.tag = Tag{v};
  }
  return m;
}

BitString encode_verdict(const Verdict& v) {
  if (v.retained > kMaxVerdictCount || v.errors > 0xffff)
    throw Error(Errc::RangeError, "verdict counts do not fit their fields");
  BitString out;
  out.push_back(v.accept);
  out.append_uint(v.retained, 15);
  out.append_uint(v.errors, 16);
  return out;
}

Verdict decode_verdict(const BitString& payload) {
  if (payload.size() != kVerdictBits) throw Error(Errc::LengthMismatch, "verdict must be 32 bits");
  return Verdict{payload.get(0), static_cast<std::size_t>(payload.read_uint(1, 15)),
                 static_cast<std::size_t>(payload.read_uint(16, 16))};
}

BitString encode_positions(std::span<const std::size_t> positions, unsigned width) {
  BitString out;
  for (const auto p : positions) out.append_uint(p, width);
  return out;
}

std::vector<std::size_t> decode_positions(const BitString& payload, unsigned width, std::size_t n_pulses) {
  if (width == 0 || payload.size() % width != 0) throw Error(Errc::InvalidArgument, "ragged position list");
  std::vector<std::size_t> out;
  out.reserve(payload.size() / width);
  for (std::size_t pos = 0; pos < payload.size(); pos += width) {
    const auto p = static_cast<std::size_t>(payload.read_uint(pos, width));
    if (p >= n_pulses || (!out.empty() && p <= out.back()))
      throw Error(Errc::InvalidArgument, "positions must be increasing pulse indices");
    out.push_back(p);
  }
  return out;
}

BitString encode_bases_and_bits(const BasisString& bases, const BitString& bits,
                                std::span<const std::size_t> positions) {
  BitString out;
  for (const auto p : positions) {
    out.push_back(bases.get(p));
    out.push_back(bits.get(p));
  }
  return out;
}

std::vector<std::size_t> select_subset_positions(std::span<const std::size_t> detected, std::size_t two_s,
                                                 Rng& rng) {
  if (two_s > detected.size())
    throw Error(Errc::InsufficientDetections, std::to_string(detected.size()) + " detections, need " +
                                                  std::to_string(two_s));
  std::vector<std::size_t> pool(detected.begin(), detected.end());
  for (std::size_t i = 0; i < two_s; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(two_s);
  std::sort(pool.begin(), pool.end());
  return pool;
}

AdversaryScript three_party_sifting_attack() {
  AdversaryScript script;
  script.eve = InterceptResend{1.0};
  script.tamper = [](PublicMessage& m, const AdversaryView& view) {
    if (m.kind != MessageKind::BasesAndBits || view.transcript == nullptr || view.history == nullptr) return;
    const auto it = std::find_if(view.history->begin(), view.history->end(),
                                 [](const PublicMessage& h) { return h.kind == MessageKind::Positions; });
    if (it == view.history->end()) return;
    const auto positions = decode_positions(it->payload, view.position_bits, view.transcript->n_pulses);
    m.payload = encode_bases_and_bits(view.transcript->eve_bases, view.transcript->eve_bits, positions);
  };
  return script;
}

AdversaryScript single_bit_tamper(MessageKind kind, std::size_t bit) {
  AdversaryScript script;
  script.tamper = [kind, bit](PublicMessage& m, const AdversaryView&) {
    if (m.kind != kind) return;
    if (bit < m.payload.size()) {
      m.payload.flip(bit);
    } else if (m.tag && bit - m.payload.size() < kTagBits) {
      m.tag->value ^= std::uint64_t{1} << (kTagBits - 1 - (bit - m.payload.size()));
    }
  };
  return script;
}

unsigned Protocol2Params::position_bits() const { return qid::position_bits(static_cast<double>(n_pulses)); }

AuthParams Protocol2Params::positions_auth() const {
  return AuthParams::for_message_bits(estimation.two_s() * position_bits());
}

AuthParams Protocol2Params::bases_auth() const { return AuthParams::for_message_bits(2 * estimation.two_s()); }

AuthParams Protocol2Params::verdict_auth() { return AuthParams::for_message_bits(kVerdictBits); }

std::size_t Protocol2Params::auth_key_bits() const {
  return positions_auth().key_bits() + bases_auth().key_bits() + verdict_auth().key_bits();
}

void Protocol2Params::validate() const {
  channel.validate();
  estimation.validate();
  if (n_pulses < 2) throw Error(Errc::RangeError, "n_pulses must be at least 2");
  if (estimation.two_s() > kMaxVerdictCount) throw Error(Errc::RangeError, "s too large for the verdict layout");
}

namespace {

class Session {
 public:
  Session(SecretPool& alice, SecretPool& bob, const Protocol2Params& params, const AdversaryScript& adversary,
          RngSeed seed)
      : alice_(alice), bob_(bob), p_(params), adv_(adversary), base_(seed) {}

  Protocol2Outcome run() {
    Protocol2Outcome out = run_session();
    if (p_.record_transcript) out.transcript = std::move(history_);
    return out;
  }

 private:
  Protocol2Outcome run_session();

  // Sends through the public channel: the adversary may rewrite it.
  PublicMessage deliver(PublicMessage m) {
    if (adv_.tamper) {
      const AdversaryView view{&raw_, &history_, p_.position_bits()};
      adv_.tamper(m, view);
    }
    history_.push_back(m);
    return m;
  }

  PublicMessage send_tagged(MessageKind kind, Role from, BitString payload, const AuthKey& key,
                            const AuthParams& auth) {
    PublicMessage m{kind, from, std::move(payload), std::nullopt};
    m.tag = tag_bits(key, m.payload, auth);
    return deliver(std::move(m));
  }

  bool check(const PublicMessage& m, const AuthKey& key, const AuthParams& auth) const {
    return m.tag.has_value() && verify_bits(key, m.payload, *m.tag, auth);
  }

  AuthKey alice_key(const AuthParams& auth) {
    const std::size_t begin = alice_.pointer();
    auto draw = key_from_pool(alice_, auth);
    out_.bits_consumed += draw.bits_consumed;
    out_.key_ranges.emplace_back(begin, alice_.pointer());
    return std::move(draw.key);
  }

  AuthKey bob_key(const AuthParams& auth) { return key_from_pool(bob_, auth).key; }

  void abort(Role from, AbortStage stage) {
    deliver(PublicMessage{MessageKind::Abort, from, {}, std::nullopt});
    out_.stage = stage;
  }

  double eps_lim_for(std::size_t retained) const {
    const double s = p_.nominal_s_threshold ? static_cast<double>(p_.estimation.s) : static_cast<double>(retained);
    if (s <= 0) return -1.0;
    try {
      return solve_eps_lim(s, p_.estimation.eps_max, p_.estimation.delta);
    } catch (const Error& e) {
      if (e.code() == Errc::NoSolution) return -1.0;
      throw;
    }
  }

  bool acceptable(std::size_t errors, std::size_t retained, double eps_lim) const {
    return eps_lim >= 0.0 && estimate_acceptable(errors, retained, eps_lim);
  }

  void refuel(const std::vector<std::size_t>& subset);

  SecretPool& alice_;
  SecretPool& bob_;
  const Protocol2Params& p_;
  const AdversaryScript& adv_;
  Rng base_;
  RawTranscript raw_;
  std::vector<PublicMessage> history_;
  std::vector<std::size_t> alice_subset_;
  Protocol2Outcome out_;
};

Protocol2Outcome Session::run_session() {
  p_.validate();
  validate(adv_.eve);
  const std::size_t n = p_.n_pulses;
  const unsigned width = p_.position_bits();

  // (1) raw quantum transmission
  raw_ = run_raw_transmission(p_.channel, n, adv_.eve, RngSeed{base_.split(kRawStream)()}, p_.exec);
  out_.n_detected = raw_.detected_count();

  // (2) pointer sync, unauthenticated
  {
    BitString a_ptr, b_ptr;
    a_ptr.append_uint(alice_.pointer(), 64);
    b_ptr.append_uint(bob_.pointer(), 64);
    const auto to_bob = deliver(PublicMessage{MessageKind::PlumbingPointer, Role::Alice, a_ptr, std::nullopt});
    const auto to_alice = deliver(PublicMessage{MessageKind::PlumbingPointer, Role::Bob, b_ptr, std::nullopt});
    const auto read_ptr = [](const BitString& b) {
      return b.size() == 64 ? static_cast<std::size_t>(b.read_uint(0, 64)) : std::size_t{0};
    };
    alice_.advance_to(pointer_sync(alice_.pointer(), read_ptr(to_alice.payload)));
    bob_.advance_to(pointer_sync(bob_.pointer(), read_ptr(to_bob.payload)));
  }
  const std::size_t need = p_.auth_key_bits();
  if (alice_.remaining() < need || bob_.remaining() < need)
    throw Error(Errc::PoolExhausted, "pool holds fewer than the " + std::to_string(need) +
                                         " bits needed for the three tags");

  // (3) Bob -> Alice: subset positions
  Rng bob_rng = base_.split(kBobStream);
  const auto detected = raw_.detected_positions();
  const auto subset = select_subset_positions(detected, p_.estimation.two_s(), bob_rng);
  const AuthParams pos_auth = p_.positions_auth();
  const auto k1_bob = bob_key(pos_auth);
  const auto msg1 = send_tagged(MessageKind::Positions, Role::Bob, encode_positions(subset, width), k1_bob, pos_auth);
  const auto k1_alice = alice_key(pos_auth);
  if (!check(msg1, k1_alice, pos_auth)) {
    abort(Role::Alice, AbortStage::Positions);
    return std::move(out_);
  }
  alice_subset_ = decode_positions(msg1.payload, width, n);
  const auto& alice_subset = alice_subset_;

  // (4) Alice -> Bob: her bases and bits on the subset
  const AuthParams bb_auth = p_.bases_auth();
  const auto k2_alice = alice_key(bb_auth);
  const auto msg2 = send_tagged(MessageKind::BasesAndBits, Role::Alice,
                                encode_bases_and_bits(raw_.alice_bases, raw_.alice_bits, alice_subset), k2_alice,
                                bb_auth);
  const auto k2_bob = bob_key(bb_auth);
  if (!check(msg2, k2_bob, bb_auth) || msg2.payload.size() != 2 * subset.size()) {
    abort(Role::Bob, AbortStage::BasesAndBits);
    return std::move(out_);
  }

  // (5) Bob estimates the error rate on the coincident positions
  Verdict verdict;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const std::size_t pos = subset[i];
    if (msg2.payload.get(2 * i) != raw_.bob_bases.get(pos)) continue;
    ++verdict.retained;
    if (msg2.payload.get(2 * i + 1) != raw_.bob_bits.get(pos)) ++verdict.errors;
  }
  verdict.accept = acceptable(verdict.errors, verdict.retained, eps_lim_for(verdict.retained));
  const AuthParams v_auth = Protocol2Params::verdict_auth();
  const auto k3_bob = bob_key(v_auth);
  const auto msg3 = send_tagged(MessageKind::FinalVerdict, Role::Bob, encode_verdict(verdict), k3_bob, v_auth);
  const auto k3_alice = alice_key(v_auth);
  if (!check(msg3, k3_alice, v_auth)) {
    abort(Role::Alice, AbortStage::FinalVerdict);
    return std::move(out_);
  }

  // (6) Alice applies the same test to what the verdict conveys
  out_.identified = true;
  const Verdict seen = decode_verdict(msg3.payload);
  out_.retained = seen.retained;
  out_.errors = seen.errors;
  out_.eps_est = seen.retained == 0 ? 0.0 : static_cast<double>(seen.errors) / static_cast<double>(seen.retained);
  out_.eps_lim = eps_lim_for(seen.retained);
  if (!seen.accept || !acceptable(seen.errors, seen.retained, out_.eps_lim)) {
    out_.stage = AbortStage::EstimateRejected;
    return std::move(out_);
  }

  try {
    refuel(subset);
  } catch (const Error& e) {
    if (e.code() == Errc::PoolExhausted) throw;
    out_.stage = AbortStage::Reconciliation;
    out_.refueled = false;
    out_.bits_gained = 0;
    out_.distilled.reset();
  }
  return std::move(out_);
}

void Session::refuel(const std::vector<std::size_t>& subset) {
  const std::size_t n = p_.n_pulses;

  // Bob announces detections and his bases outside the subset.
  std::vector<std::size_t> bob_listed;
  BitString basis_msg = raw_.detected;
  {
    std::size_t j = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
      if (!raw_.detected.get(pos)) continue;
      if (j < subset.size() && subset[j] == pos) {
        ++j;
        continue;
      }
      bob_listed.push_back(pos);
      basis_msg.push_back(raw_.bob_bases.get(pos));
    }
  }
  const auto to_alice = deliver(PublicMessage{MessageKind::PlumbingBasis, Role::Bob, basis_msg, std::nullopt});

  // Alice reads the list against the subset she verified and answers with
  // one match bit per listed position.
  if (to_alice.payload.size() < n) throw Error(Errc::LengthMismatch, "basis announcement truncated");
  std::vector<std::size_t> alice_listed;
  {
    const auto& alice_subset = alice_subset_;
    std::size_t j = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
      if (!to_alice.payload.get(pos)) continue;
      if (j < alice_subset.size() && alice_subset[j] == pos) {
        ++j;
        continue;
      }
      alice_listed.push_back(pos);
    }
  }
  if (to_alice.payload.size() != n + alice_listed.size())
    throw Error(Errc::LengthMismatch, "basis announcement does not match the detection map");
  BitString match;
  BitString alice_sifted;
  for (std::size_t i = 0; i < alice_listed.size(); ++i) {
    const bool m = to_alice.payload.get(n + i) == raw_.alice_bases.get(alice_listed[i]);
    match.push_back(m);
    if (m) alice_sifted.push_back(raw_.alice_bits.get(alice_listed[i]));
  }
  const auto to_bob = deliver(PublicMessage{MessageKind::PlumbingBasis, Role::Alice, match, std::nullopt});
  if (to_bob.payload.size() != bob_listed.size())
    throw Error(Errc::LengthMismatch, "match map does not match Bob's list");
  BitString bob_sifted;
  for (std::size_t i = 0; i < bob_listed.size(); ++i)
    if (to_bob.payload.get(i)) bob_sifted.push_back(raw_.bob_bits.get(bob_listed[i]));

  out_.n_sifted = alice_sifted.size();
  if (alice_sifted.size() != bob_sifted.size()) throw Error(Errc::LengthMismatch, "sifted keys differ in length");

  // Error correction over the public channel.
  Rng pub = base_.split(kPublicStream);
  const ParityLink link = [this](const BitString& parities) {
    return deliver(PublicMessage{MessageKind::PlumbingEc, Role::Alice, parities, std::nullopt}).payload;
  };
  EcOptions ec_opts;
  ec_opts.error_hint = out_.eps_est;
  ec_opts.verify_parities = p_.verify_parities;
  EcResult ec = error_correct(std::move(alice_sifted), std::move(bob_sifted), pub, ec_opts, link);
  out_.leaked_bits = ec.leaked_bits;
  out_.corrections = ec.corrections;
  const double n_s = static_cast<double>(out_.n_sifted);
  if (static_cast<double>(ec.corrections) > p_.estimation.eps_max * n_s) return;

  // Privacy amplification sized for the worst tolerated error rate.
  std::size_t out_len = ec.alice.size();
  if (p_.pa_mode == PaMode::Toeplitz) {
    BudgetParams budget;
    budget.mu = p_.channel.mu;
    budget.eta_tl = p_.channel.eta_tl;
    budget.eta_bob = p_.channel.eta_bob;
    budget.eta_det = p_.channel.eta_det;
    budget.eta_overall = p_.channel.eta_overall;
    budget.eps = out_.eps_est;
    budget.eps_max = p_.estimation.eps_max;
    budget.delta = p_.estimation.delta;
    budget.s = p_.estimation.s;
    budget.n_pulses = static_cast<double>(n);
    const double n_c = std::max(0.0, n_s - static_cast<double>(ec.leaked_bits));
    const auto bd = distilled_breakdown(budget, n_s, n_c);
    out_len = std::min(ec.alice.size(), static_cast<std::size_t>(std::floor(bd.distilled)));
  }
  if (out_len == 0) return;

  const BitString seed = random_bitstring(p_.pa_mode == PaMode::Toeplitz ? pa_seed_bits(ec.alice.size(), out_len) : 0, pub);
  const auto seed_msg = deliver(PublicMessage{MessageKind::PlumbingPaSeed, Role::Alice, seed, std::nullopt});
  BitString alice_key = privacy_amplify(ec.alice, out_len, seed, p_.pa_mode, p_.exec);
  BitString bob_key = privacy_amplify(ec.bob, out_len, seed_msg.payload, p_.pa_mode, p_.exec);

  out_.keys_agree = alice_key == bob_key;
  alice_.append(alice_key);
  bob_.append(bob_key);
  out_.refueled = true;
  out_.bits_gained = alice_key.size();
  out_.distilled = std::move(alice_key);
}

}  // namespace

Protocol2Outcome run_protocol2(SecretPool& alice, SecretPool& bob, const Protocol2Params& params,
                               const AdversaryScript& adversary, RngSeed seed) {
  Session session(alice, bob, params, adversary, seed);
  Protocol2Outcome out = session.run();
  return out;
}

std::vector<SessionReport> run_protocol2_sessions(const Protocol2Params& params, const AdversaryScript& adversary,
                                                  std::size_t sessions, std::size_t pool_bits, RngSeed seed) {
  std::vector<SessionReport> reports(sessions);
  Protocol2Params inner = params;
  // One session may parallelize inside; many sessions parallelize across.
  if (sessions > 1) inner.exec = Execution::Serial;
  inner.record_transcript = false;
  const Rng base(seed);
  const auto count = static_cast<std::int64_t>(sessions);
  std::vector<std::exception_ptr> errors(sessions);

  auto one = [&](std::size_t i) {
    try {
      const std::uint64_t session_seed = base.split(i)();
      Rng pool_rng = Rng(RngSeed{session_seed}).split(kPoolStream);
      const BitString shared = random_bitstring(pool_bits, pool_rng);
      SecretPool a(shared), b(shared);
      const auto out = run_protocol2(a, b, inner, adversary, RngSeed{session_seed});
      reports[i] = SessionReport{session_seed,    params.n_pulses, out.eps_est,     out.identified,
                                 out.refueled,    out.bits_consumed, out.bits_gained};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (params.exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) one(static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < count; ++i) one(static_cast<std::size_t>(i));
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

void write_session_header(std::ostream& os) { os << "seed,n_pulses,eps_est,identified,refueled,consumed,gained\n"; }

void write_session_row(std::ostream& os, const SessionReport& r) {
  os << r.seed << ',' << r.n_pulses << ',' << format_double(r.eps_est) << ',' << (r.identified ? 1 : 0) << ','
     << (r.refueled ? 1 : 0) << ',' << r.consumed << ',' << r.gained << '\n';
}

}  // namespace qid
