#pragma once

// Identification by authenticated key refuelling. The error-rate estimate
// is the first classical exchange after the raw transmission and doubles as
// mutual identification:
//
//   Bob   -> Alice  POSITIONS       2s positions, [log2 N] bits each, tagged
//   Alice -> Bob    BASES_AND_BITS  basis then value bit per position, tagged
//   Bob   -> Alice  FINAL_VERDICT   32 bits, tagged
//
// FINAL_VERDICT layout (bit 0 first): bit 0 accept flag, bits 1..15 the
// number of retained (basis-matched) subset positions s', bits 16..31 the
// error count k among them. Alice recomputes eps_est = k / s' and applies
// the same eps_lim test.
//
// Everything after the verdict (basis comparison, parities, hash seed)
// travels unauthenticated: tampering there can spoil the refuel but never
// fakes an identification.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "qid/bitstring.hpp"
#include "qid/channel.hpp"
#include "qid/error_estimation.hpp"
#include "qid/oa_auth.hpp"
#include "qid/reconciliation.hpp"
#include "qid/rng.hpp"
#include "qid/secret_pool.hpp"

namespace qid {

enum class MessageKind : std::uint8_t {
  Positions = 1,
  BasesAndBits = 2,
  FinalVerdict = 3,
  Abort = 4,
  PlumbingPointer = 5,
  PlumbingBasis = 6,
  PlumbingEc = 7,
  PlumbingPaSeed = 8,
};

std::string_view kind_name(MessageKind k);
inline bool authenticated(MessageKind k) {
  return k == MessageKind::Positions || k == MessageKind::BasesAndBits || k == MessageKind::FinalVerdict;
}

struct PublicMessage {
  MessageKind kind = MessageKind::Abort;
  Role from = Role::Alice;
  BitString payload;
  std::optional<Tag> tag;  // present iff authenticated(kind)
};

// 1 byte kind, 4 bytes big-endian payload bit length, payload padded to a
// byte boundary, then 8 tag bytes for authenticated kinds.
std::vector<std::uint8_t> to_wire(const PublicMessage& m);
PublicMessage from_wire(std::span<const std::uint8_t> bytes, Role from);

inline constexpr unsigned kVerdictBits = 32;
inline constexpr std::size_t kMaxVerdictCount = (std::size_t{1} << 15) - 1;

struct Verdict {
  bool accept = false;
  std::size_t retained = 0;  // s'
  std::size_t errors = 0;    // k
};

BitString encode_verdict(const Verdict& v);
Verdict decode_verdict(const BitString& payload);

BitString encode_positions(std::span<const std::size_t> positions, unsigned width);
// Throws InvalidArgument unless positions are strictly increasing and < n_pulses.
std::vector<std::size_t> decode_positions(const BitString& payload, unsigned width, std::size_t n_pulses);

// Per position: basis bit then value bit.
BitString encode_bases_and_bits(const BasisString& bases, const BitString& bits, std::span<const std::size_t> positions);

// Uniform 2s-subset of `detected` without replacement, sorted ascending.
std::vector<std::size_t> select_subset_positions(std::span<const std::size_t> detected, std::size_t two_s, Rng& rng);

// What the adversary sees when a public message passes: the simulation's
// record of the quantum channel (including her own measurements) and every
// message delivered so far.
struct AdversaryView {
  const RawTranscript* transcript = nullptr;
  const std::vector<PublicMessage>* history = nullptr;
  unsigned position_bits = 0;
};

using TamperHook = std::function<void(PublicMessage&, const AdversaryView&)>;

struct AdversaryScript {
  EveStrategy eve = NoEve{};
  TamperHook tamper;
};

// Eve intercepts every pulse and resends her own measurement, then swaps
// Alice's BASES_AND_BITS for her own values at the same positions (what Bob
// would see from the copy she shared with him), leaving Alice's tag.
AdversaryScript three_party_sifting_attack();
// Flips bit `bit` of the payload (bit < payload length) or of the 64-bit
// tag field (bit - payload length) of the first message of `kind`.
AdversaryScript single_bit_tamper(MessageKind kind, std::size_t bit);

struct Protocol2Params {
  ChannelParams channel;
  EstimationParams estimation;
  std::size_t n_pulses = 6'250'000;
  std::size_t verify_parities = 32;
  PaMode pa_mode = PaMode::Toeplitz;
  // Solve eps_lim at the nominal s instead of the realized s'.
  bool nominal_s_threshold = false;
  bool record_transcript = false;
  Execution exec = Execution::Parallel;

  unsigned position_bits() const;
  AuthParams positions_auth() const;
  AuthParams bases_auth() const;
  static AuthParams verdict_auth();
  // Key bits of the three tags when no 61-bit group has to be skipped.
  std::size_t auth_key_bits() const;
  void validate() const;
};

enum class AbortStage {
  None,
  Positions,         // Alice rejected the POSITIONS tag
  BasesAndBits,      // Bob rejected the BASES_AND_BITS tag
  FinalVerdict,      // Alice rejected the FINAL_VERDICT tag
  EstimateRejected,  // identified, but eps_est above eps_lim
  Reconciliation,    // identified and accepted, refuel failed afterwards
};

std::string_view stage_name(AbortStage s);

struct Protocol2Outcome {
  bool identified = false;
  bool refueled = false;
  double eps_est = 0.0;
  std::optional<BitString> distilled;  // Alice's copy
  std::size_t bits_consumed = 0;
  std::size_t bits_gained = 0;

  AbortStage stage = AbortStage::None;
  std::size_t n_detected = 0;
  std::size_t retained = 0;  // s'
  std::size_t errors = 0;    // k
  double eps_lim = 0.0;
  std::size_t n_sifted = 0;
  std::size_t leaked_bits = 0;
  std::size_t corrections = 0;
  bool keys_agree = false;  // simulation truth about the two distilled keys
  // Alice's authentication key ranges [begin, end) in pool coordinates.
  std::vector<std::pair<std::size_t, std::size_t>> key_ranges;
  std::vector<PublicMessage> transcript;
};

// Throws PoolExhausted before any exchange if either pool cannot cover the
// three authentication keys after pointer sync.
Protocol2Outcome run_protocol2(SecretPool& alice, SecretPool& bob, const Protocol2Params& params,
                               const AdversaryScript& adversary, RngSeed seed);

struct SessionReport {
  std::uint64_t seed = 0;
  std::size_t n_pulses = 0;
  double eps_est = 0.0;
  bool identified = false;
  bool refueled = false;
  std::size_t consumed = 0;
  std::size_t gained = 0;
};

// Independent sessions on fresh shared pools of pool_bits secret bits;
// session i uses the seed drawn from stream i of `seed`.
std::vector<SessionReport> run_protocol2_sessions(const Protocol2Params& params, const AdversaryScript& adversary,
                                                  std::size_t sessions, std::size_t pool_bits, RngSeed seed);

void write_session_header(std::ostream& os);
void write_session_row(std::ostream& os, const SessionReport& r);

}  // namespace qid
