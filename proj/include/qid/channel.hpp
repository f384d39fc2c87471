#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "qid/bitstring.hpp"
#include "qid/rng.hpp"

namespace qid {

// Bases are stored one bit per pulse: 0 = rectilinear, 1 = diagonal.
using BasisString = BitString;
enum class Basis : bool { Rect = false, Diag = true };

enum class Execution { Serial, Parallel };

struct ChannelParams {
  double mu = 0.8;         // mean photon number per pulse at Alice's output
  double eta_tl = 0.63;    // line transmissivity
  double eta_bob = 0.35;   // Bob's interferometer
  double eta_det = 0.55;   // detector quantum efficiency
  // Overall transmissivity when stated directly (the published figure is
  // 0.12); otherwise the product of the three factors.
  std::optional<double> eta_overall = 0.12;
  double eps_intrinsic = 0.0;

  double eta() const;
  double detection_probability() const;
  // Same apparatus on a different line: an explicit overall eta is scaled by
  // the ratio of line transmissivities.
  ChannelParams with_eta_tl(double eta_tl) const;
  void validate() const;
};

struct NoEve {};
struct InterceptResend {
  double fraction = 1.0;
};
struct PerBitGuess {
  double p_bar = 0.6;
};
struct Beamsplit {
  double tap = 0.0;
};
using EveStrategy = std::variant<NoEve, InterceptResend, PerBitGuess, Beamsplit>;

void validate(const EveStrategy& eve);

struct RawTranscript {
  std::size_t n_pulses = 0;
  BitString alice_bits;
  BasisString alice_bases;
  BasisString bob_bases;
  BitString detected;
  BitString bob_bits;  // zero wherever !detected

  // Simulation-side record of the eavesdropper; never read by the parties.
  // eve_active: pulse intercepted / tapped / guessed; eve_bases: basis Eve
  // measured in (intercept-resend); eve_bits: Eve's value for Alice's bit.
  BitString eve_active;
  BasisString eve_bases;
  BitString eve_bits;

  std::size_t detected_count() const { return detected.count_ones(); }
  std::vector<std::size_t> detected_positions() const;
};

RawTranscript run_raw_transmission(const ChannelParams& params, std::size_t n_pulses, const EveStrategy& eve,
                                   RngSeed seed, Execution exec = Execution::Parallel);

struct SiftResult {
  std::vector<std::size_t> positions;
  BitString alice_bits;
  BitString bob_bits;
};

// `exclude` must be sorted ascending.
SiftResult sift(const RawTranscript& t, const std::vector<std::size_t>& exclude = {});

double binary_entropy(double p);

// Expected number of key bits known to Eve over the sifted key.
double eve_information_bits(const RawTranscript& t, const EveStrategy& eve);

// pulse_index,alice_bit,alice_basis,bob_basis,detected,bob_bit
void write_transcript_csv(std::ostream& os, const RawTranscript& t);

}  // namespace qid
