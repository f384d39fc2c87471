#include "qid/channel.hpp"

#include <bit>
#include <cmath>
#include <ostream>

#include "qid/errors.hpp"
#include "qid/kernels.hpp"

namespace qid {

namespace {

void check_unit(double v, const char* name, bool allow_zero) {
  const bool ok = allow_zero ? (v >= 0.0 && v <= 1.0) : (v > 0.0 && v <= 1.0);
  if (!ok || std::isnan(v)) throw Error(Errc::RangeError, std::string(name) + " out of range");
}

kernels::PulseSpec pulse_spec(const ChannelParams& params, const EveStrategy& eve) {
  kernels::PulseSpec spec;
  spec.p_detect = params.detection_probability();
  spec.eps_intrinsic = params.eps_intrinsic;
  std::visit(
      [&spec](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, InterceptResend>) {
          spec.eve = kernels::EveKind::InterceptResend;
          spec.eve_param = s.fraction;
        } else if constexpr (std::is_same_v<T, PerBitGuess>) {
          spec.eve = kernels::EveKind::PerBitGuess;
          spec.eve_param = s.p_bar;
        } else if constexpr (std::is_same_v<T, Beamsplit>) {
          spec.eve = kernels::EveKind::Beamsplit;
          spec.eve_param = s.tap;
        }
      },
      eve);
  return spec;
}

// Positions with detected & matching bases, as a word mask.
std::vector<std::uint64_t> sift_mask(const RawTranscript& t) {
  const auto det = t.detected.words();
  const auto ab = t.alice_bases.words();
  const auto bb = t.bob_bases.words();
  std::vector<std::uint64_t> mask(det.size());
  for (std::size_t w = 0; w < det.size(); ++w) mask[w] = det[w] & ~(ab[w] ^ bb[w]);
  return mask;
}

}  // namespace

double ChannelParams::eta() const { return eta_overall ? *eta_overall : eta_tl * eta_bob * eta_det; }

double ChannelParams::detection_probability() const { return -std::expm1(-eta() * mu); }

ChannelParams ChannelParams::with_eta_tl(double new_eta_tl) const {
  ChannelParams out = *this;
  if (out.eta_overall) *out.eta_overall *= new_eta_tl / eta_tl;
  out.eta_tl = new_eta_tl;
  return out;
}

void ChannelParams::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw Error(Errc::RangeError, "mu must be non-negative");
  check_unit(eta_tl, "eta_tl", false);
  check_unit(eta_bob, "eta_bob", false);
  check_unit(eta_det, "eta_det", false);
  if (eta_overall) check_unit(*eta_overall, "eta", false);
  if (!(eps_intrinsic >= 0.0 && eps_intrinsic < 1.0)) throw Error(Errc::RangeError, "eps_intrinsic out of range");
}

void validate(const EveStrategy& eve) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, InterceptResend>) {
          check_unit(s.fraction, "intercept fraction", true);
        } else if constexpr (std::is_same_v<T, PerBitGuess>) {
          if (!(s.p_bar >= 0.5 && s.p_bar <= 1.0)) throw Error(Errc::RangeError, "p_bar must lie in [1/2, 1]");
        } else if constexpr (std::is_same_v<T, Beamsplit>) {
          check_unit(s.tap, "tap fraction", true);
        }
      },
      eve);
}

std::vector<std::size_t> RawTranscript::detected_positions() const {
  std::vector<std::size_t> out;
  out.reserve(detected_count());
  const auto words = detected.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t v = words[w];
    while (v != 0) {
      const int lead = std::countl_zero(v);
      out.push_back(w * 64 + static_cast<std::size_t>(lead));
      v &= ~(std::uint64_t{1} << (63 - lead));
    }
  }
  return out;
}

RawTranscript run_raw_transmission(const ChannelParams& params, std::size_t n_pulses, const EveStrategy& eve,
                                   RngSeed seed, Execution exec) {
  params.validate();
  validate(eve);
  if (n_pulses == 0) throw Error(Errc::InvalidArgument, "n_pulses must be at least 1");

  const std::size_t nw = words_for_bits(n_pulses);
  std::vector<std::uint64_t> ab(nw), abas(nw), bbas(nw), det(nw), bb(nw), ea(nw), ebas(nw), eb(nw);
  const kernels::PulseBuffers buffers{ab, abas, bbas, det, bb, ea, ebas, eb};
  const auto spec = pulse_spec(params, eve);
  if (exec == Execution::Parallel)
    kernels::simulate_pulses_omp(spec, seed.seed, n_pulses, buffers);
  else
    kernels::simulate_pulses_serial(spec, seed.seed, n_pulses, buffers);

  RawTranscript t;
  t.n_pulses = n_pulses;
  t.alice_bits = BitString::from_words(std::move(ab), n_pulses);
  t.alice_bases = BitString::from_words(std::move(abas), n_pulses);
  t.bob_bases = BitString::from_words(std::move(bbas), n_pulses);
  t.detected = BitString::from_words(std::move(det), n_pulses);
  t.bob_bits = BitString::from_words(std::move(bb), n_pulses);
  t.eve_active = BitString::from_words(std::move(ea), n_pulses);
  t.eve_bases = BitString::from_words(std::move(ebas), n_pulses);
  t.eve_bits = BitString::from_words(std::move(eb), n_pulses);
  return t;
}

SiftResult sift(const RawTranscript& t, const std::vector<std::size_t>& exclude) {
  SiftResult out;
  const auto mask = sift_mask(t);
  auto ex = exclude.begin();
  for (std::size_t w = 0; w < mask.size(); ++w) {
    std::uint64_t v = mask[w];
    while (v != 0) {
      const int lead = std::countl_zero(v);
      v &= ~(std::uint64_t{1} << (63 - lead));
      const std::size_t pos = w * 64 + static_cast<std::size_t>(lead);
      while (ex != exclude.end() && *ex < pos) ++ex;
      if (ex != exclude.end() && *ex == pos) continue;
      out.positions.push_back(pos);
      out.alice_bits.push_back(t.alice_bits.get(pos));
      out.bob_bits.push_back(t.bob_bits.get(pos));
    }
  }
  return out;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double eve_information_bits(const RawTranscript& t, const EveStrategy& eve) {
  const auto mask = sift_mask(t);
  const auto active = t.eve_active.words();
  const auto ab = t.alice_bases.words();
  const auto eb = t.eve_bases.words();
  std::size_t sifted = 0;
  for (const auto w : mask) sifted += static_cast<std::size_t>(std::popcount(w));

  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NoEve>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, PerBitGuess>) {
          return static_cast<double>(sifted) * (1.0 - binary_entropy(s.p_bar));
        } else if constexpr (std::is_same_v<T, Beamsplit>) {
          std::size_t n = 0;
          for (std::size_t w = 0; w < mask.size(); ++w) n += static_cast<std::size_t>(std::popcount(mask[w] & active[w]));
          return static_cast<double>(n);
        } else {
          // Intercept-resend: Eve knows the bit outright where her basis
          // matched Alice's.
          std::size_t n = 0;
          for (std::size_t w = 0; w < mask.size(); ++w)
            n += static_cast<std::size_t>(std::popcount(mask[w] & active[w] & ~(ab[w] ^ eb[w])));
          return static_cast<double>(n);
        }
      },
      eve);
}

void write_transcript_csv(std::ostream& os, const RawTranscript& t) {
  os << "pulse_index,alice_bit,alice_basis,bob_basis,detected,bob_bit\n";
  for (std::size_t i = 0; i < t.n_pulses; ++i) {
    const bool det = t.detected.get(i);
    os << i << ',' << t.alice_bits.get(i) << ',' << (t.alice_bases.get(i) ? 'D' : 'R') << ','
       << (t.bob_bases.get(i) ? 'D' : 'R') << ',' << det << ',';
    if (det) os << t.bob_bits.get(i);
    os << '\n';
  }
}

}  // namespace qid
