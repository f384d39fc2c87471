#include "qid/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "qid/budget.hpp"
#include "qid/errors.hpp"
#include "qid/oa_auth.hpp"

namespace qid {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string_view eve_label(const RunConfig& cfg) {
  switch (cfg.eve) {
    case EveKindSetting::None: return "none";
    case EveKindSetting::InterceptResend: return "intercept_resend";
    case EveKindSetting::PerBitGuess: return "per_bit_guess";
    case EveKindSetting::Beamsplit: return "beamsplit";
  }
  return "none";
}

int simulate_qkd(const RunConfig& cfg, std::ostream& out) {
  const auto eve = cfg.eve_strategy();
  const auto n = static_cast<std::size_t>(std::llround(cfg.n_pulses));
  const auto t = run_raw_transmission(cfg.channel(), n, eve, RngSeed{cfg.seed});
  const auto sifted = sift(t);
  const auto errors = hamming_distance(sifted.alice_bits, sifted.bob_bits);
  const double qber =
      sifted.positions.empty() ? 0.0 : static_cast<double>(errors) / static_cast<double>(sifted.positions.size());
  out << "n_pulses,eve,eve_param,detected,sifted,errors,qber,eve_info_bits\n";
  out << n << ',' << eve_label(cfg) << ',' << num(cfg.eve_param) << ',' << t.detected_count() << ','
      << sifted.positions.size() << ',' << errors << ',' << num(qber) << ',' << num(eve_information_bits(t, eve))
      << '\n';
  return kExitOk;
}

int protocol1(const RunConfig& cfg, std::ostream& out) {
  const auto p1 = cfg.protocol1();
  const NoisyLink link{cfg.eps_chan};
  out << "scenario,n_is,k,eps_chan,p_bar,trials,success,abort_pass1,abort_pass2,abort_pass3,success_rate,oracle\n";
  // Honest: three noisy sequences each within tolerance. Impostor: her
  // guess of is2 survives Alice's check (is1 and is3 cannot stop her).
  const std::vector<double> honest_bits(p1.n_is, 1.0 - cfg.eps_chan);
  const double honest_pass = deception_probability_exact(honest_bits, p1.k);
  const double p_eff = cfg.p_bar * (1.0 - cfg.eps_chan) + (1.0 - cfg.p_bar) * cfg.eps_chan;
  const std::vector<double> impostor_bits(p1.n_is, p_eff);
  struct Row {
    const char* name;
    Protocol1Scenario scenario;
    double oracle;
    std::uint64_t stream;
  };
  const Row rows[] = {{"honest", Protocol1Scenario::Honest, std::pow(honest_pass, 3), 0},
                      {"impostor", Protocol1Scenario::Impostor, deception_probability_exact(impostor_bits, p1.k), 1}};
  for (const auto& r : rows) {
    const RngSeed seed{Rng(RngSeed{cfg.seed}, r.stream)()};
    const auto tally = run_protocol1_trials(p1, link, r.scenario, cfg.p_bar, cfg.trials, seed);
    out << r.name << ',' << p1.n_is << ',' << p1.k << ',' << num(cfg.eps_chan) << ',' << num(cfg.p_bar) << ','
        << tally.trials << ',' << tally.success << ',' << tally.abort_pass1 << ',' << tally.abort_pass2 << ','
        << tally.abort_pass3 << ','
        << num(static_cast<double>(tally.success) / static_cast<double>(tally.trials)) << ',' << num(r.oracle)
        << '\n';
  }
  return kExitOk;
}

int protocol2(const RunConfig& cfg, std::ostream& out) {
  const auto params = cfg.protocol2();
  AdversaryScript adversary;
  if (cfg.attack == AttackSetting::ThreeParty)
    adversary = three_party_sifting_attack();
  else
    adversary.eve = cfg.eve_strategy();
  const std::size_t pool_bits = cfg.pool_bits != 0 ? cfg.pool_bits : params.auth_key_bits() + 10 * kDigitBits;
  const auto reports = run_protocol2_sessions(params, adversary, cfg.sessions, pool_bits, RngSeed{cfg.seed});
  write_session_header(out);
  bool all_refueled = true;
  for (const auto& r : reports) {
    write_session_row(out, r);
    all_refueled = all_refueled && r.identified && r.refueled;
  }
  return all_refueled ? kExitOk : kExitAbort;
}

int deception(const RunConfig& cfg, std::ostream& out) {
  out << "eps,i_ab,i_opt,i_limit,p_crit,p_bar_opt,k,log10_bound\n";
  const auto steps = static_cast<std::size_t>(std::floor(cfg.eps_grid_max / cfg.eps_grid_step + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) {
    const double eps = static_cast<double>(i) * cfg.eps_grid_step;
    const double i_opt = info_opt_default(eps);
    out << num(eps) << ',' << num(info_ab(eps)) << ',' << num(i_opt) << ',' << num(info_limit(eps)) << ','
        << num(p_crit(eps)) << ',' << num(p_bar_from_info(i_opt)) << ',' << tolerated_errors(cfg.n_is, eps) << ','
        << num(deception_log_bound(cfg.n_is, eps, cfg.p_bar) / std::log(10.0)) << '\n';
  }
  return kExitOk;
}

int epslim(const RunConfig& cfg, std::ostream& out) {
  out << "s,delta,eps_max,eps_lim\n";
  for (const double s : cfg.epslim_s)
    for (const double delta : cfg.epslim_delta)
      for (const double eps_max : cfg.epslim_eps_max) {
        std::string value;
        try {
          value = num(solve_eps_lim(s, eps_max, delta));
        } catch (const Error& e) {
          if (e.code() != Errc::NoSolution) throw;
          value = "nan";
        }
        out << num(s) << ',' << num(delta) << ',' << num(eps_max) << ',' << value << '\n';
      }
  return kExitOk;
}

int budget(const RunConfig& cfg, std::ostream& out) {
  const auto b = cfg.budget();
  const auto d = distilled_breakdown(b);
  const auto bits = b_min(b.n_pulses, b.s, b.a);
  out << "n_pulses,mu,eta,n_sifted,n_corrected,beamsplit,fuchs,safeguard,pa_compression,distilled,b_min,ratio,"
         "low_intensity\n";
  out << num(b.n_pulses) << ',' << num(b.mu) << ',' << num(b.eta()) << ',' << num(d.n_sifted) << ','
      << num(d.n_corrected) << ',' << num(d.beamsplit) << ',' << num(d.fuchs) << ',' << num(d.safeguard) << ','
      << num(d.pa_compression) << ',' << num(d.distilled) << ',' << bits << ','
      << num(d.distilled / static_cast<double>(bits)) << ',' << (d.low_intensity_regime ? 1 : 0) << '\n';
  return kExitOk;
}

int optimize_mu_cmd(const RunConfig& cfg, std::ostream& out) {
  out << "eta_tl,mu,ratio,break_even_n,optimum\n";
  const auto grid = mu_grid(cfg.mu_step, 1.5);
  for (const double eta_tl : cfg.eta_tl_list) {
    const auto b = cfg.budget().with_eta_tl(eta_tl);
    std::optional<double> best;
    try {
      best = optimize_mu(b, grid).mu;
    } catch (const Error& e) {
      if (e.code() != Errc::AllZero) throw;
    }
    for (const double mu : grid) {
      auto at = b;
      at.mu = mu;
      BreakEvenOptions opts;
      opts.mode = MuMode::Fixed;
      double n_star = std::numeric_limits<double>::infinity();
      try {
        n_star = break_even_n(at, opts);
      } catch (const Error& e) {
        if (e.code() != Errc::NeverBreaksEven) throw;
      }
      out << num(eta_tl) << ',' << num(mu) << ',' << num(distilled_len(at) / at.n_pulses) << ',' << num(n_star) << ','
          << (best && *best == mu ? 1 : 0) << '\n';
    }
  }
  return kExitOk;
}

int auth_tag(const RunConfig& cfg, std::ostream& out) {
  const AuthParams params{kMersenne61, cfg.auth_d};
  Rng rng(RngSeed{cfg.seed});
  out << "p,d,key_hex,message,tag_hex\n";
  for (std::size_t v = 0; v < cfg.vectors; ++v) {
    // Extra groups cover the rare all-ones group that has to be skipped.
    const auto raw = random_bitstring(params.key_bits() + 4 * kDigitBits, rng);
    TestVector tv;
    tv.params = params;
    tv.key = key_from_bits(raw, params).key;
    tv.message = random_bitstring(cfg.message_bits, rng);
    tv.tag = tag_bits(tv.key, tv.message, params);
    std::string line = format_test_vector(tv);
    for (auto& c : line)
      if (c == ' ') c = ',';
    out << line << '\n';
  }
  return kExitOk;
}

int auth_verify(const DispatchInputs& inputs, std::ostream& out) {
  if (!inputs.vectors_path) throw Error(Errc::InvalidArgument, "auth-verify needs --vectors PATH");
  std::ifstream in(*inputs.vectors_path);
  if (!in) throw Error(Errc::ParseError, "cannot open vector file " + *inputs.vectors_path);
  out << "line,valid\n";
  bool all_valid = true;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("p,", 0) == 0) continue;
    for (auto& c : line)
      if (c == ',') c = ' ';
    TestVector tv;
    try {
      tv = parse_test_vector(line);
    } catch (const Error& e) {
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    const bool ok = verify_bits(tv.key, tv.message, tv.tag, tv.params);
    all_valid = all_valid && ok;
    out << line_no << ',' << (ok ? 1 : 0) << '\n';
  }
  return all_valid ? kExitOk : kExitAbort;
}

}  // namespace

const std::vector<std::string_view>& subcommands() {
  static const std::vector<std::string_view> names = {"simulate-qkd", "protocol1", "protocol2",   "deception", "epslim",
                                                      "budget",       "optimize-mu", "auth-tag", "auth-verify"};
  return names;
}

int dispatch(std::string_view subcommand, const RunConfig& cfg, std::ostream& out, std::ostream& err,
             const DispatchInputs& inputs) {
  try {
    cfg.validate();
    using Handler = int (*)(const RunConfig&, std::ostream&);
    Handler handler = nullptr;
    if (subcommand == "simulate-qkd") handler = simulate_qkd;
    else if (subcommand == "protocol1") handler = protocol1;
    else if (subcommand == "protocol2") handler = protocol2;
    else if (subcommand == "deception") handler = deception;
    else if (subcommand == "epslim") handler = epslim;
    else if (subcommand == "budget") handler = budget;
    else if (subcommand == "optimize-mu") handler = optimize_mu_cmd;
    else if (subcommand == "auth-tag") handler = auth_tag;
    else if (subcommand != "auth-verify")
      throw Error(Errc::UnknownSubcommand, "'" + std::string(subcommand) + "'");

    // Rows are produced into a buffer so a failing run leaves no partial CSV.
    std::ostringstream body;
    const int status = handler ? handler(cfg, body) : auth_verify(inputs, body);
    out << "# seed=" << cfg.seed << ", config_hash=" << hex16(config_hash(cfg)) << '\n' << body.str();
    return status;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int run_cli(std::string_view subcommand, const CliOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    if (opts.config_path) cfg = load_config(*opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.trials) cfg.trials = *opts.trials;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  const DispatchInputs inputs{opts.vectors_path};
  if (!opts.out_path) return dispatch(subcommand, cfg, out, err, inputs);
  std::ofstream file(*opts.out_path, std::ios::binary);
  if (!file) {
    err << "error: cannot write " << *opts.out_path << '\n';
    return kExitError;
  }
  return dispatch(subcommand, cfg, file, err, inputs);
}

}  // namespace qid
