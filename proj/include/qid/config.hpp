#pragma once

// key=value run configuration. Lines are `key = value`; `#` starts a
// comment. Unknown keys and out-of-range values are rejected before any run.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qid/budget.hpp"
#include "qid/channel.hpp"
#include "qid/error_estimation.hpp"
#include "qid/protocol1.hpp"
#include "qid/protocol2.hpp"

namespace qid {

enum class EveKindSetting { None, InterceptResend, PerBitGuess, Beamsplit };
enum class AttackSetting { None, ThreeParty };

struct RunConfig {
  // physical and protocol scalars
  double mu = 0.8;
  double eta_tl = 0.63;
  double eta_bob = 0.35;
  double eta_det = 0.55;
  std::optional<double> eta_overall = 0.12;  // "none" = product of the three
  double eps = 0.004;
  double eps_max = 0.07;
  double delta = 1e-10;
  std::size_t s = 1000;
  std::size_t a = 61;
  double n_pulses = 6.25e6;

  std::uint64_t seed = 1;
  std::uint64_t trials = 10000;

  // identification with IS triads
  std::size_t n_is = 50;
  double eps_tol = 0.01;
  double eps_chan = 0.01;
  double p_bar = 0.6;

  // quantum channel adversary and public-channel script
  EveKindSetting eve = EveKindSetting::None;
  double eve_param = 1.0;
  AttackSetting attack = AttackSetting::None;
  std::size_t sessions = 1;
  std::size_t pool_bits = 0;  // 0: the three tag keys plus a few spare groups

  // authentication vectors
  std::size_t vectors = 1;
  std::size_t message_bits = 1000;
  std::size_t auth_d = 739;

  // sweeps
  std::vector<double> epslim_s = {1000};
  std::vector<double> epslim_delta = {1e-10};
  std::vector<double> epslim_eps_max = {0.07};
  double eps_grid_step = 0.005;
  double eps_grid_max = 0.15;
  double mu_step = 0.01;
  std::vector<double> eta_tl_list = {0.63, 0.5, 0.4, 0.3};

  ChannelParams channel() const;
  BudgetParams budget() const;
  EstimationParams estimation() const;
  Protocol1Config protocol1() const;
  Protocol2Params protocol2() const;
  EveStrategy eve_strategy() const;

  // Throws RangeError naming the offending field.
  void validate() const;
};

// Throws ParseError (with line number) or RangeError (with field name).
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
// Every key, one per line, in a fixed order; parse_config inverts it.
std::string serialize(const RunConfig& cfg);
// FNV-1a over serialize(cfg).
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace qid
