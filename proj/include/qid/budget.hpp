#pragma once

// Closed-form analysis: deception probability of the tolerant IS
// comparison, the information curves that bound the usable error rate, and
// the secret-key budget of one authenticated identification session.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace qid {

// Smallest integer strictly greater than x ([0.5] = 1, [2] = 3).
std::int64_t bracket(double x);
// Maximum tolerated errors k = [eps * n].
std::size_t tolerated_errors(std::size_t n, double eps);

// Pr[at most k wrong guesses] for independent per-bit success
// probabilities p[i]; Poisson-binomial recursion over the error count.
double deception_probability_exact(std::span<const double> p, std::size_t k);

// Natural log of p_bar^N * 2^k * C(N, k), k = [eps N].
double deception_log_bound(std::size_t n, double eps, double p_bar);
double deception_probability_bound(std::size_t n, double eps, double p_bar);

// Finite-n base 2^(k/n) C(n,k)^(1/n) p_bar; the bound vanishes with growing
// n when this stays below one.
double deception_base(std::size_t n, double eps, double p_bar);

// 2^-(eps + H2(eps)), the large-n limit of 2^(-k/n) C(n,k)^(-1/n).
double p_crit(double eps);
// Same expression evaluated at finite n with k = [eps n] via log-gamma.
double p_crit_finite(double eps, std::size_t n);

double info_limit(double eps);
// Alice-Bob information of a binary symmetric channel, 1 - H2(eps).
double info_ab(double eps);

using InfoCurve = std::function<double(double)>;
// Eve's information under the optimal individual attack:
// 1 - H2(1/2 + sqrt(eps (1 - eps))).
double info_opt_default(double eps);
// Inverse of I = 1 - H2(p) on [1/2, 1].
double p_bar_from_info(double info);

// Crossing of info_opt and info_limit on [0.01, 0.15]. If the optimal-attack
// curve already lies above the limit at 0.01, the left edge is returned.
double eps_upper_bound(const InfoCurve& info_opt = info_opt_default);

struct BudgetParams {
  double mu = 0.8;
  double eta_tl = 0.63;
  double eta_bob = 0.35;
  double eta_det = 0.55;
  std::optional<double> eta_overall = 0.12;
  double eps = 0.004;
  double eps_max = 0.07;
  double delta = 1e-10;
  std::size_t s = 1000;
  std::size_t a = 61;
  double n_pulses = 6.25e6;

  double eta() const { return eta_overall ? *eta_overall : eta_tl * eta_bob * eta_det; }
  BudgetParams with_eta_tl(double eta_tl) const;
  void validate() const;
};

// 2s([log2 N] + 2) + 32 + 3a.
std::uint64_t b_min(double n_pulses, std::size_t s, std::size_t a);
// Bits of [log2 N] used to write one pulse position.
unsigned position_bits(double n_pulses);

double expected_sifted(double n_pulses, const BudgetParams& params);
double corrected_len(double n_sifted, double eps);

struct DistilledBreakdown {
  double n_sifted = 0;
  double n_corrected = 0;
  // Penalties, each non-negative for valid parameters.
  double beamsplit = 0;       // eta mu^2 / (8 eta_tl) * N
  double fuchs = 0;           // 2 eps_max N_S / ln 2
  double safeguard = 0;       // five standard deviations
  double pa_compression = 0;  // -ln(delta ln 2) / ln 2
  double raw = 0;             // n_corrected minus all penalties
  double distilled = 0;       // raw clamped at zero
  bool low_intensity_regime = true;  // formula assumes mu << 1
};

DistilledBreakdown distilled_breakdown(const BudgetParams& params);
// Same formula with sifted / corrected lengths supplied (measured values).
DistilledBreakdown distilled_breakdown(const BudgetParams& params, double n_sifted, double n_corrected);
double distilled_len(const BudgetParams& params);

struct MuOptimum {
  double mu = 0;
  double ratio = 0;  // N_D / N at mu
};

// Grid mu = step, 2 step, ... up to mu_max.
std::vector<double> mu_grid(double step = 0.01, double mu_max = 1.5);
MuOptimum optimize_mu(const BudgetParams& params, std::span<const double> grid);
MuOptimum optimize_mu(const BudgetParams& params);

enum class MuMode { Fixed, Optimized };

struct BreakEvenOptions {
  MuMode mode = MuMode::Optimized;
  double n_min = 1e3;
  double n_max = 1e12;
  std::vector<double> grid = mu_grid();
  // Replaces b_min(N, s, a) when set.
  std::function<double(double)> b_min_override;
};

// Smallest N (integer pulses) with N_D >= b_min.
double break_even_n(const BudgetParams& params, const BreakEvenOptions& opts = {});

}  // namespace qid
